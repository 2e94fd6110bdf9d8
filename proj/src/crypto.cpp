/**
 * Copyright 2026 The LinBFT Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "linbft/crypto.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "linbft/rng.hpp"

namespace linbft {

std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index) {
    Encoder enc;
    enc.u64(base).str(label).u64(index);
    return tagged_hash("linbft/seed/v1", enc).prefix_u64();
}

bool ThresholdKeySet::holds(NodeId id) const {
    return std::find(holders.begin(), holders.end(), id) != holders.end();
}

HashDigest IdealCrypto::node_secret(std::uint64_t generation, NodeId node) const {
    Encoder enc;
    enc.digest(master_).u64(generation).u32(node.index);
    return tagged_hash("linbft/ideal/node-secret", enc);
}

HashDigest IdealCrypto::group_secret(std::uint64_t generation) const {
    Encoder enc;
    enc.digest(master_).u64(generation);
    return tagged_hash("linbft/ideal/group-secret", enc);
}

HashDigest IdealCrypto::share_proof(std::uint64_t generation, NodeId node, const HashDigest& digest) const {
    Encoder enc;
    enc.digest(node_secret(generation, node)).digest(digest);
    return tagged_hash("linbft/ideal/share", enc);
}

ThresholdKeySet IdealCrypto::make_keyset(const ParticipantSet& set, std::uint64_t generation, bool valid) const {
    ThresholdKeySet keys;
    keys.epoch = set.epoch();
    keys.generation = generation;
    keys.n = set.n();
    keys.t = set.threshold_t();
    keys.holders = set.ids();
    Encoder enc;
    enc.digest(group_secret(generation));
    keys.group_public_key = tagged_hash("linbft/ideal/group-pk", enc);
    keys.valid = valid;
    return keys;
}

Signature IdealCrypto::sign(const ThresholdKeySet& keys, NodeId node, const HashDigest& digest) const {
    if (!keys.holds(node))
        throw CryptoError(CryptoErrc::NoKey, to_string(node) + " holds no key for generation " +
                                                 std::to_string(keys.generation));
    return Signature{node, digest, share_proof(keys.generation, node, digest)};
}

bool IdealCrypto::verify(const ThresholdKeySet& keys, const Signature& sig) const {
    return keys.holds(sig.signer) && sig.proof == share_proof(keys.generation, sig.signer, sig.digest);
}

ThresholdSignature IdealCrypto::combine_threshold(std::span<const Signature> shares,
                                                  const ThresholdKeySet& keys) const {
    if (shares.empty()) throw CryptoError(CryptoErrc::EmptyInput, "no shares to combine");
    const HashDigest& digest = shares.front().digest;
    for (const auto& s : shares)
        if (s.digest != digest) throw CryptoError(CryptoErrc::MixedDigests, "shares cover different digests");
    if (!keys.valid)
        throw CryptoError(CryptoErrc::DkgFailed, "key generation " + std::to_string(keys.generation) +
                                                     " is unusable for threshold signing");
    std::set<NodeId> distinct;
    for (const auto& s : shares)
        if (verify(keys, s)) distinct.insert(s.signer);
    if (distinct.size() < keys.quorum())
        throw CryptoError(CryptoErrc::InsufficientShares,
                          std::to_string(distinct.size()) + " valid shares, need " + std::to_string(keys.quorum()));
    Encoder enc;
    enc.digest(group_secret(keys.generation)).digest(digest);
    return ThresholdSignature{digest, keys.generation, tagged_hash("linbft/ideal/threshold", enc)};
}

bool IdealCrypto::verify_threshold(const ThresholdSignature& ts, const HashDigest& digest,
                                   const ThresholdKeySet& keys) const {
    if (!keys.valid || ts.generation != keys.generation || ts.digest != digest) return false;
    Encoder enc;
    enc.digest(group_secret(keys.generation)).digest(digest);
    return ts.proof == tagged_hash("linbft/ideal/threshold", enc);
}

MultiSignature IdealCrypto::combine_multi(std::span<const Signature> shares, const ThresholdKeySet& keys) const {
    if (shares.empty()) throw CryptoError(CryptoErrc::EmptyInput, "no shares to combine");
    const HashDigest& digest = shares.front().digest;
    std::map<NodeId, HashDigest> by_signer;
    for (const auto& s : shares) {
        if (s.digest != digest) throw CryptoError(CryptoErrc::MixedDigests, "shares cover different digests");
        if (verify(keys, s)) by_signer.emplace(s.signer, s.proof);
    }
    MultiSignature ms;
    ms.digest = digest;
    Encoder enc;
    enc.digest(digest);
    for (const auto& [signer, proof] : by_signer) {
        ms.signers.push_back(signer);
        enc.u32(signer.index).digest(proof);
    }
    ms.proof = tagged_hash("linbft/ideal/multi", enc);
    return ms;
}

bool IdealCrypto::verify_multi(const MultiSignature& ms, const HashDigest& digest, const ThresholdKeySet& keys) const {
    if (ms.digest != digest || ms.signers.empty()) return false;
    Encoder enc;
    enc.digest(digest);
    for (std::size_t i = 0; i < ms.signers.size(); ++i) {
        if (i > 0 && !(ms.signers[i - 1] < ms.signers[i])) return false;
        if (!keys.holds(ms.signers[i])) return false;
        enc.u32(ms.signers[i].index).digest(share_proof(keys.generation, ms.signers[i], digest));
    }
    return ms.proof == tagged_hash("linbft/ideal/multi", enc);
}

HashDigest vrf_output(const HashDigest& seed, std::uint64_t tag) {
    Encoder enc;
    enc.digest(seed).u64(tag);
    return tagged_hash("linbft/vrf/v1", enc);
}

HashDigest vrf_output(const ThresholdSignature& ts, std::uint64_t tag) { return vrf_output(ts.proof, tag); }

std::uint32_t ceil_log2(std::uint64_t n) {
    std::uint32_t k = 0;
    while ((std::uint64_t{1} << k) < n) ++k;
    return k;
}

std::uint64_t dkg_cost_units(std::uint32_t n, double cost_constant) {
    const double l = ceil_log2(n);
    return static_cast<std::uint64_t>(std::ceil(cost_constant * n * l * l * l));
}

DkgResult run_dkg(const ParticipantSet& set, const CryptoProvider& crypto, const DkgParams& params) {
    Rng rng(params.rng_seed);
    const bool valid = !(rng.unit() < params.failure_prob);
    DkgResult out;
    out.keys = crypto.make_keyset(set, params.generation, valid);
    out.cost.msg_kind = "DKG";
    out.cost.size_class = SizeClass::Constant;
    out.cost.units = dkg_cost_units(set.n(), params.cost_constant);
    return out;
}

}  // namespace linbft
