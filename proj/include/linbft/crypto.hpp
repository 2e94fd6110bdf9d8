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

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "linbft/accounting.hpp"
#include "linbft/hash.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Constant-size aggregate: carries no signer identities.
struct ThresholdSignature {
    HashDigest digest;
    std::uint64_t generation = 0;
    HashDigest proof;

    static constexpr std::size_t kEncodedSize = 32 + 8 + 32;
    bool operator==(const ThresholdSignature&) const = default;
};

struct MultiSignature {
    HashDigest digest;
    std::vector<NodeId> signers;  // sorted, distinct
    HashDigest proof;
    bool operator==(const MultiSignature&) const = default;
};

/// Output of one (modeled) DKG run. `generation` identifies the run; key
/// shares and the group key are derived from it inside the provider.
struct ThresholdKeySet {
    Epoch epoch = 0;
    std::uint64_t generation = 0;
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    std::vector<NodeId> holders;
    HashDigest group_public_key;
    bool valid = true;

    bool holds(NodeId id) const;
    std::uint32_t quorum() const { return t + 1; }
    bool operator==(const ThresholdKeySet&) const = default;
};

enum class CryptoErrc { NoKey, InsufficientShares, MixedDigests, DkgFailed, EmptyInput };

class CryptoError : public std::runtime_error {
public:
    CryptoError(CryptoErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    CryptoErrc code() const { return code_; }

private:
    CryptoErrc code_;
};

/// Signing, aggregation and verification. Implementations must give unique
/// (deterministic) signatures per (signer, digest).
class CryptoProvider {
public:
    virtual ~CryptoProvider() = default;

    virtual ThresholdKeySet make_keyset(const ParticipantSet& set, std::uint64_t generation, bool valid) const = 0;
    virtual Signature sign(const ThresholdKeySet& keys, NodeId node, const HashDigest& digest) const = 0;
    virtual bool verify(const ThresholdKeySet& keys, const Signature& sig) const = 0;

    /// Requires at least t+1 distinct valid shares over one digest.
    virtual ThresholdSignature combine_threshold(std::span<const Signature> shares,
                                                 const ThresholdKeySet& keys) const = 0;
    virtual bool verify_threshold(const ThresholdSignature& ts, const HashDigest& digest,
                                  const ThresholdKeySet& keys) const = 0;

    virtual MultiSignature combine_multi(std::span<const Signature> shares, const ThresholdKeySet& keys) const = 0;
    virtual bool verify_multi(const MultiSignature& ms, const HashDigest& digest,
                              const ThresholdKeySet& keys) const = 0;
};

/// Deterministic stand-in for BLS. A share is H(node secret || digest); the
/// threshold proof is H(group secret || digest) and the group secret never
/// leaves the provider, so the only way to obtain a proof is combine_threshold
/// with t+1 verified distinct shares.
class IdealCrypto final : public CryptoProvider {
public:
    explicit IdealCrypto(const HashDigest& master_secret) : master_(master_secret) {}

    ThresholdKeySet make_keyset(const ParticipantSet& set, std::uint64_t generation, bool valid) const override;
    Signature sign(const ThresholdKeySet& keys, NodeId node, const HashDigest& digest) const override;
    bool verify(const ThresholdKeySet& keys, const Signature& sig) const override;
    ThresholdSignature combine_threshold(std::span<const Signature> shares,
                                         const ThresholdKeySet& keys) const override;
    bool verify_threshold(const ThresholdSignature& ts, const HashDigest& digest,
                          const ThresholdKeySet& keys) const override;
    MultiSignature combine_multi(std::span<const Signature> shares, const ThresholdKeySet& keys) const override;
    bool verify_multi(const MultiSignature& ms, const HashDigest& digest, const ThresholdKeySet& keys) const override;

private:
    HashDigest node_secret(std::uint64_t generation, NodeId node) const;
    HashDigest group_secret(std::uint64_t generation) const;
    HashDigest share_proof(std::uint64_t generation, NodeId node, const HashDigest& digest) const;

    HashDigest master_;
};

/// H(ts.proof || tag).
HashDigest vrf_output(const ThresholdSignature& ts, std::uint64_t tag);
/// Same construction over a raw seed digest (the height seed is H(ts)).
HashDigest vrf_output(const HashDigest& seed, std::uint64_t tag);

struct DkgParams {
    double failure_prob = 0.0;
    double cost_constant = 1.0;
    std::uint64_t rng_seed = 0;
    std::uint64_t generation = 0;
};

struct DkgResult {
    ThresholdKeySet keys;
    TransmissionRecord cost;
};

/// ceil(c * n * ceil(log2 n)^3).
std::uint64_t dkg_cost_units(std::uint32_t n, double cost_constant);
std::uint32_t ceil_log2(std::uint64_t n);

/// Modeled DKG: records its transmission cost and succeeds with
/// probability 1 - failure_prob drawn from rng_seed.
DkgResult run_dkg(const ParticipantSet& set, const CryptoProvider& crypto, const DkgParams& params);

}  // namespace linbft
