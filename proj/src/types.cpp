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

#include "linbft/types.hpp"

#include <algorithm>
#include <set>

namespace linbft {

bool SlashReport::operator==(const SlashReport& o) const {
    if (evidence == o.evidence) return true;
    if (!evidence || !o.evidence) return false;
    return *evidence == *o.evidence;
}

NodeId SlashEvidence::offender() const {
    return std::visit(
        [](const auto& ev) -> NodeId {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, EquivocationEvidence>) return ev.first.sig.signer;
            else return ev.proposal.sig.signer;
        },
        kind);
}

std::string SlashEvidence::kind_name() const {
    switch (kind.index()) {
        case 0: return "Equivocation";
        case 1: return "NonLeaderProposal";
        default: return "InvalidBlock";
    }
}

ParticipantSet::ParticipantSet(Epoch epoch, std::vector<Member> members, std::uint64_t stake_per_member,
                               std::optional<std::uint32_t> f_override)
    : epoch_(epoch), members_(std::move(members)), stake_per_member_(stake_per_member) {
    index_.reserve(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) index_.emplace_back(members_[i].id, i);
    std::sort(index_.begin(), index_.end());
    for (std::size_t i = 1; i < index_.size(); ++i)
        if (index_[i].first == index_[i - 1].first)
            throw ConfigError("participant set has duplicate member " + to_string(index_[i].first));
    f_ = default_f(n());
    if (f_override) {
        if (*f_override > f_) throw ConfigError("f override exceeds floor((n-1)/3)");
        f_ = *f_override;
    }
}

std::uint32_t ParticipantSet::quorum() const {
    // ceil((n + f + 1) / 2)
    return (n() + f_ + 2) / 2;
}

std::optional<std::size_t> ParticipantSet::position_of(NodeId id) const {
    auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(id, std::size_t{0}));
    if (it == index_.end() || it->first != id) return std::nullopt;
    return it->second;
}

std::vector<NodeId> ParticipantSet::ids() const {
    std::vector<NodeId> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.id);
    return out;
}

void encode(Encoder& enc, const Signature& sig) {
    enc.u32(sig.signer.index).digest(sig.digest).digest(sig.proof);
}

void encode(Encoder& enc, const SignedProposal& p) {
    enc.u64(p.height).u32(p.round).digest(p.block_hash);
    encode(enc, p.sig);
}

void encode(Encoder& enc, const Transaction& tx) {
    enc.u8(static_cast<std::uint8_t>(tx.index()));
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Transfer>) {
                enc.bytes(t.payload).boolean(t.valid);
            } else if constexpr (std::is_same_v<T, Join>) {
                enc.u32(t.node.index).digest(t.public_key).u64(t.deposit);
            } else if constexpr (std::is_same_v<T, Leave>) {
                enc.u32(t.node.index);
            } else {
                enc.boolean(t.evidence != nullptr);
                if (t.evidence) encode(enc, *t.evidence);
            }
        },
        tx);
}

void encode(Encoder& enc, const SlashEvidence& ev) {
    enc.u8(static_cast<std::uint8_t>(ev.kind.index()));
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, EquivocationEvidence>) {
                encode(enc, k.first);
                encode(enc, k.second);
            } else if constexpr (std::is_same_v<T, NonLeaderProposalEvidence>) {
                encode(enc, k.proposal);
                enc.digest(k.height_seed).u8(static_cast<std::uint8_t>(k.mode));
            } else {
                encode(enc, k.proposal);
                encode(enc, k.block);
                enc.u32(k.tx_index);
            }
        },
        ev.kind);
}

void encode(Encoder& enc, const Block& b) {
    enc.u64(b.height).digest(b.parent_hash).u32(b.proposer.index).u32(b.round).u64(b.txs.size());
    for (const auto& tx : b.txs) encode(enc, tx);
}

HashDigest hash_block(const Block& b) {
    Encoder enc;
    encode(enc, b);
    return tagged_hash("linbft/block/v1", enc);
}

HashDigest proposal_digest(Height height, Round round, const HashDigest& block_hash) {
    Encoder enc;
    enc.u64(height).u32(round).digest(block_hash);
    return tagged_hash("linbft/proposal/v1", enc);
}

bool block_txs_valid(const Block& b, std::uint32_t* failing_index) {
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
        const auto* t = std::get_if<Transfer>(&b.txs[i]);
        if (t && !t->valid) {
            if (failing_index) *failing_index = static_cast<std::uint32_t>(i);
            return false;
        }
    }
    return true;
}

std::string to_string(NodeId id) { return "node" + std::to_string(id.index); }

}  // namespace linbft
