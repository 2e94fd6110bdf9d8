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

#include "linbft/ledger.hpp"

#include <algorithm>

#include "linbft/leader.hpp"

namespace linbft {

void StakeLedger::deposit(NodeId node, std::uint64_t amount) {
    deposits_[node] += amount;
    deposited_ += amount;
}

std::uint64_t StakeLedger::withdraw(NodeId node) {
    auto it = deposits_.find(node);
    if (it == deposits_.end()) return 0;
    const auto amount = it->second;
    withdrawn_ += amount;
    deposits_.erase(it);
    return amount;
}

std::uint64_t StakeLedger::deposit_of(NodeId node) const {
    auto it = deposits_.find(node);
    return it == deposits_.end() ? 0 : it->second;
}

bool StakeLedger::is_slashed(NodeId node) const {
    return std::any_of(slashed_.begin(), slashed_.end(), [&](const SlashRecord& r) { return r.node == node; });
}

std::uint64_t StakeLedger::total_deposits() const {
    std::uint64_t sum = 0;
    for (const auto& [_, amount] : deposits_) sum += amount;
    return sum;
}

bool verify_proposal(const SignedProposal& p, const EvidenceContext& ctx) {
    return p.sig.digest == proposal_digest(p.height, p.round, p.block_hash) && ctx.crypto->verify(*ctx.keys, p.sig);
}

bool verify_evidence(const SlashEvidence& ev, const EvidenceContext& ctx) {
    return std::visit(
        [&](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, EquivocationEvidence>) {
                return k.first.height == k.second.height && k.first.round == k.second.round &&
                       k.first.sig.signer == k.second.sig.signer && k.first.block_hash != k.second.block_hash &&
                       verify_proposal(k.first, ctx) && verify_proposal(k.second, ctx);
            } else if constexpr (std::is_same_v<T, NonLeaderProposalEvidence>) {
                if (!verify_proposal(k.proposal, ctx)) return false;
                if (ctx.seed_of) {
                    auto known = ctx.seed_of(k.proposal.height);
                    if (known && *known != k.height_seed) return false;
                }
                return leader_for(k.proposal.height, k.proposal.round, k.height_seed, *ctx.set, k.mode) !=
                       k.proposal.sig.signer;
            } else {
                if (!verify_proposal(k.proposal, ctx) || hash_block(k.block) != k.proposal.block_hash) return false;
                if (k.tx_index >= k.block.txs.size()) return false;
                const auto* t = std::get_if<Transfer>(&k.block.txs[k.tx_index]);
                return t && !t->valid;
            }
        },
        ev.kind);
}

SlashResult apply_slash(const StakeLedger& ledger, const SlashEvidence& ev, const ParticipantSet& set,
                        const EvidenceContext& ctx, Height height) {
    const NodeId offender = ev.offender();
    if (!set.contains(offender))
        throw SlashError(SlashErrc::NotAMember, to_string(offender) + " is not in the participant set");
    if (!verify_evidence(ev, ctx)) throw SlashError(SlashErrc::InvalidEvidence, "slash evidence does not verify");

    SlashResult out{ledger, set, false};
    std::vector<Member> remaining;
    for (const auto& m : set.members())
        if (m.id != offender) remaining.push_back(m);
    out.pending_set = ParticipantSet(set.epoch(), std::move(remaining), set.stake_per_member());

    if (ledger.is_slashed(offender)) return out;
    auto& l = out.ledger;
    std::uint64_t amount = 0;
    if (auto it = l.deposits_.find(offender); it != l.deposits_.end()) {
        amount = it->second;
        it->second = 0;
    }
    l.confiscated_ += amount;
    l.slashed_.push_back(SlashRecord{offender, ev, height, amount});
    out.newly_slashed = true;
    return out;
}

}  // namespace linbft
