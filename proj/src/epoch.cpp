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

#include "linbft/epoch.hpp"

#include "linbft/rng.hpp"

#include <algorithm>

namespace linbft {

namespace {

template <typename C, typename P>
void erase_if_present(C& c, P pred) {
    c.erase(std::remove_if(c.begin(), c.end(), pred), c.end());
}

DkgParams dkg_params(const DkgConfig& cfg, std::uint64_t generation) {
    return DkgParams{cfg.failure_prob, cfg.cost_constant, derive_seed(cfg.seed, "dkg", generation), generation};
}

}  // namespace

EpochSchedule ingest_finalized_block(const EpochSchedule& sched, const Block& b, std::uint64_t min_deposit) {
    EpochSchedule out = sched;
    for (const auto& tx : b.txs) {
        if (const auto* j = std::get_if<Join>(&tx)) {
            if (j->deposit < min_deposit) continue;
            erase_if_present(out.pending_leaves, [&](NodeId id) { return id == j->node; });
            erase_if_present(out.pending_joins, [&](const Join& p) { return p.node == j->node; });
            out.pending_joins.push_back(*j);
        } else if (const auto* l = std::get_if<Leave>(&tx)) {
            erase_if_present(out.pending_joins, [&](const Join& p) { return p.node == l->node; });
            if (std::find(out.pending_leaves.begin(), out.pending_leaves.end(), l->node) == out.pending_leaves.end())
                out.pending_leaves.push_back(l->node);
        } else if (const auto* s = std::get_if<SlashReport>(&tx)) {
            if (!s->evidence) continue;
            const NodeId offender = s->evidence->offender();
            if (std::find(out.pending_slashes.begin(), out.pending_slashes.end(), offender) ==
                out.pending_slashes.end())
                out.pending_slashes.push_back(offender);
        }
    }
    return out;
}

EpochTransition epoch_transition(const EpochSchedule& sched, const ParticipantSet& set, const StakeLedger& ledger,
                                 const CryptoProvider& crypto, const DkgConfig& dkg) {
    auto leaving = [&](NodeId id) {
        return std::find(sched.pending_leaves.begin(), sched.pending_leaves.end(), id) != sched.pending_leaves.end();
    };
    EpochTransition out;
    out.ledger = ledger;
    std::vector<Member> members;
    for (const auto& m : set.members()) {
        if (ledger.is_slashed(m.id)) continue;
        if (leaving(m.id)) {
            out.ledger.withdraw(m.id);
            continue;
        }
        members.push_back(m);
    }
    for (const auto& j : sched.pending_joins) {
        if (ledger.is_slashed(j.node)) continue;
        if (std::any_of(members.begin(), members.end(), [&](const Member& m) { return m.id == j.node; })) continue;
        members.push_back(Member{j.node, j.public_key});
        out.ledger.deposit(j.node, set.stake_per_member());
    }
    if (members.size() < 4)
        throw EpochError("next participant set has " + std::to_string(members.size()) +
                         " members; at least 4 are needed for f >= 1");

    const Epoch next_epoch = sched.current_epoch + 1;
    out.next_set = ParticipantSet(next_epoch, std::move(members), set.stake_per_member());
    auto dkg_run = run_dkg(out.next_set, crypto, dkg_params(dkg, key_generation(next_epoch, 0)));
    out.keys = dkg_run.keys;
    out.dkg_cost = dkg_run.cost;
    const std::uint64_t n = out.next_set.n();
    out.exchange_cost.msg_kind = "KeyExchange";
    out.exchange_cost.units = n * (n - 1);

    out.schedule.epoch_length_blocks = sched.epoch_length_blocks;
    out.schedule.current_epoch = next_epoch;
    return out;
}

EpochManager::EpochManager(ParticipantSet genesis, const CryptoProvider& crypto, std::uint64_t epoch_length,
                           DkgConfig dkg)
    : crypto_(&crypto), dkg_(dkg), set_(std::move(genesis)) {
    schedule_.epoch_length_blocks = epoch_length;
    schedule_.current_epoch = set_.epoch();
    for (const auto& m : set_.members()) ledger_.deposit(m.id, set_.stake_per_member());
    auto run = run_dkg(set_, *crypto_, dkg_params(dkg_, key_generation(set_.epoch(), 0)));
    keys_ = run.keys;
    genesis_cost_ = SetupCost{1, keys_.generation, run.cost, std::nullopt, keys_.valid};
    const std::uint64_t n = set_.n();
    TransmissionRecord exchange;
    exchange.msg_kind = "KeyExchange";
    exchange.units = n * (n - 1);
    genesis_cost_.exchange = exchange;
}

std::vector<SetupCost> EpochManager::on_finalized(const Block& b) {
    std::vector<SetupCost> costs;
    const bool keys_failed = !keys_.valid;
    schedule_ = ingest_finalized_block(schedule_, b, set_.stake_per_member());
    if (schedule_.boundary(b.height)) {
        auto tr = epoch_transition(schedule_, set_, ledger_, *crypto_, dkg_);
        set_ = std::move(tr.next_set);
        keys_ = tr.keys;
        ledger_ = std::move(tr.ledger);
        schedule_ = std::move(tr.schedule);
        attempt_ = 0;
        costs.push_back(SetupCost{b.height + 1, keys_.generation, tr.dkg_cost, tr.exchange_cost, keys_.valid});
    } else if (keys_failed) {
        ++attempt_;
        auto run = run_dkg(set_, *crypto_, dkg_params(dkg_, key_generation(set_.epoch(), attempt_)));
        keys_ = run.keys;
        costs.push_back(SetupCost{b.height + 1, keys_.generation, run.cost, std::nullopt, keys_.valid});
    }
    return costs;
}

bool EpochManager::apply_slash(const SlashEvidence& ev, const EvidenceContext& ctx, Height height) {
    try {
        auto res = linbft::apply_slash(ledger_, ev, set_, ctx, height);
        ledger_ = std::move(res.ledger);
        return res.newly_slashed;
    } catch (const SlashError&) {
        return false;
    }
}

}  // namespace linbft
