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

#include <optional>
#include <stdexcept>
#include <vector>

#include "linbft/accounting.hpp"
#include "linbft/crypto.hpp"
#include "linbft/ledger.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Membership requests accumulated from finalized blocks during one epoch.
struct EpochSchedule {
    std::uint64_t epoch_length_blocks = 0;
    Epoch current_epoch = 0;
    std::vector<Join> pending_joins;
    std::vector<NodeId> pending_leaves;
    std::vector<NodeId> pending_slashes;

    bool boundary(Height h) const { return epoch_length_blocks > 0 && h % epoch_length_blocks == 0; }
    bool operator==(const EpochSchedule&) const = default;
};

/// Appends the block's Join/Leave/slash requests; for one node the last
/// request in chain order wins. Joins with less than `min_deposit` are invalid
/// and skipped.
EpochSchedule ingest_finalized_block(const EpochSchedule& sched, const Block& b, std::uint64_t min_deposit);

class EpochError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DkgConfig {
    double failure_prob = 0.0;
    double cost_constant = 1.0;
    std::uint64_t seed = 0;
};

/// Key generations are unique per (epoch, attempt).
inline std::uint64_t key_generation(Epoch epoch, std::uint64_t attempt) { return epoch << 20 | attempt; }

struct EpochTransition {
    ParticipantSet next_set;
    ThresholdKeySet keys;
    StakeLedger ledger;
    EpochSchedule schedule;
    TransmissionRecord dkg_cost;
    TransmissionRecord exchange_cost;  // pairwise key/address exchange, n'(n'-1) units
};

/// Builds (members - leaves - slashed) + joins, deposits/withdraws stake and
/// runs a fresh DKG over the whole new set. Throws EpochError if n' < 4.
EpochTransition epoch_transition(const EpochSchedule& sched, const ParticipantSet& set, const StakeLedger& ledger,
                                 const CryptoProvider& crypto, const DkgConfig& dkg);

/// A DKG execution or key exchange that setup accounting must charge once.
struct SetupCost {
    Height height = 0;  // first height using the new keys
    std::uint64_t generation = 0;
    TransmissionRecord dkg;
    std::optional<TransmissionRecord> exchange;
    bool keys_valid = true;
};

/// One replica's view of membership and keys. Deterministic given the
/// finalized chain, so honest replicas agree.
class EpochManager {
public:
    EpochManager(ParticipantSet genesis, const CryptoProvider& crypto, std::uint64_t epoch_length, DkgConfig dkg);

    const ParticipantSet& set() const { return set_; }
    const ThresholdKeySet& keys() const { return keys_; }
    const StakeLedger& ledger() const { return ledger_; }
    const EpochSchedule& schedule() const { return schedule_; }
    std::uint64_t attempt() const { return attempt_; }

    /// Ingests block `b` (just finalized). Returns setup costs triggered for
    /// height b.height + 1: an epoch transition at boundaries, or a DKG re-run
    /// when `b` had to finalize on unusable keys.
    std::vector<SetupCost> on_finalized(const Block& b);

    /// Applies on-chain slash evidence to the ledger; false if rejected.
    bool apply_slash(const SlashEvidence& ev, const EvidenceContext& ctx, Height height);

    const SetupCost& genesis_cost() const { return genesis_cost_; }

private:
    const CryptoProvider* crypto_;
    DkgConfig dkg_;
    ParticipantSet set_;
    ThresholdKeySet keys_;
    StakeLedger ledger_;
    EpochSchedule schedule_;
    std::uint64_t attempt_ = 0;
    SetupCost genesis_cost_;
};

}  // namespace linbft
