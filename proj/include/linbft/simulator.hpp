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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linbft/accounting.hpp"
#include "linbft/epoch.hpp"
#include "linbft/replica.hpp"
#include "linbft/scenario.hpp"

namespace linbft {

/// Which nodes the adversary controls at each height.
class CorruptionSchedule {
public:
    CorruptionSchedule(const AdversarySpec& spec, const ParticipantSet& genesis, std::uint32_t count);

    bool corrupted(NodeId id, Height h) const;
    BehaviorSet behaviors(NodeId id, Height h) const;
    const std::vector<NodeId>& corrupted_at(Height h) const;

private:
    AdversarySpec spec_;
    ParticipantSet genesis_;
    std::uint32_t count_;
    mutable std::map<Height, std::vector<NodeId>> cache_;
};

struct HeightRecord {
    Height height = 0;
    HashDigest block_hash;
    Round rounds_used = 0;
    std::uint32_t view_changes = 0;
    std::uint64_t volume = 0;  // counted units, Constant + Linear
    std::uint64_t constant_units = 0;
    std::uint64_t linear_units = 0;
    std::uint64_t uncounted_units = 0;
    std::uint64_t block_body_volume = 0;
    std::map<std::string, std::uint64_t> by_kind;
    SimTime started_at = 0;
    SimTime first_finalized_at = 0;
    SimTime last_finalized_at = 0;
    bool started_after_gst = true;
    bool fallback = false;
    std::string speculative = "off";  // off | success | fallback-prepare | fallback-commit
    std::vector<std::string> slashes;
    std::uint32_t malicious_prefix = 0;
};

struct EvidenceRecord {
    Height detected_at = 0;
    NodeId reporter;
    NodeId offender;
    std::string kind;
};

struct RunReport {
    std::string name;
    std::uint32_t n = 0;
    std::uint32_t f = 0;
    std::uint32_t f_actual = 0;
    std::uint64_t num_heights = 0;
    std::uint64_t seed = 0;
    LeaderMode leader_mode = LeaderMode::Permutation;
    bool speculative = false;
    SimTime gst = 0;
    SimTime delta = 0;

    std::vector<HeightRecord> heights;
    std::vector<SetupCost> setup;
    std::vector<EvidenceRecord> evidence;
    std::vector<SpeculativePass> passes;
    std::vector<SlashRecord> slashed;

    std::uint64_t safety_violations = 0;
    std::uint64_t participant_set_mismatches = 0;
    std::uint64_t post_gst_bound_violations = 0;
    bool all_finalized = false;
    bool watchdog_fired = false;
    SimTime watchdog = 0;
    SimTime finished_at = 0;
    std::uint64_t events = 0;
    std::uint64_t total_volume = 0;
    std::uint64_t setup_units = 0;
    std::uint32_t max_malicious_prefix = 0;
    bool stake_conserved = true;

    bool safe() const { return safety_violations == 0 && participant_set_mismatches == 0; }
    bool live() const { return all_finalized && !watchdog_fired; }
    double amortized_setup_per_block() const;
    double amortized_volume_per_block() const;
};

class SafetyViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::vector<TransmissionRecord>* transmissions = nullptr;  // filled when set
    std::vector<std::string>* trace = nullptr;                 // one line per event when set
};

/// Runs the scenario to completion or watchdog. Throws ConfigInvalid.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Throws SafetyViolation if the report records any fork.
void assert_safe(const RunReport& report);

}  // namespace linbft
