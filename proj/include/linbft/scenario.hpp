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
#include <stdexcept>
#include <string>
#include <vector>

#include "linbft/network.hpp"
#include "linbft/replica.hpp"
#include "linbft/types.hpp"

namespace linbft {

inline constexpr std::uint32_t kSchemaVersion = 1;

/// Corruption model. The corrupted set is fixed per height; with
/// `rotate_per_height` a fresh set of the same size is drawn every height.
struct AdversarySpec {
    std::vector<NodeId> corrupted;
    BehaviorSet behaviors = 0;  // applied to every corrupted node
    std::map<NodeId, BehaviorSet> per_node;
    bool rushing = true;
    bool rotate_per_height = false;
    std::uint64_t rotation_seed = 0;
};

/// A membership request injected into every mempool once the chain reaches
/// `at_height`.
struct MembershipRequest {
    Height at_height = 1;
    Transaction tx;
};

struct ScenarioConfig {
    std::uint32_t schema_version = kSchemaVersion;
    std::string name = "scenario";
    std::uint32_t n = 4;
    std::uint32_t f_actual = 0;
    std::uint64_t num_heights = 10;
    std::uint64_t seed = 1;
    LeaderMode leader_mode = LeaderMode::Permutation;
    bool speculative = false;
    NetworkConfig network;
    AdversarySpec adversary;
    std::uint64_t epoch_length = 0;  // 0: 4n
    double dkg_failure_prob = 0.0;
    double dkg_cost_constant = 1.0;
    double rho = 1e-18;
    std::size_t max_txs_per_block = kDefaultMaxTxsPerBlock;
    HashDigest genesis_seed;  // zero: derived from `seed`
    std::uint64_t stake = 100;
    std::uint32_t tree_fanout = 2;
    SimTime initial_timeout = 0;  // 0: 8 delta
    std::size_t buffer_capacity = 4096;
    std::vector<MembershipRequest> requests;

    std::uint64_t effective_epoch_length() const { return epoch_length == 0 ? 4ull * n : epoch_length; }
    SimTime effective_initial_timeout() const {
        return initial_timeout == 0 ? 8 * network.delta : initial_timeout;
    }
    HashDigest effective_genesis_seed() const;
    std::uint32_t f() const { return ParticipantSet::default_f(n); }
};

class ConfigInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ConfigInvalid naming the first violated constraint.
void validate(const ScenarioConfig& cfg);

ScenarioConfig parse_scenario(const std::string& toml_text);
ScenarioConfig load_scenario(const std::string& path);

BehaviorSet behavior_from_string(const std::string& s);
std::string behaviors_to_string(BehaviorSet b);

/// Deterministic node public key for node `index`.
HashDigest node_public_key(std::uint32_t index);

}  // namespace linbft
