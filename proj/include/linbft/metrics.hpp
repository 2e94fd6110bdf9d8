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

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linbft/simulator.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Fault-free, non-speculative closed form: five n-1 fan-outs per height.
std::uint64_t ordinary_case_volume(std::uint32_t n);

/// All-to-all PBFT pattern: Preprepare fan-out plus n(n-1) Prepare and
/// n(n-1) Commit messages.
std::uint64_t pbft_baseline_volume(std::uint32_t n);

/// (DKG + pairwise exchange) / E for one epoch of length E.
double amortized_setup_per_block(std::uint32_t n, std::uint64_t epoch_length, double dkg_cost_constant);

class DegenerateSweep : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Least-squares slope of log(volume) against log(n). Needs at least four
/// distinct n and positive volumes.
double fit_complexity(const std::vector<std::pair<std::uint32_t, double>>& sweep);

/// Consecutive corrupted leaders from round 1 at `height`.
std::uint32_t malicious_prefix(Height height, const HashDigest& seed, const ParticipantSet& set, LeaderMode mode,
                               const std::function<bool(NodeId)>& corrupted);

struct ComplexityReport {
    std::vector<std::uint32_t> n_values;
    std::vector<std::vector<std::uint64_t>> per_height_volume;  // one list per n
    std::vector<double> mean_volume;
    std::vector<double> amortized_per_block;  // includes setup spread over the run
    std::vector<std::uint64_t> baseline_volume;
    double slope_fit = 0.0;
    double baseline_slope = 0.0;
    std::uint32_t max_malicious_prefix = 0;
    bool degraded = false;  // some height finalized on the unaggregated path
};

ComplexityReport complexity_report(const std::vector<RunReport>& runs);

}  // namespace linbft
