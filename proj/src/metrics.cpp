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


#include "linbft/metrics.hpp"

#include <cmath>
#include <set>

#include "linbft/crypto.hpp"
#include "linbft/leader.hpp"

namespace linbft {

std::uint64_t ordinary_case_volume(std::uint32_t n) { return n <= 1 ? 0 : 5ull * (n - 1); }

std::uint64_t pbft_baseline_volume(std::uint32_t n) {
    if (n <= 1) return 0;
    const std::uint64_t m = n;
    return (m - 1) + 2 * m * (m - 1);
}

double amortized_setup_per_block(std::uint32_t n, std::uint64_t epoch_length, double dkg_cost_constant) {
    const double setup = static_cast<double>(dkg_cost_units(n, dkg_cost_constant)) +
                         static_cast<double>(n) * static_cast<double>(n - 1);
    return setup / static_cast<double>(epoch_length);
}

double fit_complexity(const std::vector<std::pair<std::uint32_t, double>>& sweep) {
    std::set<std::uint32_t> distinct;
    for (const auto& [n, v] : sweep) {
        if (n == 0 || !(v > 0.0)) throw DegenerateSweep("sweep points need n > 0 and positive volume");
        distinct.insert(n);
    }
    if (distinct.size() < 4)
        throw DegenerateSweep("slope fit needs at least 4 distinct n, got " + std::to_string(distinct.size()));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(sweep.size());
    for (const auto& [n, v] : sweep) {
        const double x = std::log(static_cast<double>(n));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::uint32_t malicious_prefix(Height height, const HashDigest& seed, const ParticipantSet& set, LeaderMode mode,
                               const std::function<bool(NodeId)>& corrupted) {
    std::uint32_t prefix = 0;
    for (Round r = 1; r <= set.n(); ++r) {
        if (!corrupted(leader_for(height, r, seed, set, mode))) break;
        ++prefix;
    }
    return prefix;
}

ComplexityReport complexity_report(const std::vector<RunReport>& runs) {
    ComplexityReport out;
    std::vector<std::pair<std::uint32_t, double>> lin, base;
    for (const auto& run : runs) {
        out.n_values.push_back(run.n);
        std::vector<std::uint64_t> vols;
        for (const auto& h : run.heights) {
            vols.push_back(h.volume);
            out.degraded = out.degraded || h.fallback;
        }
        double mean = 0.0;
        for (auto v : vols) mean += static_cast<double>(v);
        mean = vols.empty() ? 0.0 : mean / static_cast<double>(vols.size());
        out.per_height_volume.push_back(std::move(vols));
        out.mean_volume.push_back(mean);
        out.amortized_per_block.push_back(run.amortized_volume_per_block());
        out.baseline_volume.push_back(pbft_baseline_volume(run.n));
        out.max_malicious_prefix = std::max(out.max_malicious_prefix, run.max_malicious_prefix);
        lin.emplace_back(run.n, mean);
        base.emplace_back(run.n, static_cast<double>(pbft_baseline_volume(run.n)));
    }
    out.slope_fit = fit_complexity(lin);
    out.baseline_slope = fit_complexity(base);
    return out;
}

}  // namespace linbft
