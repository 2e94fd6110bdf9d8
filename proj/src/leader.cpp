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

#include "linbft/leader.hpp"

#include <map>
#include <numeric>

namespace linbft {

std::vector<std::size_t> leader_permutation(const HashDigest& height_seed, std::uint32_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        Encoder enc;
        enc.digest(height_seed).u64(i);
        const auto draw = tagged_hash("linbft/permutation/v1", enc).prefix_u64();
        std::swap(perm[i - 1], perm[draw % i]);
    }
    return perm;
}

NodeId leader_for(Height /*height*/, Round round, const HashDigest& height_seed, const ParticipantSet& set,
                  LeaderMode mode) {
    const std::uint32_t n = set.n();
    if (n == 0) throw ConfigError("leader_for on an empty participant set");
    if (mode == LeaderMode::Modular) return set.at(vrf_output(height_seed, round).prefix_u64() % n);
    // Every replica asks for the same few schedules over and over.
    thread_local std::map<std::pair<HashDigest, std::uint32_t>, std::vector<std::size_t>> cache;
    auto it = cache.find({height_seed, n});
    if (it == cache.end()) {
        if (cache.size() >= 1024) cache.clear();
        it = cache.emplace(std::make_pair(height_seed, n), leader_permutation(height_seed, n)).first;
    }
    return set.at(it->second[(round == 0 ? 0 : round - 1) % n]);
}

std::string to_string(LeaderMode mode) { return mode == LeaderMode::Modular ? "modular" : "permutation"; }

LeaderMode leader_mode_from_string(const std::string& s) {
    if (s == "modular") return LeaderMode::Modular;
    if (s == "permutation") return LeaderMode::Permutation;
    throw ConfigError("unknown leader_mode '" + s + "'");
}

}  // namespace linbft
