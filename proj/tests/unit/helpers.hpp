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

#include <vector>

#include "linbft/scenario.hpp"
#include "linbft/types.hpp"

namespace linbft::test {

inline ParticipantSet make_set(std::uint32_t n, Epoch epoch = 0) {
    std::vector<Member> members;
    for (std::uint32_t i = 0; i < n; ++i) members.push_back({NodeId{i}, node_public_key(i)});
    return ParticipantSet(epoch, std::move(members), 100);
}

inline ScenarioConfig scenario(std::uint32_t n, std::uint64_t heights, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.name = "unit";
    c.n = n;
    c.num_heights = heights;
    c.seed = seed;
    c.network.delta = 10;
    return c;
}

inline void corrupt(ScenarioConfig& c, std::uint32_t count, BehaviorSet behaviors) {
    c.f_actual = count;
    c.adversary.behaviors = behaviors;
    c.adversary.corrupted.clear();
    for (std::uint32_t i = 0; i < count; ++i) c.adversary.corrupted.push_back(NodeId{i});
}

}  // namespace linbft::test
