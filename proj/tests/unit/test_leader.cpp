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


#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "linbft/leader.hpp"
#include "linbft/metrics.hpp"

namespace linbft {
namespace {

using test::make_set;

HashDigest seed_for(std::uint64_t h) { return sha256(Encoder{}.str("leader-seed").u64(h)); }

TEST(Leader, SingleMemberAlwaysLeads) {
    ParticipantSet s = make_set(1);
    for (Round r = 1; r <= 20; ++r) {
        EXPECT_EQ(leader_for(1, r, seed_for(r), s, LeaderMode::Modular), NodeId{0});
        EXPECT_EQ(leader_for(1, r, seed_for(r), s, LeaderMode::Permutation), NodeId{0});
    }
}

TEST(Leader, PermutationIsABijection) {
    for (std::uint32_t n : {2u, 4u, 7u, 31u, 100u}) {
        auto p = leader_permutation(seed_for(n), n);
        std::set<std::size_t> uniq(p.begin(), p.end());
        EXPECT_EQ(uniq.size(), n);
        EXPECT_EQ(*uniq.rbegin(), n - 1);
    }
}

// Property: rounds k*n+1 .. (k+1)*n visit every member exactly once.
TEST(Leader, PermutationVisitsEveryMemberPerCycle) {
    for (std::uint32_t n : {4u, 7u, 16u}) {
        ParticipantSet s = make_set(n);
        for (std::uint64_t h = 1; h <= 30; ++h) {
            for (Round base = 0; base < 3 * n; base += n) {
                std::map<NodeId, int> seen;
                for (Round r = base + 1; r <= base + n; ++r)
                    ++seen[leader_for(h, r, seed_for(h), s, LeaderMode::Permutation)];
                EXPECT_EQ(seen.size(), n);
                for (const auto& [_, c] : seen) EXPECT_EQ(c, 1);
            }
        }
    }
}

TEST(Leader, ModularIsRoughlyUniform) {
    constexpr int kRounds = 1000;
    ParticipantSet s = make_set(7);
    std::map<NodeId, int> counts;
    for (Round r = 1; r <= kRounds; ++r) ++counts[leader_for(1, r, seed_for(3), s, LeaderMode::Modular)];
    const double p = 1.0 / 7, mean = kRounds * p, sigma = std::sqrt(kRounds * p * (1 - p));
    EXPECT_EQ(counts.size(), 7u);
    for (const auto& [id, c] : counts) EXPECT_LE(std::abs(c - mean), 3 * sigma) << to_string(id);
}

TEST(Leader, DeterministicAndSeedDependent) {
    ParticipantSet s = make_set(16);
    EXPECT_EQ(leader_for(5, 2, seed_for(1), s, LeaderMode::Modular),
              leader_for(5, 2, seed_for(1), s, LeaderMode::Modular));
    int differ = 0;
    for (std::uint64_t h = 1; h <= 20; ++h)
        differ += leader_for(h, 1, seed_for(h), s, LeaderMode::Permutation) !=
                  leader_for(h, 1, seed_for(h + 100), s, LeaderMode::Permutation);
    EXPECT_GT(differ, 10);
}

TEST(Leader, ModeNamesRoundTrip) {
    EXPECT_EQ(leader_mode_from_string(to_string(LeaderMode::Modular)), LeaderMode::Modular);
    EXPECT_EQ(leader_mode_from_string(to_string(LeaderMode::Permutation)), LeaderMode::Permutation);
    EXPECT_THROW(leader_mode_from_string("roundrobin"), ConfigError);
}

TEST(Leader, MaliciousPrefixCountsLeadingCorruptedRounds) {
    ParticipantSet s = make_set(4);
    // Everything corrupted: the scan stops after n rounds.
    auto all = [](NodeId) { return true; };
    auto none = [](NodeId) { return false; };
    EXPECT_EQ(malicious_prefix(1, seed_for(1), s, LeaderMode::Modular, none), 0u);
    EXPECT_EQ(malicious_prefix(1, seed_for(1), s, LeaderMode::Permutation, all), 4u);
    // Under Permutation with f corrupted the prefix never exceeds f.
    ParticipantSet s7 = make_set(7);
    auto two = [](NodeId id) { return id.index < 2; };
    for (std::uint64_t h = 1; h <= 200; ++h)
        EXPECT_LE(malicious_prefix(h, seed_for(h), s7, LeaderMode::Permutation, two), 2u);
}

}  // namespace
}  // namespace linbft
