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

#include <set>

#include "helpers.hpp"
#include "linbft/cosi.hpp"
#include "linbft/crypto.hpp"

namespace linbft {
namespace {

using test::make_set;

const HashDigest kSeed = sha256(Encoder{}.str("tree"));

TEST(Tree, DepthIsFloorLog2ForBinaryHeap) {
    EXPECT_EQ(build_tree(make_set(1), NodeId{0}, 2, kSeed).depth, 0u);
    EXPECT_EQ(build_tree(make_set(2), NodeId{0}, 2, kSeed).depth, 1u);
    EXPECT_EQ(build_tree(make_set(7), NodeId{0}, 2, kSeed).depth, 2u);
    EXPECT_EQ(build_tree(make_set(8), NodeId{0}, 2, kSeed).depth, 3u);
    EXPECT_EQ(build_tree(make_set(64), NodeId{3}, 2, kSeed).depth, 6u);
    EXPECT_EQ(build_tree(make_set(64), NodeId{3}, 4, kSeed).depth, 3u);
}

TEST(Tree, SpansEveryMemberOnce) {
    for (std::uint32_t n : {1u, 5u, 16u, 100u}) {
        AggregationTree t = build_tree(make_set(n), NodeId{n - 1}, 2, kSeed);
        std::set<NodeId> seen(t.order.begin(), t.order.end());
        EXPECT_EQ(seen.size(), n);
        EXPECT_EQ(t.order.front(), NodeId{n - 1});
        EXPECT_EQ(t.subtree_size(t.root), n);
        EXPECT_FALSE(t.parent_of(t.root).has_value());
        for (const auto& [child, parent] : t.parent) {
            const auto& kids = t.children_of(parent);
            EXPECT_NE(std::find(kids.begin(), kids.end(), child), kids.end());
            EXPECT_LE(kids.size(), 2u);
        }
    }
}

TEST(Tree, RejectsBadInput) {
    EXPECT_THROW(build_tree(make_set(4), NodeId{9}, 2, kSeed), ConfigError);
    EXPECT_THROW(build_tree(make_set(4), NodeId{0}, 1, kSeed), ConfigError);
}

class PassTest : public ::testing::Test {
protected:
    IdealCrypto crypto{sha256(Encoder{}.str("cosi"))};
    HashDigest digest = sha256(Encoder{}.str("prepare"));
};

TEST_F(PassTest, AllHonestPassSucceedsWithinTwoDepthDelta) {
    for (std::uint32_t n : {4u, 16u, 64u}) {
        ParticipantSet set = make_set(n);
        ThresholdKeySet keys = crypto.make_keyset(set, 1, true);
        AggregationTree tree = build_tree(set, NodeId{0}, 2, kSeed);
        PassEnvironment env;
        env.delta = 10;
        env.hop_delay = [](NodeId, NodeId) { return SimTime{10}; };
        PassResult r = speculative_round(tree, digest, crypto, keys, env);
        ASSERT_TRUE(r.success()) << "n=" << n;
        const auto& ms = std::get<SpeculativeSuccess>(r.outcome).signature;
        EXPECT_EQ(ms.signers.size(), n);
        EXPECT_TRUE(crypto.verify_multi(ms, digest, keys));
        EXPECT_EQ(r.elapsed, 2 * tree.depth * 10);
        EXPECT_LE(r.elapsed, 2 * ceil_log2(n) * 10);
        EXPECT_EQ(r.down_links, n - 1);
        EXPECT_EQ(r.up_links, n - 1);
        EXPECT_EQ(r.notices, 0u);
    }
}

TEST_F(PassTest, SilentLeafForcesFallback) {
    ParticipantSet set = make_set(7);
    ThresholdKeySet keys = crypto.make_keyset(set, 1, true);
    AggregationTree tree = build_tree(set, NodeId{0}, 2, kSeed);
    const NodeId leaf = tree.order.back();
    PassEnvironment env;
    env.hop_delay = [](NodeId, NodeId) { return SimTime{3}; };
    env.participates = [leaf](NodeId id) { return id != leaf; };
    PassResult r = speculative_round(tree, digest, crypto, keys, env);
    ASSERT_FALSE(r.success());
    const auto& fb = std::get<SpeculativeFallback>(r.outcome);
    EXPECT_EQ(fb.reporter, *tree.parent_of(leaf));
    EXPECT_GT(r.notices, 0u);
}

TEST_F(PassTest, SingleNodeTreeSucceedsImmediately) {
    ParticipantSet set = make_set(1);
    ThresholdKeySet keys = crypto.make_keyset(set, 1, true);
    PassEnvironment env;
    env.hop_delay = [](NodeId, NodeId) { return SimTime{1}; };
    PassResult r = speculative_round(build_tree(set, NodeId{0}, 2, kSeed), digest, crypto, keys, env);
    EXPECT_TRUE(r.success());
    EXPECT_EQ(r.elapsed, 0u);
    EXPECT_EQ(r.transmissions(), 0u);
}

TEST(Tree, ChildWaitCoversSubtreeRoundTrip) {
    AggregationTree t = build_tree(make_set(15), NodeId{0}, 2, kSeed);
    EXPECT_EQ(child_wait(t, t.root, 10), 70u);  // height 3
    EXPECT_EQ(child_wait(t, t.order.back(), 10), 10u);
}

}  // namespace
}  // namespace linbft
