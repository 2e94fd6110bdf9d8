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

#include "helpers.hpp"
#include "linbft/crypto.hpp"
#include "linbft/epoch.hpp"

namespace linbft {
namespace {

using test::make_set;

Block block_with(Height h, std::vector<Transaction> txs) {
    Block b;
    b.height = h;
    b.round = 1;
    b.txs = std::move(txs);
    return b;
}

Join join(std::uint32_t id, std::uint64_t deposit = 100) { return Join{NodeId{id}, node_public_key(id), deposit}; }

class EpochTest : public ::testing::Test {
protected:
    IdealCrypto crypto{sha256(Encoder{}.str("epoch-master"))};
    EpochSchedule sched{8, 0, {}, {}, {}};
};

TEST_F(EpochTest, JoinIsQueuedUntilBoundary) {
    EpochSchedule s = ingest_finalized_block(sched, block_with(3, {join(9)}), 100);
    ASSERT_EQ(s.pending_joins.size(), 1u);
    EXPECT_EQ(s.pending_joins[0].node, NodeId{9});
    EXPECT_FALSE(s.boundary(3));
    EXPECT_TRUE(s.boundary(8));
}

TEST_F(EpochTest, UnderfundedJoinIsSkipped) {
    EpochSchedule s = ingest_finalized_block(sched, block_with(3, {join(9, 99)}), 100);
    EXPECT_TRUE(s.pending_joins.empty());
}

TEST_F(EpochTest, LastRequestPerNodeWins) {
    EpochSchedule s = ingest_finalized_block(sched, block_with(3, {Leave{NodeId{9}}, join(9)}), 100);
    EXPECT_EQ(s.pending_joins.size(), 1u);
    EXPECT_TRUE(s.pending_leaves.empty());
    s = ingest_finalized_block(s, block_with(4, {Leave{NodeId{9}}}), 100);
    EXPECT_TRUE(s.pending_joins.empty());
    EXPECT_EQ(s.pending_leaves.size(), 1u);
}

TEST_F(EpochTest, EmptyBlockLeavesScheduleUnchanged) {
    EpochSchedule s = ingest_finalized_block(sched, block_with(2, {join(5)}), 100);
    EXPECT_EQ(ingest_finalized_block(s, block_with(3, {}), 100), s);
    EXPECT_EQ(ingest_finalized_block(s, block_with(3, {Transfer{{1}, true}}), 100), s);
}

TEST_F(EpochTest, TransitionGrowsSetAndRaisesThreshold) {
    ParticipantSet set = make_set(10);
    StakeLedger ledger;
    for (const auto& m : set.members()) ledger.deposit(m.id, 100);
    EpochSchedule s = ingest_finalized_block(sched, block_with(5, {join(10), join(11), join(12)}), 100);
    EpochTransition tr = epoch_transition(s, set, ledger, crypto, {});
    EXPECT_EQ(set.threshold_t(), 6u);
    EXPECT_EQ(tr.next_set.n(), 13u);
    EXPECT_EQ(tr.keys.t, 8u);
    EXPECT_EQ(tr.next_set.epoch(), 1u);
    EXPECT_EQ(tr.schedule.current_epoch, 1u);
    EXPECT_TRUE(tr.schedule.pending_joins.empty());
    EXPECT_EQ(tr.ledger.total_deposits(), 1300u);
    EXPECT_EQ(tr.exchange_cost.units, 13u * 12u);
    EXPECT_EQ(tr.dkg_cost.units, dkg_cost_units(13, 1.0));
    EXPECT_TRUE(tr.ledger.conserved());
}

TEST_F(EpochTest, TransitionIssuesFreshKeys) {
    ParticipantSet set = make_set(4);
    EpochManager em(set, crypto, 4, {});
    const ThresholdKeySet before = em.keys();
    for (Height h = 1; h <= 3; ++h) EXPECT_TRUE(em.on_finalized(block_with(h, {})).empty());
    auto costs = em.on_finalized(block_with(4, {}));
    ASSERT_EQ(costs.size(), 1u);
    EXPECT_EQ(costs[0].height, 5u);
    EXPECT_TRUE(costs[0].exchange.has_value());
    EXPECT_NE(em.keys().generation, before.generation);
    EXPECT_NE(em.keys().group_public_key, before.group_public_key);
    // Old shares no longer verify under the new keys.
    const HashDigest d = sha256(Encoder{}.str("m"));
    EXPECT_FALSE(crypto.verify(em.keys(), crypto.sign(before, NodeId{0}, d)));
    EXPECT_EQ(em.set().epoch(), 1u);
}

TEST_F(EpochTest, FullReplacement) {
    ParticipantSet set = make_set(4);
    StakeLedger ledger;
    for (const auto& m : set.members()) ledger.deposit(m.id, 100);
    std::vector<Transaction> txs;
    for (std::uint32_t i = 0; i < 4; ++i) txs.push_back(Leave{NodeId{i}});
    for (std::uint32_t i = 20; i < 24; ++i) txs.push_back(join(i));
    EpochTransition tr = epoch_transition(ingest_finalized_block(sched, block_with(1, txs), 100), set, ledger, crypto, {});
    ASSERT_EQ(tr.next_set.n(), 4u);
    for (std::uint32_t i = 0; i < 4; ++i) EXPECT_FALSE(tr.next_set.contains(NodeId{i}));
    EXPECT_EQ(tr.ledger.withdrawn(), 400u);
    EXPECT_EQ(tr.ledger.total_deposits(), 400u);
    EXPECT_TRUE(tr.ledger.conserved());
}

TEST_F(EpochTest, TooSmallNextSetIsRejected) {
    ParticipantSet set = make_set(4);
    StakeLedger ledger;
    EXPECT_THROW(
        epoch_transition(ingest_finalized_block(sched, block_with(1, {Leave{NodeId{0}}}), 100), set, ledger, crypto, {}),
        EpochError);
}

TEST_F(EpochTest, FailedDkgIsRerunAtNextHeight) {
    EpochManager em(make_set(4), crypto, 100, DkgConfig{1.0, 1.0, 5});
    EXPECT_FALSE(em.keys().valid);
    EXPECT_FALSE(em.genesis_cost().keys_valid);
    auto costs = em.on_finalized(block_with(1, {}));
    ASSERT_EQ(costs.size(), 1u);
    EXPECT_EQ(costs[0].height, 2u);
    EXPECT_FALSE(costs[0].exchange.has_value());
    EXPECT_EQ(em.attempt(), 1u);
    EXPECT_NE(costs[0].generation, em.genesis_cost().generation);
}

TEST_F(EpochTest, ManagersAgreeOnSameChain) {
    EpochManager a(make_set(4), crypto, 3, {}), b(make_set(4), crypto, 3, {});
    for (Height h = 1; h <= 9; ++h) {
        Block blk = block_with(h, h == 2 ? std::vector<Transaction>{join(7)} : std::vector<Transaction>{});
        a.on_finalized(blk);
        b.on_finalized(blk);
        ASSERT_EQ(a.set(), b.set());
        ASSERT_EQ(a.keys(), b.keys());
    }
    EXPECT_TRUE(a.set().contains(NodeId{7}));
}

}  // namespace
}  // namespace linbft
