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

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "linbft/cosi.hpp"
#include "linbft/crypto.hpp"
#include "linbft/epoch.hpp"
#include "linbft/ledger.hpp"
#include "linbft/messages.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Adversarial behaviors a corrupted replica may exhibit at a height.
enum Behavior : std::uint32_t {
    kSilentLeader = 1u << 0,
    kEquivocate = 1u << 1,
    kDelayMax = 1u << 2,
    kVoteWithhold = 1u << 3,
    kForgeCert = 1u << 4,
    kInvalidTxs = 1u << 5,
    kProposeOutOfTurn = 1u << 6,
};
using BehaviorSet = std::uint32_t;

struct ReplicaConfig {
    LeaderMode leader_mode = LeaderMode::Permutation;
    bool speculative = false;
    SimTime delta = 10;
    SimTime initial_timeout = 80;  // 8 delta
    std::uint32_t max_backoff_doublings = 16;
    std::uint32_t tree_fanout = 2;
    std::size_t max_txs_per_block = kDefaultMaxTxsPerBlock;
    std::size_t buffer_capacity = 4096;
    HashDigest genesis_seed;
};

enum class TimerKind : std::uint8_t { RoundTimeout, NewViewWait, SpecChildWait };

struct TimerRequest {
    SimTime deadline = 0;
    TimerKind kind = TimerKind::RoundTimeout;
    Height height = 0;
    Round round = 0;
    Stage stage = Stage::Prepare;
};

struct Send {
    NodeId to;
    ProtocolMessage msg;
    bool noise = false;  // adversarial traffic, never counted toward completion
};

struct Finalization {
    Height height = 0;
    HashDigest hash;
    Block block;
    Round round = 0;
    SimTime at = 0;
    bool fallback = false;
    bool speculative = false;
};

/// Result of handling one message at the receiver.
enum class HandleStatus : std::uint8_t { Accepted, Late, Stale, Duplicate, Invalid, Buffered };

struct Effects {
    std::vector<Send> sends;
    std::vector<TimerRequest> timers;
    std::vector<SlashEvidence> evidence;
    std::vector<Finalization> finalized;
    std::vector<SetupCost> setup;
    HandleStatus status = HandleStatus::Accepted;
};

/// Timing of one speculative aggregation pass, recorded at the root.
struct SpeculativePass {
    Height height = 0;
    Stage stage = Stage::Prepare;
    SimTime start = 0;
    SimTime end = 0;
    bool success = false;
};

enum class Phase : std::uint8_t { Idle, PreparedSent, Locked, Finalized };

/// One node's consensus state machine. Deterministic and single-threaded:
/// the harness delivers messages and fires the timers the replica requests.
class Replica {
public:
    Replica(NodeId self, ReplicaConfig cfg, const CryptoProvider& crypto, EpochManager epochs,
            std::function<BehaviorSet(Height)> behaviors = {});

    NodeId id() const { return self_; }
    Height height() const { return height_; }
    Round round() const { return round_; }
    Phase phase() const { return phase_; }
    const std::optional<CommitCert>& locked_cc() const { return locked_; }
    const std::vector<Block>& chain() const { return chain_; }
    const EpochManager& epochs() const { return epochs_; }
    const HashDigest& height_seed() const { return height_seed_; }
    std::optional<HashDigest> seed_of(Height h) const;
    SimTime timer_deadline() const { return timer_deadline_; }
    const std::vector<SpeculativePass>& speculative_log() const { return spec_log_; }
    bool active() const { return epochs_.set().contains(self_); }
    bool has_future_messages() const { return !buffer_.empty(); }
    std::size_t buffered() const { return buffer_.size(); }

    NodeId leader(Round r) const;
    const std::optional<AggregationTree>& tree() const { return tree_; }

    /// Scenario-injected request every replica sees in its mempool.
    void submit(const Transaction& tx);

    /// Enters height 1; the leader proposes immediately.
    Effects start(SimTime now);
    Effects handle(NodeId from, const ProtocolMessage& msg, SimTime now);
    Effects on_timer(const TimerRequest& timer, SimTime now);

    /// Modeled state transfer for a node joining at an epoch boundary.
    Effects sync_from(const Replica& donor, SimTime now);

    // Typed entry points, mostly for tests.
    Effects on_propose(SimTime now);
    Effects on_preprepare(NodeId from, const Preprepare& m, SimTime now) { return handle(from, m, now); }
    Effects on_prepare_vote(NodeId from, const PrepareVote& m, SimTime now) { return handle(from, m, now); }
    Effects on_cc_broadcast(NodeId from, const CCBroadcast& m, SimTime now) { return handle(from, m, now); }
    Effects on_commit_vote(NodeId from, const CommitVote& m, SimTime now) { return handle(from, m, now); }
    Effects on_finalize(NodeId from, const FinalizeBroadcast& m, SimTime now) { return handle(from, m, now); }
    Effects on_new_view(NodeId from, const NewView& m, SimTime now) { return handle(from, m, now); }
    Effects on_timeout(SimTime now);

private:
    struct VoteBox {
        std::map<NodeId, Signature> shares;
        std::map<NodeId, Signature> seed_shares;
    };

    struct SpecStage {
        bool started = false;
        bool done = false;
        bool aborted = false;
        bool reported = false;
        SimTime start = 0;
        HashDigest digest;
        std::vector<Signature> own;
        std::vector<Signature> own_seed;
        std::map<NodeId, TreeUp> from_children;
    };

    BehaviorSet behaviors() const { return behaviors_ ? behaviors_(height_) : 0; }
    bool misbehaves(Behavior b) const { return (behaviors() & b) != 0; }
    const ParticipantSet& set() const { return epochs_.set(); }
    const ThresholdKeySet& keys() const { return epochs_.keys(); }
    EvidenceContext evidence_context_at(Height h) const;
    HashDigest tip_hash() const;
    SimTime timeout_for(Round r) const;

    Effects run(SimTime now, const std::function<void()>& body);
    void set_status(HandleStatus s);
    void send(NodeId to, ProtocolMessage msg, bool noise = false);
    void broadcast(const ProtocolMessage& msg, bool noise = false);
    void arm(TimerRequest t);
    void record_evidence(SlashEvidence ev);
    void store_block(const Block& b);

    void route(NodeId from, const ProtocolMessage& msg, bool replaying);
    void dispatch(NodeId from, const ProtocolMessage& msg);
    void buffer(NodeId from, const ProtocolMessage& msg);
    void catch_up(NodeId to, Height from_height);
    void replay_buffer();

    void enter_height(Height h);
    void advance_round(Round r);
    void on_round_entered();
    void propose(Round r, std::optional<Block> block, std::optional<CommitCert> highest);
    Block make_block(Round r, bool valid_txs, std::uint64_t variant) const;
    void propose_view_change(Round r);
    void check_view_change_quorum(Round r);
    void send_new_view(Round r);
    void timeout();

    bool verify_share(NodeId from, const Signature& s, const HashDigest& digest) const;
    bool verify_cert(const CommitCert& cc) const;
    bool verify_quorum_proof(const QuorumProof& proof, const HashDigest& digest) const;
    bool verify_finalize(const FinalizeBroadcast& fin) const;
    bool counted_voter(NodeId id) const;
    bool check_header(NodeId from, const SignedProposal& p);

    void handle_preprepare(NodeId from, const Preprepare& m);
    void handle_prepare_vote(NodeId from, const PrepareVote& m);
    void handle_cc(NodeId from, const CommitCert& cc, bool via_tree);
    void lock_and_commit(const CommitCert& cc, bool via_tree);
    void handle_commit_vote(NodeId from, const CommitVote& m);
    void handle_finalize(NodeId from, const FinalizeBroadcast& fin, bool via_tree);
    void handle_new_view(NodeId from, const NewView& nv);
    void handle_fallback(NodeId from, const FallbackBroadcast& m);
    void handle_sync_request(NodeId from, const SyncRequest& m);
    void handle_decided(NodeId from, const Decided& m);

    void try_form_cc(Round r, const HashDigest& block_hash);
    void try_finalize_as_collector(Round r);
    void apply_finalize(NodeId from, const FinalizeBroadcast& fin, bool via_tree);
    void do_finalize(const Block& block, const FinalizeBroadcast& fin, bool via_tree);

    void spec_begin(Stage stage, const HashDigest& digest, const Signature& share,
                    std::optional<Signature> seed_share);
    bool valid_tree_up(NodeId child, const TreeUp& m, Stage stage) const;
    void spec_check(Stage stage);
    void spec_root_complete(Stage stage, const std::vector<Signature>& shares, const std::vector<Signature>& seeds);
    void spec_failure(Stage stage);
    void spec_abort(Stage stage);
    void handle_tree_up(NodeId from, const TreeUp& m);
    void handle_tree_down(NodeId from, const TreeDown& m);
    void handle_spec_fallback(NodeId from, const SpecFallback& m);
    void handle_spec_abort(NodeId from, const SpecAbort& m);

    NodeId self_;
    ReplicaConfig cfg_;
    const CryptoProvider* crypto_;
    EpochManager epochs_;
    std::function<BehaviorSet(Height)> behaviors_;

    Effects* fx_ = nullptr;
    HandleStatus* status_ = nullptr;
    SimTime now_ = 0;
    bool replaying_ = false;
    bool replay_pending_ = false;

    // Chain
    std::vector<Block> chain_;
    HashDigest tip_;
    std::map<Height, ThresholdKeySet> keys_hist_;
    std::map<Height, ParticipantSet> set_hist_;
    std::map<Height, Decided> decisions_;
    std::map<Height, HashDigest> seeds_;
    std::set<std::pair<NodeId, Height>> catch_up_sent_;
    std::vector<Transaction> mempool_;
    std::vector<SlashEvidence> evidence_pool_;
    std::set<NodeId> accused_;

    // Current height
    Height height_ = 0;
    Round round_ = 0;
    Phase phase_ = Phase::Idle;
    std::optional<CommitCert> locked_;
    SimTime timer_deadline_ = 0;
    HashDigest height_seed_;
    std::map<HashDigest, Block> blocks_;
    std::map<Round, SignedProposal> seen_proposal_;
    std::set<Round> prepared_;
    std::set<Round> committed_;
    std::set<Round> proposed_;
    std::map<std::pair<Round, HashDigest>, VoteBox> prepare_votes_;
    std::map<Round, VoteBox> commit_votes_;
    std::set<Round> cc_formed_;
    std::set<Round> fin_formed_;
    std::map<Round, CommitCert> my_cc_;
    std::map<Round, std::map<NodeId, NewView>> new_views_;
    std::set<Round> nv_wait_armed_;
    std::set<Round> nv_wait_done_;
    std::optional<std::pair<NodeId, FinalizeBroadcast>> pending_fin_;

    // Speculative path (round 1 only)
    bool spec_active_ = false;
    std::optional<AggregationTree> tree_;
    SpecStage spec_[2];
    HashDigest spec_block_hash_;
    SimTime spec_proposal_sent_ = 0;
    std::vector<SpeculativePass> spec_log_;

    std::deque<std::pair<NodeId, ProtocolMessage>> buffer_;
};

std::string to_string(Phase p);

}  // namespace linbft
