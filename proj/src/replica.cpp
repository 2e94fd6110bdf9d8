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


#include "linbft/replica.hpp"

#include <algorithm>

#include "linbft/leader.hpp"

namespace linbft {

namespace {

std::size_t stage_index(Stage s) { return s == Stage::Prepare ? 0 : 1; }

std::vector<Signature> values(const std::map<NodeId, Signature>& m) {
    std::vector<Signature> out;
    out.reserve(m.size());
    for (const auto& [id, s] : m) out.push_back(s);
    return out;
}

template <typename K, typename V>
const V* latest_at(const std::map<K, V>& hist, K key) {
    auto it = hist.upper_bound(key);
    if (it == hist.begin()) return nullptr;
    return &std::prev(it)->second;
}

}  // namespace

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "idle";
        case Phase::PreparedSent: return "prepared";
        case Phase::Locked: return "locked";
        case Phase::Finalized: return "finalized";
    }
    return "?";
}

Replica::Replica(NodeId self, ReplicaConfig cfg, const CryptoProvider& crypto, EpochManager epochs,
                 std::function<BehaviorSet(Height)> behaviors)
    : self_(self), cfg_(cfg), crypto_(&crypto), epochs_(std::move(epochs)), behaviors_(std::move(behaviors)) {
    seeds_[1] = cfg_.genesis_seed;
}

std::optional<HashDigest> Replica::seed_of(Height h) const {
    auto it = seeds_.find(h);
    if (it == seeds_.end()) return std::nullopt;
    return it->second;
}

NodeId Replica::leader(Round r) const { return leader_for(height_, r, height_seed_, set(), cfg_.leader_mode); }

EvidenceContext Replica::evidence_context_at(Height h) const {
    EvidenceContext ctx;
    ctx.crypto = crypto_;
    ctx.keys = latest_at(keys_hist_, h);
    ctx.set = latest_at(set_hist_, h);
    if (!ctx.keys) ctx.keys = &keys();
    if (!ctx.set) ctx.set = &set();
    ctx.seed_of = [this](Height x) { return seed_of(x); };
    return ctx;
}

SimTime Replica::timeout_for(Round r) const {
    const std::uint32_t doublings = std::min<std::uint32_t>(r - 1, cfg_.max_backoff_doublings);
    SimTime t = cfg_.initial_timeout << doublings;
    if (r == 1 && spec_active_ && tree_) t += (8 * static_cast<SimTime>(tree_->depth) + 4) * cfg_.delta;
    return t;
}

void Replica::submit(const Transaction& tx) { mempool_.push_back(tx); }

// ---------------------------------------------------------------------------
// Plumbing

Effects Replica::run(SimTime now, const std::function<void()>& body) {
    Effects fx;
    Effects* saved_fx = fx_;
    HandleStatus* saved_status = status_;
    fx_ = &fx;
    status_ = &fx.status;
    now_ = now;
    body();
    fx_ = saved_fx;
    status_ = saved_status;
    return fx;
}

void Replica::set_status(HandleStatus s) { *status_ = s; }

void Replica::send(NodeId to, ProtocolMessage msg, bool noise) {
    if (to == self_) {
        HandleStatus scratch{};
        HandleStatus* saved = status_;
        status_ = &scratch;
        route(self_, msg, false);
        status_ = saved;
        return;
    }
    fx_->sends.push_back(Send{to, std::move(msg), noise});
}

void Replica::broadcast(const ProtocolMessage& msg, bool noise) {
    const auto ids = set().ids();
    bool to_self = false;
    for (NodeId id : ids) {
        if (id == self_) to_self = true;
        else fx_->sends.push_back(Send{id, msg, noise});
    }
    if (to_self && !noise) send(self_, msg);
}

void Replica::arm(TimerRequest t) {
    if (t.kind == TimerKind::RoundTimeout) timer_deadline_ = t.deadline;
    fx_->timers.push_back(t);
}

void Replica::record_evidence(SlashEvidence ev) {
    const NodeId offender = ev.offender();
    if (accused_.count(offender) || epochs_.ledger().is_slashed(offender)) return;
    if (!verify_evidence(ev, evidence_context_at(height_))) return;
    accused_.insert(offender);
    evidence_pool_.push_back(ev);
    fx_->evidence.push_back(std::move(ev));
}

bool Replica::counted_voter(NodeId id) const {
    return set().contains(id) && !epochs_.ledger().is_slashed(id);
}

void Replica::store_block(const Block& b) {
    const HashDigest h = hash_block(b);
    blocks_.emplace(h, b);
    if (pending_fin_ && pending_fin_->second.cc.block_hash == h) {
        auto fin = pending_fin_->second;
        pending_fin_.reset();
        do_finalize(b, fin, false);
    }
}

// ---------------------------------------------------------------------------
// Entry points

Effects Replica::start(SimTime now) {
    return run(now, [&] { enter_height(1); });
}

Effects Replica::handle(NodeId from, const ProtocolMessage& msg, SimTime now) {
    return run(now, [&] { route(from, msg, false); });
}

Effects Replica::on_timer(const TimerRequest& timer, SimTime now) {
    return run(now, [&] {
        if (timer.height != height_ || !active()) {
            set_status(HandleStatus::Stale);
            return;
        }
        switch (timer.kind) {
            case TimerKind::RoundTimeout:
                if (timer.round == round_) timeout();
                else set_status(HandleStatus::Stale);
                break;
            case TimerKind::NewViewWait:
                if (timer.round == round_ && !proposed_.count(round_) &&
                    new_views_[round_].size() >= set().quorum()) {
                    nv_wait_done_.insert(round_);
                    propose_view_change(round_);
                }
                break;
            case TimerKind::SpecChildWait:
                if (timer.round == 1 && round_ == 1) spec_failure(timer.stage);
                break;
        }
    });
}

Effects Replica::on_propose(SimTime now) {
    return run(now, [&] {
        if (active() && leader(round_) == self_ && !proposed_.count(round_)) propose(round_, std::nullopt, std::nullopt);
    });
}

Effects Replica::on_timeout(SimTime now) {
    return run(now, [&] {
        if (active()) timeout();
    });
}

Effects Replica::sync_from(const Replica& donor, SimTime now) {
    return run(now, [&] {
        chain_ = donor.chain_;
        decisions_ = donor.decisions_;
        seeds_ = donor.seeds_;
        epochs_ = donor.epochs_;
        keys_hist_ = donor.keys_hist_;
        set_hist_ = donor.set_hist_;
        mempool_ = donor.mempool_;
        evidence_pool_ = donor.evidence_pool_;
        accused_ = donor.accused_;
        tip_ = donor.tip_;
        buffer_.clear();
        enter_height(donor.height_);
    });
}

// ---------------------------------------------------------------------------
// Routing

void Replica::route(NodeId from, const ProtocolMessage& msg, bool replaying) {
    if (const auto* m = std::get_if<SyncRequest>(&msg)) {
        handle_sync_request(from, *m);
        return;
    }
    if (!active()) {
        set_status(HandleStatus::Stale);
        return;
    }
    const Height h = height_of(msg);
    if (h > height_) {
        buffer(from, msg);
        return;
    }
    if (h < height_) {
        if (replaying) return;
        auto it = decisions_.find(h);
        const Round decided = it == decisions_.end() ? 0 : it->second.fin.cc.round;
        const Round r = round_of(msg);
        if (r > decided && !std::holds_alternative<Decided>(msg)) catch_up(from, h);
        set_status(r == decided ? HandleStatus::Late : HandleStatus::Stale);
        return;
    }
    dispatch(from, msg);
}

void Replica::buffer(NodeId from, const ProtocolMessage& msg) {
    if (cfg_.buffer_capacity == 0) {
        set_status(HandleStatus::Stale);
        return;
    }
    if (buffer_.size() >= cfg_.buffer_capacity) buffer_.pop_front();
    buffer_.emplace_back(from, msg);
    set_status(HandleStatus::Buffered);
}

void Replica::replay_buffer() {
    if (replaying_) {
        replay_pending_ = true;
        return;
    }
    replaying_ = true;
    HandleStatus scratch{};
    HandleStatus* saved = status_;
    status_ = &scratch;
    do {
        replay_pending_ = false;
        auto items = std::move(buffer_);
        buffer_.clear();
        for (auto& [from, msg] : items) route(from, msg, true);
    } while (replay_pending_);
    status_ = saved;
    replaying_ = false;
}

void Replica::catch_up(NodeId to, Height from_height) {
    if (to == self_) return;
    for (auto it = decisions_.lower_bound(from_height); it != decisions_.end(); ++it) {
        if (!catch_up_sent_.insert({to, it->first}).second) continue;
        send(to, it->second);
    }
}

void Replica::dispatch(NodeId from, const ProtocolMessage& msg) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Preprepare>) handle_preprepare(from, m);
            else if constexpr (std::is_same_v<T, PrepareVote>) handle_prepare_vote(from, m);
            else if constexpr (std::is_same_v<T, CCBroadcast>) handle_cc(from, m.cc, false);
            else if constexpr (std::is_same_v<T, CommitVote>) handle_commit_vote(from, m);
            else if constexpr (std::is_same_v<T, FinalizeBroadcast>) handle_finalize(from, m, false);
            else if constexpr (std::is_same_v<T, NewView>) handle_new_view(from, m);
            else if constexpr (std::is_same_v<T, FallbackBroadcast>) handle_fallback(from, m);
            else if constexpr (std::is_same_v<T, TreeUp>) handle_tree_up(from, m);
            else if constexpr (std::is_same_v<T, TreeDown>) handle_tree_down(from, m);
            else if constexpr (std::is_same_v<T, SpecFallback>) handle_spec_fallback(from, m);
            else if constexpr (std::is_same_v<T, SpecAbort>) handle_spec_abort(from, m);
            else if constexpr (std::is_same_v<T, Decided>) handle_decided(from, m);
        },
        msg);
}

// ---------------------------------------------------------------------------
// Height and round progression

void Replica::enter_height(Height h) {
    height_ = h;
    round_ = 1;
    phase_ = Phase::Idle;
    locked_.reset();
    height_seed_ = seeds_.count(h) ? seeds_.at(h) : cfg_.genesis_seed;
    blocks_.clear();
    seen_proposal_.clear();
    prepared_.clear();
    committed_.clear();
    proposed_.clear();
    prepare_votes_.clear();
    commit_votes_.clear();
    cc_formed_.clear();
    fin_formed_.clear();
    my_cc_.clear();
    new_views_.clear();
    nv_wait_armed_.clear();
    nv_wait_done_.clear();
    pending_fin_.reset();
    spec_[0] = SpecStage{};
    spec_[1] = SpecStage{};
    tree_.reset();
    spec_block_hash_ = HashDigest{};

    if (keys_hist_.empty() || keys_hist_.rbegin()->second != keys()) keys_hist_[h] = keys();
    if (set_hist_.empty() || set_hist_.rbegin()->second != set()) set_hist_[h] = set();

    if (!active()) {
        spec_active_ = false;
        return;
    }
    spec_active_ = cfg_.speculative && keys().valid;
    if (spec_active_) tree_ = build_tree(set(), leader(1), cfg_.tree_fanout, height_seed_);
    arm(TimerRequest{now_ + timeout_for(1), TimerKind::RoundTimeout, h, 1, Stage::Prepare});
    on_round_entered();
    replay_buffer();
}

void Replica::advance_round(Round r) {
    if (r <= round_) return;
    round_ = r;
    phase_ = locked_ ? Phase::Locked : Phase::Idle;
    if (spec_active_) {
        spec_active_ = false;
        spec_[0].aborted = spec_[1].aborted = true;
    }
    arm(TimerRequest{now_ + timeout_for(r), TimerKind::RoundTimeout, height_, r, Stage::Prepare});
    on_round_entered();
    replay_buffer();
}

void Replica::on_round_entered() {
    const Round r = round_;
    if (leader(r) == self_) {
        if (r == 1) propose(1, std::nullopt, std::nullopt);
        else check_view_change_quorum(r);
    } else if (misbehaves(kProposeOutOfTurn)) {
        Block b = make_block(r, true, 7);
        const HashDigest bh = hash_block(b);
        Preprepare pp{height_, r, b, std::nullopt,
                      crypto_->sign(keys(), self_, proposal_digest(height_, r, bh))};
        broadcast(pp, true);
    }
}

void Replica::timeout() {
    if (!buffer_.empty()) {
        for (const auto& [from, msg] : buffer_) {
            if (height_of(msg) > height_ && from != self_) {
                send(from, SyncRequest{height_});
                break;
            }
        }
    }
    const Round next = round_ + 1;
    advance_round(next);
    if (round_ == next) send_new_view(next);
}

HashDigest Replica::tip_hash() const { return tip_; }

Block Replica::make_block(Round r, bool valid_txs, std::uint64_t variant) const {
    Block b;
    b.height = height_;
    b.parent_hash = tip_hash();
    b.proposer = self_;
    b.round = r;
    const std::size_t cap = std::max<std::size_t>(cfg_.max_txs_per_block, 1);
    for (const auto& ev : evidence_pool_) {
        if (b.txs.size() + 1 >= cap) break;
        if (epochs_.ledger().is_slashed(ev.offender())) continue;
        b.txs.push_back(SlashReport{std::make_shared<const SlashEvidence>(ev)});
    }
    for (const auto& tx : mempool_) {
        if (b.txs.size() + 1 >= cap) break;
        b.txs.push_back(tx);
    }
    Encoder enc;
    enc.u64(height_).u32(r).u32(self_.index).u64(variant);
    b.txs.push_back(Transfer{enc.buffer(), valid_txs});
    return b;
}

void Replica::propose(Round r, std::optional<Block> block, std::optional<CommitCert> highest) {
    if (!proposed_.insert(r).second) return;
    if (misbehaves(kSilentLeader)) return;
    if (misbehaves(kForgeCert)) {
        CommitCert forged{height_, r, tagged_hash("linbft/forged/v1", Encoder{}.u64(height_).u32(r)),
                          ThresholdSignature{}};
        std::get<ThresholdSignature>(forged.proof).generation = keys().generation;
        broadcast(CCBroadcast{forged}, true);
    }
    if (!block) block = make_block(r, !misbehaves(kInvalidTxs), 0);
    auto make_pp = [&](const Block& b) {
        const HashDigest bh = hash_block(b);
        return Preprepare{height_, r, b, highest, crypto_->sign(keys(), self_, proposal_digest(height_, r, bh))};
    };
    if (r == 1 && spec_active_) spec_proposal_sent_ = now_;
    if (misbehaves(kEquivocate)) {
        Block other = make_block(r, true, 1);
        const Preprepare a = make_pp(*block);
        const Preprepare b = make_pp(other);
        const auto ids = set().ids();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == self_) continue;
            fx_->sends.push_back(Send{ids[i], i % 2 == 0 ? ProtocolMessage{a} : ProtocolMessage{b}, false});
        }
        send(self_, a);
        return;
    }
    broadcast(make_pp(*block));
}

// ---------------------------------------------------------------------------
// Verification

bool Replica::verify_share(NodeId from, const Signature& s, const HashDigest& digest) const {
    return s.signer == from && s.digest == digest && counted_voter(from) && crypto_->verify(keys(), s);
}

bool Replica::verify_quorum_proof(const QuorumProof& proof, const HashDigest& digest) const {
    if (const auto* ts = std::get_if<ThresholdSignature>(&proof)) return crypto_->verify_threshold(*ts, digest, keys());
    const auto& bundle = std::get<ShareBundle>(proof);
    std::set<NodeId> signers;
    for (const auto& s : bundle.shares) {
        if (s.digest != digest || !set().contains(s.signer) || !crypto_->verify(keys(), s)) return false;
        signers.insert(s.signer);
    }
    return signers.size() >= set().quorum();
}

bool Replica::verify_cert(const CommitCert& cc) const {
    return cc.height == height_ && cc.round >= 1 &&
           verify_quorum_proof(cc.proof, prepare_digest(cc.height, cc.round, cc.block_hash));
}

bool Replica::verify_finalize(const FinalizeBroadcast& fin) const {
    if (!verify_cert(fin.cc) || !verify_quorum_proof(fin.ts_cc, commit_digest(fin.cc))) return false;
    if (std::holds_alternative<ThresholdSignature>(fin.ts_cc)) {
        return fin.seed_ts &&
               crypto_->verify_threshold(*fin.seed_ts, seed_digest(fin.cc.height, fin.cc.block_hash), keys());
    }
    return true;
}

bool Replica::check_header(NodeId from, const SignedProposal& p) {
    if (p.height != height_ || !verify_proposal(p, evidence_context_at(height_))) return false;
    if (from != p.sig.signer && from != self_) return false;
    if (leader(p.round) != p.sig.signer) {
        record_evidence(SlashEvidence{NonLeaderProposalEvidence{p, height_seed_, cfg_.leader_mode}});
        return false;
    }
    auto [it, fresh] = seen_proposal_.emplace(p.round, p);
    if (!fresh && it->second.block_hash != p.block_hash) {
        record_evidence(SlashEvidence{EquivocationEvidence{it->second, p}});
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Collector path

void Replica::handle_preprepare(NodeId from, const Preprepare& m) {
    const SignedProposal header = m.header();
    if (m.block.height != height_ || m.block.parent_hash != tip_hash() || header.sig.signer != from) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (!check_header(from, header)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    const HashDigest bh = header.block_hash;
    if (m.highest_cc && (!verify_cert(*m.highest_cc) || m.highest_cc->block_hash != bh ||
                         m.highest_cc->round >= m.round)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    store_block(m.block);
    if (height_ != m.height) return;
    if (m.round < round_) {
        set_status(HandleStatus::Stale);
        return;
    }
    if (m.round > round_) advance_round(m.round);
    if (!prepared_.insert(m.round).second) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    std::uint32_t bad = 0;
    if (!block_txs_valid(m.block, &bad)) {
        record_evidence(SlashEvidence{InvalidBlockEvidence{header, m.block, bad}});
        set_status(HandleStatus::Invalid);
        return;
    }
    if (locked_ && locked_->block_hash != bh) {
        if (!(m.highest_cc && m.highest_cc->round > locked_->round)) return;
    }
    if (m.highest_cc && (!locked_ || m.highest_cc->round > locked_->round)) locked_ = m.highest_cc;
    phase_ = Phase::PreparedSent;
    if (misbehaves(kVoteWithhold)) return;
    const Signature share = crypto_->sign(keys(), self_, prepare_digest(height_, m.round, bh));
    if (m.round == 1 && spec_active_) {
        spec_block_hash_ = bh;
        spec_begin(Stage::Prepare, share.digest, share, std::nullopt);
        return;
    }
    send(leader(m.round), PrepareVote{height_, m.round, bh, share});
}

void Replica::handle_prepare_vote(NodeId from, const PrepareVote& m) {
    if (m.round > round_) {
        buffer(from, m);
        return;
    }
    if (leader(m.round) != self_ || !verify_share(from, m.share, prepare_digest(height_, m.round, m.block_hash))) {
        set_status(HandleStatus::Invalid);
        return;
    }
    auto& box = prepare_votes_[{m.round, m.block_hash}];
    if (!box.shares.emplace(from, m.share).second) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    if (cc_formed_.count(m.round)) {
        set_status(HandleStatus::Late);
        return;
    }
    if (m.round < round_) {
        set_status(HandleStatus::Stale);
        return;
    }
    try_form_cc(m.round, m.block_hash);
}

void Replica::try_form_cc(Round r, const HashDigest& block_hash) {
    if (cc_formed_.count(r)) return;
    auto& box = prepare_votes_[{r, block_hash}];
    if (box.shares.size() < set().quorum()) return;
    const auto shares = values(box.shares);
    cc_formed_.insert(r);
    if (!keys().valid) {
        std::vector<Signature> q(shares.begin(), shares.begin() + set().quorum());
        my_cc_[r] = CommitCert{height_, r, block_hash, ShareBundle{q}};
        broadcast(FallbackBroadcast{height_, r, Stage::Prepare, block_hash, q, std::nullopt});
        return;
    }
    const ThresholdSignature ts = crypto_->combine_threshold(shares, keys());
    const CommitCert cc{height_, r, block_hash, ts};
    my_cc_[r] = cc;
    broadcast(CCBroadcast{cc});
}

void Replica::handle_cc(NodeId from, const CommitCert& cc, bool via_tree) {
    (void)from;
    if (!verify_cert(cc)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (cc.round < round_) {
        set_status(HandleStatus::Stale);
        return;
    }
    if (cc.round > round_) advance_round(cc.round);
    if (cc.round != round_) return;
    if (committed_.count(cc.round)) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    lock_and_commit(cc, via_tree);
}

void Replica::lock_and_commit(const CommitCert& cc, bool via_tree) {
    if (!locked_ || cc.round >= locked_->round) locked_ = cc;
    phase_ = Phase::Locked;
    committed_.insert(cc.round);
    if (misbehaves(kVoteWithhold)) return;
    const Signature share = crypto_->sign(keys(), self_, commit_digest(cc));
    const Signature seed_share = crypto_->sign(keys(), self_, seed_digest(height_, cc.block_hash));
    if (via_tree && spec_active_) {
        spec_begin(Stage::Commit, share.digest, share, seed_share);
        return;
    }
    send(leader(cc.round), CommitVote{height_, cc.round, cert_hash(cc), share, seed_share});
}

void Replica::handle_commit_vote(NodeId from, const CommitVote& m) {
    if (m.round > round_) {
        buffer(from, m);
        return;
    }
    auto cc = my_cc_.find(m.round);
    if (leader(m.round) != self_ || cc == my_cc_.end() || cert_hash(cc->second) != m.cc_hash ||
        !verify_share(from, m.share, commit_digest(cc->second)) ||
        !verify_share(from, m.seed_share, seed_digest(height_, cc->second.block_hash))) {
        set_status(HandleStatus::Invalid);
        return;
    }
    auto& box = commit_votes_[m.round];
    if (!box.shares.emplace(from, m.share).second) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    box.seed_shares.emplace(from, m.seed_share);
    if (fin_formed_.count(m.round)) {
        set_status(HandleStatus::Late);
        return;
    }
    try_finalize_as_collector(m.round);
}

void Replica::try_finalize_as_collector(Round r) {
    if (fin_formed_.count(r)) return;
    auto& box = commit_votes_[r];
    if (box.shares.size() < set().quorum() || box.seed_shares.size() < set().quorum()) return;
    const CommitCert cc = my_cc_.at(r);
    fin_formed_.insert(r);
    const auto shares = values(box.shares);
    if (!keys().valid) {
        std::vector<Signature> q(shares.begin(), shares.begin() + set().quorum());
        broadcast(FallbackBroadcast{height_, r, Stage::Commit, cc.block_hash, q, cc});
        return;
    }
    FinalizeBroadcast fin{cc, crypto_->combine_threshold(shares, keys()),
                          crypto_->combine_threshold(values(box.seed_shares), keys())};
    broadcast(fin);
}

void Replica::handle_fallback(NodeId from, const FallbackBroadcast& m) {
    if (from != leader(m.round)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (m.stage == Stage::Prepare) {
        handle_cc(from, CommitCert{height_, m.round, m.block_hash, ShareBundle{m.shares}}, false);
        return;
    }
    if (!m.cc || m.cc->block_hash != m.block_hash) {
        set_status(HandleStatus::Invalid);
        return;
    }
    handle_finalize(from, FinalizeBroadcast{*m.cc, ShareBundle{m.shares}, std::nullopt}, false);
}

void Replica::handle_finalize(NodeId from, const FinalizeBroadcast& fin, bool via_tree) {
    if (!verify_finalize(fin)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    apply_finalize(from, fin, via_tree);
}

void Replica::apply_finalize(NodeId from, const FinalizeBroadcast& fin, bool via_tree) {
    auto it = blocks_.find(fin.cc.block_hash);
    if (it == blocks_.end()) {
        pending_fin_ = {from, fin};
        if (from != self_) send(from, SyncRequest{height_});
        set_status(HandleStatus::Buffered);
        return;
    }
    const Block block = it->second;
    std::uint32_t bad = 0;
    if (!block_txs_valid(block, &bad)) {
        if (auto h = seen_proposal_.find(block.round); h != seen_proposal_.end() && h->second.block_hash == fin.cc.block_hash)
            record_evidence(SlashEvidence{InvalidBlockEvidence{h->second, block, bad}});
        set_status(HandleStatus::Invalid);
        return;
    }
    do_finalize(block, fin, via_tree);
}

void Replica::do_finalize(const Block& block, const FinalizeBroadcast& fin, bool via_tree) {
    const Height h = height_;
    phase_ = Phase::Finalized;
    chain_.push_back(block);
    tip_ = fin.cc.block_hash;
    decisions_[h] = Decided{fin, block};
    const bool fallback = std::holds_alternative<ShareBundle>(fin.ts_cc);
    fx_->finalized.push_back(Finalization{h, fin.cc.block_hash, block, fin.cc.round, now_, fallback, via_tree});
    seeds_[h + 1] = fin.seed_ts ? fin.seed_ts->proof : fallback_height_seed(h, fin.cc.block_hash);

    for (const auto& tx : block.txs) {
        if (const auto* s = std::get_if<SlashReport>(&tx); s && s->evidence) {
            const SlashEvidence& ev = *s->evidence;
            Height at = h;
            std::visit([&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, EquivocationEvidence>) at = k.first.height;
                else at = k.proposal.height;
            }, ev.kind);
            epochs_.apply_slash(ev, evidence_context_at(at), h);
        }
    }
    std::erase_if(mempool_, [&](const Transaction& tx) {
        return std::find(block.txs.begin(), block.txs.end(), tx) != block.txs.end();
    });
    std::erase_if(evidence_pool_, [&](const SlashEvidence& ev) { return epochs_.ledger().is_slashed(ev.offender()); });

    for (auto& cost : epochs_.on_finalized(block)) fx_->setup.push_back(std::move(cost));
    enter_height(h + 1);
}

// ---------------------------------------------------------------------------
// View change

void Replica::send_new_view(Round r) {
    if (misbehaves(kVoteWithhold)) return;
    NewView nv;
    nv.height = height_;
    nv.new_round = r;
    nv.locked_cc = locked_;
    nv.share = crypto_->sign(keys(), self_, new_view_digest(height_, r));
    if (auto it = seen_proposal_.find(r - 1); it != seen_proposal_.end()) nv.observed = it->second;
    if (locked_) {
        if (auto b = blocks_.find(locked_->block_hash); b != blocks_.end()) nv.locked_block = b->second;
    }
    send(leader(r), nv);
}

void Replica::handle_new_view(NodeId from, const NewView& nv) {
    if (!verify_share(from, nv.share, new_view_digest(height_, nv.new_round)) ||
        (nv.locked_cc && !verify_cert(*nv.locked_cc))) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (nv.observed) {
        const SignedProposal& p = *nv.observed;
        if (p.height == height_ && verify_proposal(p, evidence_context_at(height_))) {
            if (leader(p.round) != p.sig.signer) {
                record_evidence(SlashEvidence{NonLeaderProposalEvidence{p, height_seed_, cfg_.leader_mode}});
            } else {
                auto [it, fresh] = seen_proposal_.emplace(p.round, p);
                if (!fresh && it->second.block_hash != p.block_hash)
                    record_evidence(SlashEvidence{EquivocationEvidence{it->second, p}});
            }
        }
    }
    if (nv.locked_cc && nv.locked_block && hash_block(*nv.locked_block) == nv.locked_cc->block_hash &&
        nv.locked_block->height == height_ && nv.locked_block->parent_hash == tip_hash())
        store_block(*nv.locked_block);
    if (nv.height != height_) return;
    if (nv.new_round < round_) {
        set_status(HandleStatus::Stale);
        return;
    }
    const Round r = nv.new_round;
    if (leader(r) != self_) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (!new_views_[r].emplace(from, nv).second) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    if (proposed_.count(r)) {
        set_status(HandleStatus::Late);
        return;
    }
    if (r > round_) {
        if (new_views_[r].size() < set().f() + 1) {
            set_status(HandleStatus::Buffered);
            return;
        }
        advance_round(r);
        if (round_ != r) return;
        send_new_view(r);
        return;
    }
    check_view_change_quorum(r);
}

void Replica::check_view_change_quorum(Round r) {
    if (proposed_.count(r) || r != round_) return;
    const std::size_t have = new_views_[r].size();
    if (have < set().quorum()) return;
    if (have >= set().n() || nv_wait_done_.count(r)) {
        propose_view_change(r);
        return;
    }
    if (nv_wait_armed_.insert(r).second)
        arm(TimerRequest{now_ + 2 * cfg_.delta, TimerKind::NewViewWait, height_, r, Stage::Prepare});
}

void Replica::propose_view_change(Round r) {
    std::optional<CommitCert> highest = locked_;
    for (const auto& [id, nv] : new_views_[r]) {
        if (nv.locked_cc && (!highest || nv.locked_cc->round > highest->round)) highest = nv.locked_cc;
    }
    if (!highest) {
        propose(r, std::nullopt, std::nullopt);
        return;
    }
    auto it = blocks_.find(highest->block_hash);
    if (it == blocks_.end()) return;
    propose(r, it->second, highest);
}

// ---------------------------------------------------------------------------
// Catch-up

void Replica::handle_sync_request(NodeId from, const SyncRequest& m) {
    if (from == self_) return;
    if (!decisions_.count(m.height)) {
        set_status(HandleStatus::Stale);
        return;
    }
    catch_up(from, m.height);
}

void Replica::handle_decided(NodeId from, const Decided& m) {
    (void)from;
    if (m.fin.cc.height != height_ || hash_block(m.block) != m.fin.cc.block_hash ||
        m.block.parent_hash != tip_hash() || !verify_finalize(m.fin)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    pending_fin_.reset();
    blocks_.emplace(m.fin.cc.block_hash, m.block);
    do_finalize(m.block, m.fin, false);
}

// ---------------------------------------------------------------------------
// Speculative path: round 1 aggregation over the tree, falling back to the
// collector path on any missing or invalid contribution.

void Replica::spec_begin(Stage stage, const HashDigest& digest, const Signature& share,
                         std::optional<Signature> seed_share) {
    SpecStage& st = spec_[stage_index(stage)];
    if (st.started) return;
    st.started = true;
    st.start = now_;
    st.digest = digest;
    st.own = {share};
    st.own_seed.clear();
    if (seed_share) st.own_seed.push_back(*seed_share);
    if (!tree_->children_of(self_).empty())
        arm(TimerRequest{now_ + child_wait(*tree_, self_, cfg_.delta), TimerKind::SpecChildWait, height_, 1, stage});
    spec_check(stage);
}

bool Replica::valid_tree_up(NodeId child, const TreeUp& m, Stage stage) const {
    const SpecStage& st = spec_[stage_index(stage)];
    if (m.digest != st.digest || m.shares.size() != tree_->subtree_size(child)) return false;
    std::set<NodeId> subtree;
    std::vector<NodeId> frontier{child};
    while (!frontier.empty()) {
        NodeId x = frontier.back();
        frontier.pop_back();
        subtree.insert(x);
        for (NodeId c : tree_->children_of(x)) frontier.push_back(c);
    }
    auto ok = [&](const std::vector<Signature>& v, const HashDigest& d) {
        std::set<NodeId> seen;
        for (const auto& s : v) {
            if (s.digest != d || !subtree.count(s.signer) || !crypto_->verify(keys(), s)) return false;
            seen.insert(s.signer);
        }
        return seen.size() == subtree.size();
    };
    if (!ok(m.shares, st.digest)) return false;
    if (stage == Stage::Commit) {
        const auto cc = locked_;
        if (!cc || m.seed_shares.size() != subtree.size() || !ok(m.seed_shares, seed_digest(height_, cc->block_hash)))
            return false;
    }
    return true;
}

void Replica::spec_check(Stage stage) {
    SpecStage& st = spec_[stage_index(stage)];
    if (!spec_active_ || !st.started || st.done || st.aborted) return;
    std::vector<Signature> shares = st.own;
    std::vector<Signature> seeds = st.own_seed;
    for (NodeId c : tree_->children_of(self_)) {
        auto it = st.from_children.find(c);
        if (it == st.from_children.end() || !valid_tree_up(c, it->second, stage)) return;
        shares.insert(shares.end(), it->second.shares.begin(), it->second.shares.end());
        seeds.insert(seeds.end(), it->second.seed_shares.begin(), it->second.seed_shares.end());
    }
    st.done = true;
    if (self_ == tree_->root) {
        spec_root_complete(stage, shares, seeds);
        return;
    }
    send(*tree_->parent_of(self_), TreeUp{height_, 1, stage, st.digest, shares, seeds});
}

void Replica::spec_root_complete(Stage stage, const std::vector<Signature>& shares,
                                 const std::vector<Signature>& seeds) {
    const MultiSignature ms = crypto_->combine_multi(shares, keys());
    if (ms.signers.size() != set().n() || !crypto_->verify_multi(ms, spec_[stage_index(stage)].digest, keys())) {
        spec_abort(stage);
        return;
    }
    if (stage == Stage::Prepare) {
        spec_log_.push_back(SpeculativePass{height_, stage, spec_proposal_sent_, now_, true});
        const CommitCert cc{height_, 1, spec_block_hash_, crypto_->combine_threshold(shares, keys())};
        cc_formed_.insert(1);
        my_cc_[1] = cc;
        for (NodeId c : tree_->children_of(self_)) send(c, TreeDown{height_, 1, ms, cc, std::nullopt});
        committed_.insert(1);
        locked_ = cc;
        phase_ = Phase::Locked;
        lock_and_commit(cc, true);
        return;
    }
    spec_log_.push_back(SpeculativePass{height_, stage, spec_[0].done ? spec_log_.back().end : now_, now_, true});
    const CommitCert cc = my_cc_.at(1);
    fin_formed_.insert(1);
    FinalizeBroadcast fin{cc, crypto_->combine_threshold(shares, keys()), crypto_->combine_threshold(seeds, keys())};
    for (NodeId c : tree_->children_of(self_)) send(c, TreeDown{height_, 1, ms, std::nullopt, fin});
    apply_finalize(self_, fin, true);
}

void Replica::spec_failure(Stage stage) {
    SpecStage& st = spec_[stage_index(stage)];
    if (!spec_active_ || st.done || st.aborted || st.reported) return;
    st.reported = true;
    st.done = true;
    if (self_ == tree_->root) {
        spec_abort(stage);
        return;
    }
    send(tree_->root, SpecFallback{height_, 1, stage, self_});
}

void Replica::spec_abort(Stage stage) {
    const std::size_t idx = stage_index(stage);
    if (spec_[idx].aborted) return;
    spec_[0].aborted = spec_[1].aborted = true;
    spec_active_ = false;
    const SimTime start = stage == Stage::Prepare || spec_log_.empty() ? spec_proposal_sent_ : spec_log_.back().end;
    spec_log_.push_back(SpeculativePass{height_, stage, start, now_, false});

    // Shares already aggregated through the tree count as direct votes.
    SpecStage& st = spec_[idx];
    std::vector<Signature> shares = st.own;
    std::vector<Signature> seeds = st.own_seed;
    for (const auto& [child, up] : st.from_children) {
        if (!valid_tree_up(child, up, stage)) continue;
        shares.insert(shares.end(), up.shares.begin(), up.shares.end());
        seeds.insert(seeds.end(), up.seed_shares.begin(), up.seed_shares.end());
    }
    std::optional<CommitCert> cc;
    if (stage == Stage::Commit) cc = my_cc_.at(1);
    broadcast(SpecAbort{height_, 1, stage, cc}, false);
    if (stage == Stage::Prepare) {
        if (!prepared_.count(1)) return;
        auto& box = prepare_votes_[{1, spec_block_hash_}];
        for (const auto& s : shares)
            if (counted_voter(s.signer)) box.shares.emplace(s.signer, s);
        try_form_cc(1, spec_block_hash_);
    } else {
        auto& box = commit_votes_[1];
        for (const auto& s : shares)
            if (counted_voter(s.signer)) box.shares.emplace(s.signer, s);
        for (const auto& s : seeds)
            if (counted_voter(s.signer)) box.seed_shares.emplace(s.signer, s);
        try_finalize_as_collector(1);
    }
}

void Replica::handle_tree_up(NodeId from, const TreeUp& m) {
    if (m.round != 1 || round_ != 1 || !tree_ || tree_->parent_of(from) != std::optional<NodeId>(self_)) {
        set_status(round_ > 1 ? HandleStatus::Stale : HandleStatus::Invalid);
        return;
    }
    SpecStage& st = spec_[stage_index(m.stage)];
    if (!st.from_children.emplace(from, m).second) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    if (st.done && st.aborted && self_ == tree_->root) {
        // Direct path already running: fold the late aggregate in.
        if (m.stage == Stage::Prepare) {
            auto& box = prepare_votes_[{1, spec_block_hash_}];
            for (const auto& s : m.shares)
                if (s.digest == st.digest && counted_voter(s.signer) && crypto_->verify(keys(), s))
                    box.shares.emplace(s.signer, s);
            try_form_cc(1, spec_block_hash_);
        }
        set_status(HandleStatus::Late);
        return;
    }
    spec_check(m.stage);
}

void Replica::handle_tree_down(NodeId from, const TreeDown& m) {
    if (!tree_ || tree_->parent_of(self_) != std::optional<NodeId>(from) || m.all_signed.signers.size() != set().n() ||
        !crypto_->verify_multi(m.all_signed, m.all_signed.digest, keys())) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (m.finalize) {
        if (!verify_finalize(*m.finalize) || m.all_signed.digest != commit_digest(m.finalize->cc)) {
            set_status(HandleStatus::Invalid);
            return;
        }
        for (NodeId c : tree_->children_of(self_)) send(c, m);
        apply_finalize(from, *m.finalize, true);
        return;
    }
    if (!m.cc || !verify_cert(*m.cc) || m.all_signed.digest != prepare_digest(height_, 1, m.cc->block_hash)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (round_ != 1) {
        set_status(HandleStatus::Stale);
        return;
    }
    for (NodeId c : tree_->children_of(self_)) send(c, m);
    if (committed_.count(1)) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    lock_and_commit(*m.cc, true);
}

void Replica::handle_spec_fallback(NodeId from, const SpecFallback& m) {
    if (!tree_ || self_ != tree_->root || m.round != 1 || m.reporter != from) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (round_ != 1 || spec_[stage_index(m.stage)].aborted) {
        set_status(HandleStatus::Duplicate);
        return;
    }
    spec_abort(m.stage);
}

void Replica::handle_spec_abort(NodeId from, const SpecAbort& m) {
    if (!tree_ || from != tree_->root || m.round != 1) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (round_ != 1) {
        set_status(HandleStatus::Stale);
        return;
    }
    spec_[0].aborted = spec_[1].aborted = true;
    spec_active_ = false;
    if (m.stage == Stage::Prepare) {
        if (prepared_.count(1) && !spec_[0].own.empty())
            send(from, PrepareVote{height_, 1, spec_block_hash_, spec_[0].own.front()});
        return;
    }
    if (!m.cc || !verify_cert(*m.cc)) {
        set_status(HandleStatus::Invalid);
        return;
    }
    if (committed_.count(1)) {
        if (!spec_[1].own.empty() && !spec_[1].own_seed.empty())
            send(from, CommitVote{height_, 1, cert_hash(*m.cc), spec_[1].own.front(), spec_[1].own_seed.front()});
        return;
    }
    handle_cc(from, *m.cc, false);
}

}  // namespace linbft
