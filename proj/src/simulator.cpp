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


#include "linbft/simulator.hpp"

#include <algorithm>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

#include "linbft/crypto.hpp"
#include "linbft/leader.hpp"
#include "linbft/network.hpp"
#include "linbft/rng.hpp"

namespace linbft {

CorruptionSchedule::CorruptionSchedule(const AdversarySpec& spec, const ParticipantSet& genesis, std::uint32_t count)
    : spec_(spec), genesis_(genesis), count_(count) {}

const std::vector<NodeId>& CorruptionSchedule::corrupted_at(Height h) const {
    const Height key = spec_.rotate_per_height ? h : 0;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<NodeId> ids;
    if (!spec_.rotate_per_height) {
        ids = spec_.corrupted;
    } else {
        Encoder enc;
        enc.u64(spec_.rotation_seed).u64(h);
        const auto perm = leader_permutation(tagged_hash("linbft/corruption/v1", enc), genesis_.n());
        for (std::uint32_t i = 0; i < count_ && i < perm.size(); ++i) ids.push_back(genesis_.at(perm[i]));
    }
    std::sort(ids.begin(), ids.end());
    if (cache_.size() > 4096) cache_.clear();
    return cache_.emplace(key, std::move(ids)).first->second;
}

bool CorruptionSchedule::corrupted(NodeId id, Height h) const {
    const auto& ids = corrupted_at(h);
    return std::binary_search(ids.begin(), ids.end(), id);
}

BehaviorSet CorruptionSchedule::behaviors(NodeId id, Height h) const {
    if (!corrupted(id, h)) return 0;
    auto it = spec_.per_node.find(id);
    return spec_.behaviors | (it == spec_.per_node.end() ? 0 : it->second);
}

double RunReport::amortized_setup_per_block() const {
    return num_heights == 0 ? 0.0 : static_cast<double>(setup_units) / static_cast<double>(num_heights);
}

double RunReport::amortized_volume_per_block() const {
    return num_heights == 0 ? 0.0
                            : static_cast<double>(total_volume + setup_units) / static_cast<double>(num_heights);
}

void assert_safe(const RunReport& report) {
    if (report.safety_violations > 0)
        throw SafetyViolation(std::to_string(report.safety_violations) + " conflicting finalizations");
    if (report.participant_set_mismatches > 0)
        throw SafetyViolation(std::to_string(report.participant_set_mismatches) + " participant-set forks");
}

namespace {

struct EventKey {
    SimTime time;
    std::uint8_t rank;  // rushing: corrupted senders act after honest ones in a tick
    std::uint8_t kind;  // 0 deliver, 1 timer
    std::uint32_t sender;
    std::uint32_t receiver;
    std::uint64_t seq;

    auto tuple() const { return std::tie(time, rank, kind, sender, receiver, seq); }
    bool operator>(const EventKey& o) const { return tuple() > o.tuple(); }
};

struct DeliverPayload {
    NodeId from;
    NodeId to;
    ProtocolMessage msg;
    std::uint64_t units = 0;
    bool counted = false;
    std::optional<std::size_t> record;  // index into RunOptions::transmissions
};

struct TimerPayload {
    NodeId node;
    TimerRequest timer;
};

using Payload = std::variant<DeliverPayload, TimerPayload>;

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const RunOptions& opts);
    RunReport run();

private:
    Replica& replica(NodeId id) { return *replicas_.at(id); }
    void push(EventKey key, Payload p);
    void process(NodeId node, Effects fx, SimTime now);
    void on_send(NodeId from, const Send& s, SimTime now);
    void discount(const DeliverPayload& d);
    void on_finalized(NodeId node, const Finalization& fin, SimTime now);
    void sync_joiners(NodeId donor, SimTime now);
    void inject_requests(Height reached);
    bool done() const;
    HeightRecord* record(Height h) { return h >= 1 && h <= cfg_.num_heights ? &report_.heights[h - 1] : nullptr; }
    void finish();

    const ScenarioConfig& cfg_;
    RunOptions opts_;
    ParticipantSet genesis_;
    IdealCrypto crypto_;
    CorruptionSchedule sched_;
    Network net_;
    std::map<NodeId, std::unique_ptr<Replica>> replicas_;

    std::priority_queue<EventKey, std::vector<EventKey>, std::greater<EventKey>> queue_;
    std::map<std::uint64_t, Payload> payloads_;
    std::uint64_t seq_ = 0;

    RunReport report_;
    std::map<Height, HashDigest> decided_;
    std::map<Height, ParticipantSet> set_at_;
    std::map<Height, SimTime> started_;
    std::set<std::tuple<Height, Round, HashDigest>> bodies_;
    std::set<std::pair<NodeId, std::string>> evidence_seen_;
    std::map<std::uint64_t, SetupCost> setup_;
    std::vector<bool> injected_;
};

Simulation::Simulation(const ScenarioConfig& cfg, const RunOptions& opts)
    : cfg_(cfg),
      opts_(opts),
      genesis_([&] {
          std::vector<Member> members;
          for (std::uint32_t i = 0; i < cfg.n; ++i) members.push_back(Member{NodeId{i}, node_public_key(i)});
          return ParticipantSet(0, std::move(members), cfg.stake);
      }()),
      crypto_([&] {
          Encoder enc;
          enc.u64(cfg.seed);
          return tagged_hash("linbft/master/v1", enc);
      }()),
      sched_(cfg.adversary, genesis_, cfg.f_actual),
      net_(cfg.network, derive_seed(cfg.seed, "network")) {
    ReplicaConfig rc;
    rc.leader_mode = cfg.leader_mode;
    rc.speculative = cfg.speculative;
    rc.delta = cfg.network.delta;
    rc.initial_timeout = cfg.effective_initial_timeout();
    rc.tree_fanout = cfg.tree_fanout;
    rc.max_txs_per_block = cfg.max_txs_per_block;
    rc.buffer_capacity = cfg.buffer_capacity;
    rc.genesis_seed = cfg.effective_genesis_seed();
    const DkgConfig dkg{cfg.dkg_failure_prob, cfg.dkg_cost_constant, derive_seed(cfg.seed, "dkg")};

    std::set<NodeId> ids;
    for (const auto& m : genesis_.members()) ids.insert(m.id);
    for (const auto& r : cfg.requests)
        if (const auto* j = std::get_if<Join>(&r.tx)) ids.insert(j->node);
    const EpochManager epochs(genesis_, crypto_, cfg.effective_epoch_length(), dkg);
    for (NodeId id : ids) {
        const CorruptionSchedule* sched = &sched_;
        replicas_.emplace(id, std::make_unique<Replica>(id, rc, crypto_, epochs,
                                                        [sched, id](Height h) { return sched->behaviors(id, h); }));
    }

    report_.name = cfg.name;
    report_.n = cfg.n;
    report_.f = cfg.f();
    report_.f_actual = cfg.f_actual;
    report_.num_heights = cfg.num_heights;
    report_.seed = cfg.seed;
    report_.leader_mode = cfg.leader_mode;
    report_.speculative = cfg.speculative;
    report_.gst = cfg.network.gst;
    report_.delta = cfg.network.delta;
    report_.heights.resize(cfg.num_heights);
    for (Height h = 1; h <= cfg.num_heights; ++h) report_.heights[h - 1].height = h;
    const SimTime gst = cfg.network.gst == kNever ? 0 : cfg.network.gst;
    report_.watchdog = 100 * (gst + static_cast<SimTime>(cfg.n) * cfg.network.delta * cfg.num_heights);
    injected_.assign(cfg.requests.size(), false);

    const SetupCost& g = epochs.genesis_cost();
    setup_.emplace(g.generation, g);
    set_at_.emplace(1, genesis_);
}

void Simulation::push(EventKey key, Payload p) {
    key.seq = seq_++;
    payloads_.emplace(key.seq, std::move(p));
    queue_.push(key);
}

void Simulation::on_send(NodeId from, const Send& s, SimTime now) {
    Replica& sender = replica(from);
    const Height h = height_of(s.msg);
    const SizeClass cls = size_class(s.msg);
    const std::uint64_t units = class_units(cls, sender.epochs().set().n());
    const bool after_gst = net_.stable_at(now);
    std::optional<std::size_t> index;
    if (opts_.transmissions) {
        index = opts_.transmissions->size();
        opts_.transmissions->push_back(
            TransmissionRecord{h, round_of(s.msg), kind_name(s.msg), cls, units, !s.noise, now, after_gst});
    }
    if (HeightRecord* rec = record(h)) {
        if (s.noise) {
            rec->uncounted_units += units;
        } else {
            rec->volume += units;
            (cls == SizeClass::Constant ? rec->constant_units : rec->linear_units) += units;
            rec->by_kind[kind_name(s.msg)] += units;
            if (const auto* pp = std::get_if<Preprepare>(&s.msg)) {
                if (bodies_.emplace(h, pp->round, hash_block(pp->block)).second)
                    rec->block_body_volume += class_units(SizeClass::Linear, sender.epochs().set().n());
            }
        }
    }
    auto it = replicas_.find(s.to);
    if (it == replicas_.end()) return;
    const bool delay_max = (sched_.behaviors(from, sender.height()) & kDelayMax) != 0;
    auto at = net_.schedule(now, from, s.to, s.msg, delay_max, it->second->timer_deadline());
    if (!at) return;
    const bool corrupt_sender = sched_.corrupted(from, sender.height());
    if (after_gst && !corrupt_sender && !sched_.corrupted(s.to, h) && *at - now > cfg_.network.delta)
        ++report_.post_gst_bound_violations;
    const std::uint8_t rank = cfg_.adversary.rushing && corrupt_sender ? 1 : 0;
    push(EventKey{*at, rank, 0, from.index, s.to.index, 0}, DeliverPayload{from, s.to, s.msg, units, !s.noise, index});
}

void Simulation::discount(const DeliverPayload& d) {
    if (d.record) (*opts_.transmissions)[*d.record].counted_toward_completion = false;
    HeightRecord* rec = record(height_of(d.msg));
    if (!rec) return;
    rec->volume -= d.units;
    (size_class(d.msg) == SizeClass::Constant ? rec->constant_units : rec->linear_units) -= d.units;
    rec->by_kind[kind_name(d.msg)] -= d.units;
    rec->uncounted_units += d.units;
}

void Simulation::on_finalized(NodeId node, const Finalization& fin, SimTime now) {
    const Height h = fin.height;
    const bool honest = !sched_.corrupted(node, h);
    if (honest) {
        auto [it, fresh] = decided_.emplace(h, fin.hash);
        if (!fresh && it->second != fin.hash) ++report_.safety_violations;
        const ParticipantSet& next = replica(node).epochs().set();
        auto [sit, sfresh] = set_at_.emplace(h + 1, next);
        if (!sfresh && sit->second != next) ++report_.participant_set_mismatches;
    }
    started_.emplace(h + 1, now);
    if (HeightRecord* rec = record(h)) {
        if (rec->rounds_used == 0) {
            rec->block_hash = fin.hash;
            rec->rounds_used = fin.round;
            rec->view_changes = fin.round - 1;
            rec->first_finalized_at = now;
            rec->fallback = fin.fallback;
            for (const auto& tx : fin.block.txs)
                if (const auto* s = std::get_if<SlashReport>(&tx); s && s->evidence)
                    rec->slashes.push_back(s->evidence->kind_name() + ":" + to_string(s->evidence->offender()));
        }
        rec->last_finalized_at = std::max(rec->last_finalized_at, now);
    }
    inject_requests(h + 1);
}

void Simulation::inject_requests(Height reached) {
    for (std::size_t i = 0; i < cfg_.requests.size(); ++i) {
        if (injected_[i] || cfg_.requests[i].at_height > reached) continue;
        injected_[i] = true;
        for (auto& [id, r] : replicas_) r->submit(cfg_.requests[i].tx);
    }
}

void Simulation::sync_joiners(NodeId donor, SimTime now) {
    const Replica& d = replica(donor);
    for (auto& [id, r] : replicas_) {
        if (id == donor || r->active() || !d.epochs().set().contains(id) || r->height() >= d.height()) continue;
        Effects fx = r->sync_from(d, now);
        process(id, std::move(fx), now);
    }
}

void Simulation::process(NodeId node, Effects fx, SimTime now) {
    for (const auto& s : fx.sends) on_send(node, s, now);
    for (const auto& t : fx.timers)
        push(EventKey{std::max(t.deadline, now), 0, 1, node.index, node.index, 0}, TimerPayload{node, t});
    for (const auto& ev : fx.evidence) {
        if (!evidence_seen_.emplace(ev.offender(), ev.kind_name()).second) continue;
        report_.evidence.push_back(EvidenceRecord{replica(node).height(), node, ev.offender(), ev.kind_name()});
    }
    for (const auto& c : fx.setup) setup_.emplace(c.generation, c);
    for (const auto& f : fx.finalized) on_finalized(node, f, now);
    if (!fx.finalized.empty() && !sched_.corrupted(node, fx.finalized.back().height)) sync_joiners(node, now);
}

bool Simulation::done() const {
    for (const auto& [id, r] : replicas_)
        if (r->active() && r->chain().size() < cfg_.num_heights) return false;
    return true;
}

RunReport Simulation::run() {
    inject_requests(1);
    started_.emplace(1, 0);
    for (auto& [id, r] : replicas_) {
        if (!genesis_.contains(id)) continue;
        Effects fx = r->start(0);
        process(id, std::move(fx), 0);
    }
    SimTime now = 0;
    bool finished = done();
    while (!finished && !queue_.empty()) {
        const EventKey key = queue_.top();
        queue_.pop();
        if (key.time > report_.watchdog) {
            report_.watchdog_fired = true;
            break;
        }
        now = key.time;
        ++report_.events;
        auto pit = payloads_.find(key.seq);
        Payload p = std::move(pit->second);
        payloads_.erase(pit);
        bool any_final = false;
        if (auto* d = std::get_if<DeliverPayload>(&p)) {
            if (opts_.trace) {
                std::ostringstream os;
                os << now << " deliver " << kind_name(d->msg) << " h=" << height_of(d->msg)
                   << " r=" << round_of(d->msg) << " " << to_string(d->from) << "->" << to_string(d->to);
                opts_.trace->push_back(os.str());
            }
            Effects fx = replica(d->to).handle(d->from, d->msg, now);
            any_final = !fx.finalized.empty();
            if (d->counted && (fx.status == HandleStatus::Stale || fx.status == HandleStatus::Duplicate ||
                               fx.status == HandleStatus::Invalid))
                discount(*d);
            process(d->to, std::move(fx), now);
        } else {
            auto& t = std::get<TimerPayload>(p);
            if (opts_.trace) {
                std::ostringstream os;
                os << now << " timer " << static_cast<int>(t.timer.kind) << " h=" << t.timer.height
                   << " r=" << t.timer.round << " " << to_string(t.node);
                opts_.trace->push_back(os.str());
            }
            Effects fx = replica(t.node).on_timer(t.timer, now);
            any_final = !fx.finalized.empty();
            process(t.node, std::move(fx), now);
        }
        if (any_final) finished = done();
    }
    report_.finished_at = now;
    report_.all_finalized = finished;
    finish();
    return report_;
}

void Simulation::finish() {
    const Replica* ref = nullptr;
    for (const auto& [id, r] : replicas_) {
        if (!r->active()) continue;
        if (!ref || r->chain().size() > ref->chain().size()) ref = r.get();
    }
    for (auto& [gen, cost] : setup_) {
        if (cost.height > cfg_.num_heights) continue;
        report_.setup.push_back(cost);
        report_.setup_units += cost.dkg.units + (cost.exchange ? cost.exchange->units : 0);
    }
    std::sort(report_.setup.begin(), report_.setup.end(), [](const SetupCost& a, const SetupCost& b) {
        return std::tie(a.height, a.generation) < std::tie(b.height, b.generation);
    });
    for (const auto& [id, r] : replicas_)
        for (const auto& p : r->speculative_log())
            if (p.height <= cfg_.num_heights) report_.passes.push_back(p);
    std::sort(report_.passes.begin(), report_.passes.end(), [](const SpeculativePass& a, const SpeculativePass& b) {
        return std::tie(a.height, a.stage, a.start) < std::tie(b.height, b.stage, b.start);
    });
    for (auto& rec : report_.heights) {
        report_.total_volume += rec.volume;
        if (auto it = started_.find(rec.height); it != started_.end()) {
            rec.started_at = it->second;
            rec.started_after_gst = net_.stable_at(it->second);
        }
        if (!cfg_.speculative) continue;
        bool any = false, ok = true;
        std::string failed;
        for (const auto& p : report_.passes) {
            if (p.height != rec.height) continue;
            any = true;
            if (!p.success && failed.empty()) failed = p.stage == Stage::Prepare ? "prepare" : "commit";
            ok = ok && p.success;
        }
        rec.speculative = !any ? "off" : ok ? "success" : "fallback-" + failed;
    }
    if (!ref) return;
    report_.slashed = ref->epochs().ledger().slashed();
    report_.stake_conserved = ref->epochs().ledger().conserved();
    for (auto& rec : report_.heights) {
        auto seed = ref->seed_of(rec.height);
        const ParticipantSet* set = nullptr;
        auto it = set_at_.upper_bound(rec.height);
        if (it != set_at_.begin()) set = &std::prev(it)->second;
        if (!seed || !set) continue;
        std::uint32_t prefix = 0;
        for (Round r = 1; r <= set->n(); ++r) {
            if (!sched_.corrupted(leader_for(rec.height, r, *seed, *set, cfg_.leader_mode), rec.height)) break;
            ++prefix;
        }
        rec.malicious_prefix = prefix;
        report_.max_malicious_prefix = std::max(report_.max_malicious_prefix, prefix);
    }
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    validate(cfg);
    Simulation sim(cfg, opts);
    return sim.run();
}

}  // namespace linbft
