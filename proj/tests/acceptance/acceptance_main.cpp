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


// Acceptance gate. One PASS/FAIL line per criterion; tolerances are fixed
// here. A criterion listed as known-unattainable still prints FAIL but does
// not fail the process, so every other criterion remains a hard gate.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "linbft/hash.hpp"
#include "linbft/leader.hpp"
#include "linbft/metrics.hpp"
#include "linbft/report.hpp"
#include "linbft/scenario.hpp"
#include "linbft/simulator.hpp"

using namespace linbft;

namespace {

constexpr SimTime kDelta = 10;
constexpr double kSlopeLo = 0.95, kSlopeHi = 1.05;
constexpr double kBaselineSlopeLo = 1.9, kBaselineSlopeHi = 2.1;
constexpr double kSigmas = 3.0;
constexpr std::uint64_t kLeaderHeights = 100000;
constexpr int kSafetySeedsPerCell = 42;  // 6 categories x 4 sizes x 42 = 1008 runs

struct Outcome {
    std::string name;
    bool pass = false;
    std::string detail;
    std::string known_reason;  // non-empty: analysed as unattainable
};

std::vector<Outcome> g_outcomes;

void record(std::string name, bool pass, std::string detail, std::string known = {}) {
    std::printf("%s %s: %s%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                (!pass && !known.empty()) ? (" [known unattainable: " + known + "]").c_str() : "");
    std::fflush(stdout);
    g_outcomes.push_back({std::move(name), pass, std::move(detail), std::move(known)});
}

ScenarioConfig base(const std::string& name, std::uint32_t n, std::uint64_t heights, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = name;
    c.n = n;
    c.num_heights = heights;
    c.seed = seed;
    c.network.delta = kDelta;
    return c;
}

void corrupt_first(ScenarioConfig& c) {
    c.adversary.corrupted.clear();
    for (std::uint32_t i = 0; i < c.f_actual; ++i) c.adversary.corrupted.push_back(NodeId{i});
}

enum class Category { FaultFree, Silent, Equivocating, DelayedGst, DkgFailure, Rotating };
const char* category_name(Category c) {
    switch (c) {
        case Category::FaultFree: return "fault-free";
        case Category::Silent: return "silent-leader";
        case Category::Equivocating: return "equivocating-leader";
        case Category::DelayedGst: return "delayed-gst";
        case Category::DkgFailure: return "dkg-failure";
        case Category::Rotating: return "rotating-corruption";
    }
    return "?";
}

ScenarioConfig safety_case(Category cat, std::uint32_t n, std::uint64_t seed) {
    const std::uint64_t heights = n >= 64 ? 3 : (n >= 16 ? 4 : 6);
    ScenarioConfig c = base(std::string(category_name(cat)) + "-n" + std::to_string(n), n, heights, seed);
    c.leader_mode = (seed % 2 == 0) ? LeaderMode::Permutation : LeaderMode::Modular;
    c.f_actual = c.f();
    switch (cat) {
        case Category::FaultFree:
            c.f_actual = 0;
            break;
        case Category::Silent:
            c.adversary.behaviors = kSilentLeader;
            break;
        case Category::Equivocating:
            c.adversary.behaviors = kEquivocate | kProposeOutOfTurn;
            break;
        case Category::DelayedGst:
            c.network.gst = 30 * kDelta;
            c.network.drop_before_gst = (seed % 3 == 0);
            c.adversary.behaviors = kDelayMax | kVoteWithhold;
            break;
        case Category::DkgFailure:
            c.dkg_failure_prob = 0.5;
            c.adversary.behaviors = kForgeCert | kSilentLeader;
            break;
        case Category::Rotating: {
            static const BehaviorSet mixes[] = {kSilentLeader, kVoteWithhold | kForgeCert, kDelayMax | kSilentLeader,
                                                kForgeCert};
            c.adversary.behaviors = mixes[seed % 4];
            c.adversary.rotate_per_height = true;
            c.adversary.rotation_seed = seed * 7919 + n;
            break;
        }
    }
    corrupt_first(c);
    return c;
}

void safety_and_liveness() {
    std::uint64_t runs = 0, unsafe = 0, mismatched = 0, dead = 0, over_rounds = 0, checked_heights = 0;
    std::string first_unsafe, first_dead, first_over;
    const std::uint32_t sizes[] = {4, 7, 16, 64};
    for (int ci = 0; ci < 6; ++ci) {
        for (std::uint32_t n : sizes) {
            for (int s = 0; s < kSafetySeedsPerCell; ++s) {
                ScenarioConfig c = safety_case(static_cast<Category>(ci), n, 1000 + s);
                RunReport r = run_scenario(c);
                ++runs;
                if (r.safety_violations) {
                    ++unsafe;
                    if (first_unsafe.empty()) first_unsafe = c.name + " seed " + std::to_string(c.seed);
                }
                if (r.participant_set_mismatches) ++mismatched;
                if (!r.live()) {
                    ++dead;
                    if (first_dead.empty()) first_dead = c.name + " seed " + std::to_string(c.seed);
                }
                if (c.leader_mode == LeaderMode::Permutation) {
                    for (const auto& h : r.heights) {
                        if (!h.started_after_gst) continue;
                        ++checked_heights;
                        if (h.rounds_used > c.f() + 1) {
                            ++over_rounds;
                            if (first_over.empty())
                                first_over = c.name + " seed " + std::to_string(c.seed) + " height " +
                                             std::to_string(h.height) + " rounds " + std::to_string(h.rounds_used);
                        }
                    }
                }
            }
        }
    }
    record("safety", unsafe == 0 && mismatched == 0,
           std::to_string(runs) + " scenarios, " + std::to_string(unsafe) + " with conflicting finalizations, " +
               std::to_string(mismatched) + " with diverging participant sets" +
               (first_unsafe.empty() ? "" : ", first: " + first_unsafe));
    record("liveness", dead == 0 && over_rounds == 0,
           std::to_string(runs - dead) + "/" + std::to_string(runs) + " finalized every height; " +
               std::to_string(checked_heights) + " post-GST Permutation heights, " + std::to_string(over_rounds) +
               " above f+1 rounds" + (first_dead.empty() ? "" : ", first stall: " + first_dead) +
               (first_over.empty() ? "" : ", first excess: " + first_over));
}

void linear_complexity() {
    std::vector<RunReport> runs;
    std::uint64_t mismatches = 0;
    std::string where;
    for (std::uint32_t n : {4u, 16u, 64u, 256u}) {
        ScenarioConfig c = base("linear-n" + std::to_string(n), n, n >= 256 ? 3 : 5, 7);
        RunReport r = run_scenario(c);
        for (const auto& h : r.heights)
            if (h.volume != ordinary_case_volume(n)) {
                ++mismatches;
                if (where.empty())
                    where = " (n=" + std::to_string(n) + " height " + std::to_string(h.height) + ": " +
                            std::to_string(h.volume) + ")";
            }
        if (!r.live()) ++mismatches;
        runs.push_back(std::move(r));
    }
    ComplexityReport cr = complexity_report(runs);
    char buf[256];
    std::snprintf(buf, sizeof buf, "slope %.4f (band [%.2f, %.2f]), PBFT baseline slope %.4f (band [%.1f, %.1f])",
                  cr.slope_fit, kSlopeLo, kSlopeHi, cr.baseline_slope, kBaselineSlopeLo, kBaselineSlopeHi);
    const bool exact = mismatches == 0;
    const bool slope_ok = cr.slope_fit >= kSlopeLo && cr.slope_fit <= kSlopeHi;
    const bool baseline_ok = cr.baseline_slope >= kBaselineSlopeLo && cr.baseline_slope <= kBaselineSlopeHi;
    std::string detail = std::string(exact ? "every height equals 5(n-1)" : "per-height volume differs from 5(n-1)") +
                         where + "; " + buf;
    // An exact 5(n-1) series over n in {4,16,64,256} has log-log slope
    // 1.0649, so the exact-count and slope bands cannot hold together.
    record("linear-complexity", exact && slope_ok && baseline_ok, detail,
           exact && baseline_ok && !slope_ok ? "5(n-1) over {4,16,64,256} fits slope 1.0649 > 1.05" : "");
}

void view_change_cost() {
    std::uint64_t vc_heights = 0, over = 0, total_vc = 0;
    std::string first;
    for (std::uint32_t n : {4u, 7u, 16u, 64u}) {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            ScenarioConfig c = base("view-change-n" + std::to_string(n), n, n >= 64 ? 4 : 8, seed);
            c.f_actual = c.f();
            c.adversary.behaviors = kSilentLeader;
            corrupt_first(c);
            RunReport r = run_scenario(c);
            if (!r.live()) ++over;
            for (const auto& h : r.heights) {
                if (h.view_changes == 0) continue;
                ++vc_heights;
                total_vc += h.view_changes;
                const std::uint64_t extra =
                    h.volume > ordinary_case_volume(n) ? h.volume - ordinary_case_volume(n) : 0;
                if (extra > 4ull * n * h.view_changes) {
                    ++over;
                    if (first.empty())
                        first = ", first: n=" + std::to_string(n) + " height " + std::to_string(h.height) + " extra " +
                                std::to_string(extra) + " for " + std::to_string(h.view_changes) + " view changes";
                }
            }
        }
    }
    record("view-change-cost", over == 0 && vc_heights > 0,
           std::to_string(vc_heights) + " heights with " + std::to_string(total_vc) +
               " view changes, extra volume within 4n per view change in all but " + std::to_string(over) + first);
}

void leader_statistics() {
    // 9 members, 3 corrupted: each round's leader is corrupted with probability 1/3.
    std::vector<Member> members;
    for (std::uint32_t i = 0; i < 9; ++i) members.push_back({NodeId{i}, node_public_key(i)});
    ParticipantSet set(0, members, 100, 2);
    auto corrupted = [](NodeId id) { return id.index < 3; };
    std::map<std::uint32_t, std::uint64_t> at_least;
    HashDigest seed = tagged_hash("linbft/acceptance/leader", Encoder{}.u64(1));
    for (std::uint64_t h = 1; h <= kLeaderHeights; ++h) {
        std::uint32_t p = malicious_prefix(h, seed, set, LeaderMode::Modular, corrupted);
        for (std::uint32_t x = 1; x <= 6 && x <= p; ++x) ++at_least[x];
        seed = tagged_hash("linbft/acceptance/leader", Encoder{}.digest(seed));
    }
    bool ok = true;
    std::string detail = "Modular over 1e5 heights:";
    for (std::uint32_t x = 1; x <= 6; ++x) {
        const double p = std::pow(1.0 / 3.0, x);
        const double sigma = std::sqrt(p * (1 - p) / kLeaderHeights);
        const double freq = static_cast<double>(at_least[x]) / kLeaderHeights;
        char buf[96];
        std::snprintf(buf, sizeof buf, " x=%u %.5f<=%.5f", x, freq, p + kSigmas * sigma);
        detail += buf;
        if (freq > p + kSigmas * sigma) ok = false;
    }
    // Permutation: any n consecutive rounds from round 1 visit each member once.
    std::uint64_t bad = 0;
    for (std::uint32_t n : {4u, 7u, 16u, 64u}) {
        std::vector<Member> ms;
        for (std::uint32_t i = 0; i < n; ++i) ms.push_back({NodeId{i}, node_public_key(i)});
        ParticipantSet ps(0, ms, 100);
        for (std::uint64_t h = 1; h <= 50; ++h) {
            HashDigest s = tagged_hash("linbft/acceptance/perm", Encoder{}.u64(h).u32(n));
            for (Round start = 1; start <= 2 * n; start += n) {
                std::set<std::uint32_t> seen;
                for (Round r = start; r < start + n; ++r)
                    seen.insert(leader_for(h, r, s, ps, LeaderMode::Permutation).index);
                if (seen.size() != n) ++bad;
            }
        }
    }
    detail += "; Permutation windows missing a member: " + std::to_string(bad);
    record("leader-statistics", ok && bad == 0, detail);
}

void speculative_path() {
    std::uint64_t passes = 0, slow = 0, failed = 0, chain_diff = 0, non_spec = 0;
    std::string worst;
    for (std::uint32_t n : {4u, 16u, 64u, 256u}) {
        const std::uint64_t heights = n >= 256 ? 2 : 4;
        ScenarioConfig c = base("speculative-n" + std::to_string(n), n, heights, 11);
        c.speculative = true;
        RunReport spec = run_scenario(c);
        c.speculative = false;
        RunReport plain = run_scenario(c);
        const SimTime bound = 2 * ceil_log2(n) * kDelta;
        SimTime longest = 0;
        for (const auto& p : spec.passes) {
            ++passes;
            longest = std::max(longest, p.end - p.start);
            if (p.end - p.start > bound) ++slow;
            if (!p.success) ++failed;
        }
        for (const auto& h : spec.heights)
            if (h.speculative != "success") ++non_spec;
        if (spec.heights.size() != plain.heights.size() || !spec.live() || !plain.live()) ++chain_diff;
        for (std::size_t i = 0; i < std::min(spec.heights.size(), plain.heights.size()); ++i)
            if (spec.heights[i].block_hash != plain.heights[i].block_hash) ++chain_diff;
        worst += " n=" + std::to_string(n) + ":" + std::to_string(longest) + "/" + std::to_string(bound);
    }
    record("speculative-path", slow == 0 && failed == 0 && chain_diff == 0 && non_spec == 0 && passes > 0,
           std::to_string(passes) + " passes, " + std::to_string(slow) + " over 2*ceil(log2 n)*delta, " +
               std::to_string(failed) + " failed, " + std::to_string(non_spec) + " heights off the tree path, " +
               std::to_string(chain_diff) + " chain differences vs collector path; longest/bound" + worst);
}

void epoch_amortization() {
    bool ok = true;
    std::string detail = "amortized setup per block (measured, bound):";
    for (std::uint32_t n : {4u, 16u, 64u, 256u}) {
        const std::uint64_t e = 4ull * n;
        ScenarioConfig c = base("amortize-n" + std::to_string(n), n, n >= 256 ? e : 2 * e, 3);
        RunReport r = run_scenario(c);
        const double measured = r.amortized_setup_per_block();
        const double bound = std::pow(static_cast<double>(ceil_log2(n)), 3) / 2.0;
        char buf[96];
        std::snprintf(buf, sizeof buf, " n=%u %.2f<=%.1f", n, measured, bound);
        detail += buf;
        if (!r.live() || measured > bound) ok = false;
    }
    record("epoch-amortization", ok, detail);

    // Forced DKG failure: every height falls back and the next height re-runs DKG.
    std::vector<std::pair<std::uint32_t, double>> sweep;
    std::uint64_t wrong = 0, reruns = 0, expected_reruns = 0;
    for (std::uint32_t n : {4u, 8u, 16u, 32u, 64u}) {
        ScenarioConfig c = base("dkg-failure-n" + std::to_string(n), n, 3, 5);
        c.dkg_failure_prob = 1.0;
        RunReport r = run_scenario(c);
        const std::uint64_t expect = 3ull * (n - 1) + 2ull * n * (n - 1);
        if (!r.live() || !r.safe()) ++wrong;
        std::set<Height> setup_heights;
        for (const auto& s : r.setup) setup_heights.insert(s.height);
        for (const auto& h : r.heights) {
            if (!h.fallback || h.volume != expect) ++wrong;
            if (h.height < c.num_heights) {
                ++expected_reruns;
                if (setup_heights.count(h.height + 1)) ++reruns;
            }
        }
        sweep.emplace_back(n, static_cast<double>(r.heights.empty() ? 0 : r.heights.front().volume));
    }
    const double slope = fit_complexity(sweep);
    char buf[160];
    std::snprintf(buf, sizeof buf, "fallback volume 3(n-1)+2n(n-1) at every height (%llu mismatches), slope %.3f, "
                  "DKG re-run after %llu/%llu fallback heights",
                  static_cast<unsigned long long>(wrong), slope, static_cast<unsigned long long>(reruns),
                  static_cast<unsigned long long>(expected_reruns));
    record("dkg-failure-fallback", wrong == 0 && slope >= kBaselineSlopeLo && slope <= kBaselineSlopeHi &&
                                       reruns == expected_reruns,
           buf);
}

void determinism() {
    std::vector<ScenarioConfig> cases;
    cases.push_back(safety_case(Category::Equivocating, 7, 3));
    cases.push_back(safety_case(Category::DelayedGst, 16, 4));
    cases.push_back(safety_case(Category::Rotating, 7, 5));
    cases.push_back(safety_case(Category::DkgFailure, 7, 6));
    ScenarioConfig spec = base("speculative-n16", 16, 3, 9);
    spec.speculative = true;
    cases.push_back(spec);
    std::uint64_t differ = 0;
    for (const auto& c : cases)
        if (to_jsonl(run_scenario(c)) != to_jsonl(run_scenario(c))) ++differ;
    record("determinism", differ == 0,
           std::to_string(cases.size()) + " scenarios run twice, " + std::to_string(differ) + " byte differences");
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    const std::vector<std::function<void()>> steps = {linear_complexity, view_change_cost, leader_statistics,
                                                      speculative_path,  epoch_amortization, determinism,
                                                      safety_and_liveness};
    for (const auto& step : steps) step();
    int hard = 0, known = 0;
    for (const auto& o : g_outcomes) {
        if (o.pass) continue;
        (o.known_reason.empty() ? hard : known)++;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%zu criteria, %d unexpected failures, %d known-unattainable failures (%.1fs)\n", g_outcomes.size(),
                hard, known, secs);
    return hard == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
