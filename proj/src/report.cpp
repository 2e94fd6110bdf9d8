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


#include "linbft/report.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "linbft/leader.hpp"

namespace linbft {

namespace {

using Json = nlohmann::ordered_json;

Json time_value(SimTime t) { return t == kNever ? Json("never") : Json(t); }

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

void line(std::string& out, const Json& j) {
    out += j.dump();
    out += '\n';
}

}  // namespace

std::string to_jsonl(const RunReport& r) {
    std::string out;
    Json run;
    run["type"] = "run";
    run["name"] = r.name;
    run["n"] = r.n;
    run["f"] = r.f;
    run["f_actual"] = r.f_actual;
    run["num_heights"] = r.num_heights;
    run["seed"] = r.seed;
    run["leader_mode"] = to_string(r.leader_mode);
    run["speculative"] = r.speculative;
    run["gst"] = time_value(r.gst);
    run["delta"] = r.delta;
    run["safe"] = r.safe();
    run["live"] = r.live();
    run["safety_violations"] = r.safety_violations;
    run["participant_set_mismatches"] = r.participant_set_mismatches;
    run["post_gst_bound_violations"] = r.post_gst_bound_violations;
    run["all_finalized"] = r.all_finalized;
    run["watchdog_fired"] = r.watchdog_fired;
    run["watchdog"] = r.watchdog;
    run["finished_at"] = r.finished_at;
    run["events"] = r.events;
    run["total_volume"] = r.total_volume;
    run["setup_units"] = r.setup_units;
    run["amortized_setup_per_block"] = fixed(r.amortized_setup_per_block());
    run["amortized_volume_per_block"] = fixed(r.amortized_volume_per_block());
    run["max_malicious_prefix"] = r.max_malicious_prefix;
    run["stake_conserved"] = r.stake_conserved;
    Json slashed = Json::array();
    for (const auto& s : r.slashed)
        slashed.push_back(Json{{"node", to_string(s.node)}, {"kind", s.evidence.kind_name()}, {"height", s.height},
                               {"confiscated", s.confiscated}});
    run["slashed"] = slashed;
    line(out, run);

    for (const auto& h : r.heights) {
        Json j;
        j["type"] = "height";
        j["height"] = h.height;
        j["block_hash"] = h.block_hash.to_hex();
        j["rounds_used"] = h.rounds_used;
        j["view_changes"] = h.view_changes;
        j["volume"] = h.volume;
        j["constant_units"] = h.constant_units;
        j["linear_units"] = h.linear_units;
        j["uncounted_units"] = h.uncounted_units;
        j["block_body_volume"] = h.block_body_volume;
        Json kinds = Json::object();
        for (const auto& [k, v] : h.by_kind) kinds[k] = v;
        j["by_kind"] = kinds;
        j["started_at"] = h.started_at;
        j["first_finalized_at"] = h.first_finalized_at;
        j["last_finalized_at"] = h.last_finalized_at;
        j["started_after_gst"] = h.started_after_gst;
        j["fallback"] = h.fallback;
        j["speculative"] = h.speculative;
        j["slashes"] = h.slashes;
        j["malicious_prefix"] = h.malicious_prefix;
        line(out, j);
    }
    for (const auto& s : r.setup) {
        Json j;
        j["type"] = "setup";
        j["height"] = s.height;
        j["generation"] = s.generation;
        j["dkg_units"] = s.dkg.units;
        j["exchange_units"] = s.exchange ? s.exchange->units : 0;
        j["keys_valid"] = s.keys_valid;
        line(out, j);
    }
    for (const auto& e : r.evidence) {
        Json j;
        j["type"] = "evidence";
        j["height"] = e.detected_at;
        j["reporter"] = to_string(e.reporter);
        j["offender"] = to_string(e.offender);
        j["kind"] = e.kind;
        line(out, j);
    }
    for (const auto& p : r.passes) {
        Json j;
        j["type"] = "pass";
        j["height"] = p.height;
        j["stage"] = p.stage == Stage::Prepare ? "prepare" : "commit";
        j["start"] = p.start;
        j["end"] = p.end;
        j["elapsed"] = p.end - p.start;
        j["success"] = p.success;
        line(out, j);
    }
    return out;
}

std::string to_jsonl(const ComplexityReport& c) {
    std::string out;
    Json j;
    j["type"] = "complexity";
    j["n_values"] = c.n_values;
    j["per_height_volume"] = c.per_height_volume;
    Json mean = Json::array(), amort = Json::array();
    for (double v : c.mean_volume) mean.push_back(fixed(v));
    for (double v : c.amortized_per_block) amort.push_back(fixed(v));
    j["mean_volume"] = mean;
    j["amortized_per_block"] = amort;
    j["baseline_volume"] = c.baseline_volume;
    j["slope_fit"] = fixed(c.slope_fit);
    j["baseline_slope"] = fixed(c.baseline_slope);
    j["max_malicious_prefix"] = c.max_malicious_prefix;
    j["degraded"] = c.degraded;
    line(out, j);
    return out;
}

std::string summary(const RunReport& r) {
    std::ostringstream os;
    os << "scenario " << r.name << ": n=" << r.n << " f=" << r.f << " corrupted=" << r.f_actual
       << " heights=" << r.num_heights << " seed=" << r.seed << " mode=" << to_string(r.leader_mode)
       << (r.speculative ? " speculative" : "") << "\n";
    os << "  safety: " << (r.safe() ? "ok" : "VIOLATED") << "  liveness: " << (r.live() ? "ok" : "FAILED")
       << "  finished_at=" << r.finished_at << "\n";
    std::uint64_t rounds = 0, vcs = 0, fallback = 0;
    for (const auto& h : r.heights) {
        rounds = std::max<std::uint64_t>(rounds, h.rounds_used);
        vcs += h.view_changes;
        fallback += h.fallback ? 1 : 0;
    }
    os << "  max rounds/height=" << rounds << " view changes=" << vcs << " fallback heights=" << fallback << "\n";
    os << "  volume total=" << r.total_volume << " setup=" << r.setup_units
       << " amortized/block=" << fixed(r.amortized_volume_per_block(), 2) << "\n";
    os << "  evidence=" << r.evidence.size() << " slashed=" << r.slashed.size()
       << " max malicious prefix=" << r.max_malicious_prefix << "\n";
    return os.str();
}

std::string summary(const ComplexityReport& c) {
    std::ostringstream os;
    os << "sweep over n =";
    for (auto n : c.n_values) os << " " << n;
    os << "\n";
    for (std::size_t i = 0; i < c.n_values.size(); ++i)
        os << "  n=" << c.n_values[i] << " mean volume/height=" << fixed(c.mean_volume[i], 2)
           << " amortized/block=" << fixed(c.amortized_per_block[i], 2) << " pbft baseline=" << c.baseline_volume[i]
           << "\n";
    os << "  slope: linbft=" << fixed(c.slope_fit) << " pbft=" << fixed(c.baseline_slope)
       << (c.degraded ? "  (degraded: unaggregated fallback heights present)" : "") << "\n";
    return os.str();
}

}  // namespace linbft
