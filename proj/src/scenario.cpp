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


#include "linbft/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "linbft/leader.hpp"
#include "toml.hpp"

namespace linbft {

namespace {

struct BehaviorName {
    const char* name;
    Behavior bit;
};

constexpr BehaviorName kBehaviorNames[] = {
    {"SilentLeader", kSilentLeader}, {"Equivocate", kEquivocate},   {"DelayMax", kDelayMax},
    {"VoteWithhold", kVoteWithhold}, {"ForgeCert", kForgeCert},     {"InvalidTxs", kInvalidTxs},
    {"ProposeOutOfTurn", kProposeOutOfTurn},
};

template <typename T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
    if (auto v = t[key].value<T>()) return *v;
    return fallback;
}

BehaviorSet parse_behaviors(const toml::node_view<const toml::node>& node) {
    BehaviorSet out = 0;
    if (const auto* arr = node.as_array()) {
        for (const auto& el : *arr) {
            auto s = el.value<std::string>();
            if (!s) throw ConfigInvalid("behavior entries must be strings");
            out |= behavior_from_string(*s);
        }
    } else if (auto s = node.value<std::string>()) {
        out |= behavior_from_string(*s);
    }
    return out;
}

}  // namespace

BehaviorSet behavior_from_string(const std::string& s) {
    for (const auto& b : kBehaviorNames)
        if (s == b.name) return b.bit;
    throw ConfigInvalid("unknown behavior '" + s + "'");
}

std::string behaviors_to_string(BehaviorSet b) {
    std::string out;
    for (const auto& e : kBehaviorNames) {
        if (!(b & e.bit)) continue;
        if (!out.empty()) out += "|";
        out += e.name;
    }
    return out.empty() ? "none" : out;
}

HashDigest node_public_key(std::uint32_t index) {
    Encoder enc;
    enc.u32(index);
    return tagged_hash("linbft/node-key/v1", enc);
}

HashDigest ScenarioConfig::effective_genesis_seed() const {
    if (genesis_seed != HashDigest{}) return genesis_seed;
    Encoder enc;
    enc.u64(seed);
    return tagged_hash("linbft/genesis/v1", enc);
}

void validate(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& why) { throw ConfigInvalid(why); };
    if (cfg.schema_version != kSchemaVersion)
        fail("unsupported schema_version " + std::to_string(cfg.schema_version));
    if (cfg.n == 0) fail("n must be positive");
    if (cfg.n < 3 * cfg.f_actual + 1)
        fail("n=" + std::to_string(cfg.n) + " violates n >= 3f+1 for f=" + std::to_string(cfg.f_actual));
    if (cfg.num_heights == 0) fail("num_heights must be positive");
    if (cfg.network.delta == 0) fail("network.delta must be positive");
    if (cfg.effective_epoch_length() < cfg.n) fail("epoch_length must be at least n");
    if (cfg.n < 4 && cfg.num_heights >= cfg.effective_epoch_length())
        fail("an epoch transition needs n >= 4");
    if (!(cfg.dkg_failure_prob >= 0.0 && cfg.dkg_failure_prob <= 1.0)) fail("dkg_failure_prob must lie in [0, 1]");
    if (!(cfg.dkg_cost_constant > 0.0)) fail("dkg_cost_constant must be positive");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail("rho must lie in (0, 1)");
    if (cfg.max_txs_per_block == 0) fail("max_txs_per_block must be positive");
    if (cfg.tree_fanout < 2) fail("tree_fanout must be at least 2");
    if (cfg.stake == 0) fail("stake must be positive");
    const auto& adv = cfg.adversary;
    if (!adv.rotate_per_height) {
        if (adv.corrupted.size() != cfg.f_actual)
            fail("adversary.corrupted lists " + std::to_string(adv.corrupted.size()) + " nodes but f_actual=" +
                 std::to_string(cfg.f_actual));
        std::set<NodeId> seen;
        for (NodeId id : adv.corrupted) {
            if (id.index >= cfg.n) fail("corrupted node " + to_string(id) + " is not a genesis member");
            if (!seen.insert(id).second) fail("corrupted node " + to_string(id) + " listed twice");
        }
    }
    for (const auto& [id, b] : adv.per_node) {
        (void)b;
        if (std::find(adv.corrupted.begin(), adv.corrupted.end(), id) == adv.corrupted.end() && !adv.rotate_per_height)
            fail("per-node behaviors given for honest " + to_string(id));
    }
    for (const auto& r : cfg.requests) {
        if (r.at_height == 0) fail("request at_height must be positive");
        if (const auto* j = std::get_if<Join>(&r.tx); j && j->node.index < cfg.n)
            fail("join request for existing member " + to_string(j->node));
    }
}

ScenarioConfig parse_scenario(const std::string& toml_text) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error: " << e.description() << " at line " << e.source().begin.line;
        throw ConfigInvalid(os.str());
    }
    ScenarioConfig cfg;
    cfg.schema_version = get_or<std::int64_t>(root, "schema_version", 0);
    cfg.name = get_or<std::string>(root, "name", cfg.name);
    auto non_negative = [](std::int64_t v, const char* key) {
        if (v < 0) throw ConfigInvalid(std::string(key) + " must be non-negative");
        return static_cast<std::uint64_t>(v);
    };
    cfg.n = static_cast<std::uint32_t>(non_negative(get_or<std::int64_t>(root, "n", cfg.n), "n"));
    cfg.num_heights = non_negative(get_or<std::int64_t>(root, "num_heights", 10), "num_heights");
    cfg.seed = non_negative(get_or<std::int64_t>(root, "seed", 1), "seed");
    try {
        cfg.leader_mode = leader_mode_from_string(get_or<std::string>(root, "leader_mode", "permutation"));
    } catch (const ConfigError& e) {
        throw ConfigInvalid(e.what());
    }
    cfg.speculative = get_or<bool>(root, "speculative", false);
    cfg.epoch_length = non_negative(get_or<std::int64_t>(root, "epoch_length", 0), "epoch_length");
    cfg.dkg_failure_prob = get_or<double>(root, "dkg_failure_prob", 0.0);
    cfg.dkg_cost_constant = get_or<double>(root, "dkg_cost_constant", 1.0);
    cfg.rho = get_or<double>(root, "rho", 1e-18);
    cfg.max_txs_per_block = non_negative(get_or<std::int64_t>(root, "max_txs_per_block", 64), "max_txs_per_block");
    cfg.stake = non_negative(get_or<std::int64_t>(root, "stake", 100), "stake");
    cfg.tree_fanout = static_cast<std::uint32_t>(non_negative(get_or<std::int64_t>(root, "tree_fanout", 2), "tree_fanout"));
    cfg.initial_timeout = non_negative(get_or<std::int64_t>(root, "initial_timeout", 0), "initial_timeout");
    cfg.buffer_capacity = non_negative(get_or<std::int64_t>(root, "buffer_capacity", 4096), "buffer_capacity");
    if (auto gs = root["genesis_seed"].value<std::string>()) {
        try {
            cfg.genesis_seed = HashDigest::from_hex(*gs);
        } catch (const std::exception&) {
            throw ConfigInvalid("genesis_seed must be 64 hex characters");
        }
    }

    if (const auto* net = root["network"].as_table()) {
        cfg.network.delta = non_negative(get_or<std::int64_t>(*net, "delta", 10), "network.delta");
        if (auto g = (*net)["gst"].value<std::string>()) {
            if (*g != "never") throw ConfigInvalid("network.gst must be an integer or \"never\"");
            cfg.network.gst = kNever;
        } else {
            cfg.network.gst = non_negative(get_or<std::int64_t>(*net, "gst", 0), "network.gst");
        }
        cfg.network.drop_before_gst = get_or<bool>(*net, "drop_before_gst", false);
        cfg.network.reorder = get_or<bool>(*net, "reorder", true);
    }

    bool f_given = false;
    if (auto f = root["f_actual"].value<std::int64_t>()) {
        cfg.f_actual = static_cast<std::uint32_t>(non_negative(*f, "f_actual"));
        f_given = true;
    }
    if (const auto* adv = root["adversary"].as_table()) {
        auto& a = cfg.adversary;
        a.behaviors = parse_behaviors((*adv)["behaviors"]);
        a.rushing = get_or<bool>(*adv, "rushing", true);
        a.rotate_per_height = get_or<bool>(*adv, "rotate_per_height", false);
        a.rotation_seed = non_negative(get_or<std::int64_t>(*adv, "rotation_seed", static_cast<std::int64_t>(cfg.seed)),
                                       "adversary.rotation_seed");
        if (const auto* arr = (*adv)["corrupted"].as_array()) {
            for (const auto& el : *arr) {
                auto v = el.value<std::int64_t>();
                if (!v || *v < 0) throw ConfigInvalid("adversary.corrupted entries must be node indices");
                a.corrupted.push_back(NodeId{static_cast<std::uint32_t>(*v)});
            }
            if (!f_given) cfg.f_actual = static_cast<std::uint32_t>(a.corrupted.size());
        } else if (!a.rotate_per_height) {
            for (std::uint32_t i = 0; i < cfg.f_actual; ++i) a.corrupted.push_back(NodeId{i});
        }
        if (const auto* per = (*adv)["per_node"].as_table()) {
            for (const auto& [key, val] : *per) {
                std::uint32_t idx = 0;
                try {
                    idx = static_cast<std::uint32_t>(std::stoul(std::string(key.str())));
                } catch (const std::exception&) {
                    throw ConfigInvalid("adversary.per_node keys must be node indices");
                }
                a.per_node[NodeId{idx}] = parse_behaviors(toml::node_view<const toml::node>(&val));
            }
        }
    } else {
        for (std::uint32_t i = 0; i < cfg.f_actual; ++i) cfg.adversary.corrupted.push_back(NodeId{i});
        cfg.adversary.rotation_seed = cfg.seed;
    }

    if (const auto* reqs = root["requests"].as_array()) {
        for (const auto& el : *reqs) {
            const auto* t = el.as_table();
            if (!t) throw ConfigInvalid("requests entries must be tables");
            MembershipRequest r;
            r.at_height = non_negative(get_or<std::int64_t>(*t, "at_height", 1), "requests.at_height");
            const auto kind = get_or<std::string>(*t, "kind", "");
            const auto node = static_cast<std::uint32_t>(non_negative(get_or<std::int64_t>(*t, "node", -1), "requests.node"));
            if (kind == "join") {
                r.tx = Join{NodeId{node}, node_public_key(node),
                            non_negative(get_or<std::int64_t>(*t, "deposit", static_cast<std::int64_t>(cfg.stake)),
                                         "requests.deposit")};
            } else if (kind == "leave") {
                r.tx = Leave{NodeId{node}};
            } else {
                throw ConfigInvalid("requests.kind must be \"join\" or \"leave\"");
            }
            cfg.requests.push_back(std::move(r));
        }
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_scenario(os.str());
}

}  // namespace linbft
