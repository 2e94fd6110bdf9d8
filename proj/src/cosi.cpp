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

#include "linbft/cosi.hpp"

#include <algorithm>
#include <functional>

#include "linbft/leader.hpp"

namespace linbft {

std::optional<NodeId> AggregationTree::parent_of(NodeId id) const {
    auto it = parent.find(id);
    if (it == parent.end()) return std::nullopt;
    return it->second;
}

const std::vector<NodeId>& AggregationTree::children_of(NodeId id) const {
    static const std::vector<NodeId> kNone;
    auto it = children.find(id);
    return it == children.end() ? kNone : it->second;
}

std::uint32_t AggregationTree::subtree_height(NodeId id) const {
    std::uint32_t h = 0;
    for (auto c : children_of(id)) h = std::max(h, subtree_height(c) + 1);
    return h;
}

std::uint32_t AggregationTree::subtree_size(NodeId id) const {
    std::uint32_t s = 1;
    for (auto c : children_of(id)) s += subtree_size(c);
    return s;
}

AggregationTree build_tree(const ParticipantSet& set, NodeId root, std::uint32_t fanout, const HashDigest& seed) {
    if (set.n() == 0) throw ConfigError("cannot build a tree over an empty set");
    if (fanout < 2) throw ConfigError("tree fanout must be at least 2");
    if (!set.contains(root)) throw ConfigError("tree root is not a member");

    std::vector<NodeId> rest;
    for (const auto& m : set.members())
        if (m.id != root) rest.push_back(m.id);
    Encoder enc;
    enc.digest(seed).str("cosi-tree");
    const auto perm = leader_permutation(tagged_hash("linbft/cosi/v1", enc), static_cast<std::uint32_t>(rest.size()));

    AggregationTree tree;
    tree.root = root;
    tree.fanout = fanout;
    tree.order.push_back(root);
    for (auto p : perm) tree.order.push_back(rest[p]);
    for (std::size_t i = 1; i < tree.order.size(); ++i) {
        const NodeId parent = tree.order[(i - 1) / fanout];
        tree.parent[tree.order[i]] = parent;
        tree.children[parent].push_back(tree.order[i]);
    }
    tree.depth = tree.subtree_height(root);
    return tree;
}

PassResult speculative_round(const AggregationTree& tree, const HashDigest& digest, const CryptoProvider& crypto,
                             const ThresholdKeySet& keys, const PassEnvironment& env) {
    PassResult result;
    std::map<NodeId, SimTime> received;  // down-pass arrival per participating node
    received[tree.root] = 0;
    for (std::size_t i = 0; i < tree.order.size(); ++i) {
        const NodeId id = tree.order[i];
        if (!received.count(id) || !env.participates(id)) continue;
        for (auto c : tree.children_of(id)) {
            received[c] = received[id] + env.hop_delay(id, c);
            ++result.down_links;
        }
    }

    struct Up {
        bool complete = false;
        SimTime ready = 0;
        std::vector<Signature> shares;
    };
    std::optional<SpeculativeFallback> failure;
    SimTime failure_time = 0;
    std::function<Up(NodeId)> climb = [&](NodeId id) -> Up {
        Up up;
        if (!received.count(id) || !env.participates(id)) return up;
        const SimTime start = received[id];
        const SimTime deadline = start + child_wait(tree, id, env.delta);
        up.ready = start;
        up.complete = true;
        up.shares.push_back(crypto.sign(keys, id, digest));
        for (auto c : tree.children_of(id)) {
            Up child = climb(c);
            SimTime arrival = 0;
            if (child.complete) {
                arrival = child.ready + env.hop_delay(c, id);
                ++result.up_links;
            }
            if (!child.complete || arrival > deadline) {
                up.complete = false;
                if (!failure || deadline < failure_time) {
                    failure = SpeculativeFallback{"missing contribution from " + to_string(c), id};
                    failure_time = deadline;
                }
                continue;
            }
            up.ready = std::max(up.ready, arrival);
            up.shares.insert(up.shares.end(), child.shares.begin(), child.shares.end());
        }
        return up;
    };
    Up top = climb(tree.root);

    if (top.complete && top.shares.size() == tree.order.size()) {
        auto ms = crypto.combine_multi(top.shares, keys);
        if (ms.signers.size() == keys.n && crypto.verify_multi(ms, digest, keys)) {
            result.outcome = SpeculativeSuccess{std::move(ms)};
            result.elapsed = top.ready;
            return result;
        }
        failure = SpeculativeFallback{"aggregate does not cover all members", tree.root};
        failure_time = top.ready;
    }
    if (!failure) failure = SpeculativeFallback{"incomplete aggregation", tree.root};
    if (failure->reporter != tree.root) {
        const SimTime notice = env.hop_delay(failure->reporter, tree.root);
        ++result.notices;
        failure_time += notice;
    }
    result.outcome = *failure;
    result.elapsed = failure_time;
    return result;
}

}  // namespace linbft
