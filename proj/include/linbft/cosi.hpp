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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "linbft/crypto.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Balanced fanout-ary tree in heap layout: order[0] is the root and
/// order[i] has children order[i*fanout + 1 .. i*fanout + fanout].
struct AggregationTree {
    NodeId root;
    std::uint32_t fanout = 2;
    std::uint32_t depth = 0;
    std::vector<NodeId> order;
    std::map<NodeId, std::vector<NodeId>> children;
    std::map<NodeId, NodeId> parent;

    std::optional<NodeId> parent_of(NodeId id) const;
    const std::vector<NodeId>& children_of(NodeId id) const;
    /// Levels below `id` (0 for a leaf).
    std::uint32_t subtree_height(NodeId id) const;
    std::uint32_t subtree_size(NodeId id) const;
    bool contains(NodeId id) const { return parent.count(id) > 0 || id == root; }
};

/// Root first, remaining members shuffled by `seed`, laid out breadth-first.
AggregationTree build_tree(const ParticipantSet& set, NodeId root, std::uint32_t fanout, const HashDigest& seed);

struct SpeculativeSuccess {
    MultiSignature signature;
};

struct SpeculativeFallback {
    std::string reason;
    NodeId reporter;
};

struct PassEnvironment {
    SimTime delta = 10;
    /// Transit time of one hop; must return a value in (0, delta] post-GST.
    std::function<SimTime(NodeId from, NodeId to)> hop_delay;
    /// False for nodes that stay silent in the pass.
    std::function<bool(NodeId)> participates = [](NodeId) { return true; };
};

struct PassResult {
    std::variant<SpeculativeSuccess, SpeculativeFallback> outcome;
    SimTime elapsed = 0;
    std::uint64_t down_links = 0;
    std::uint64_t up_links = 0;
    std::uint64_t notices = 0;

    bool success() const { return std::holds_alternative<SpeculativeSuccess>(outcome); }
    std::uint64_t transmissions() const { return down_links + up_links + notices; }
};

/// Time a node waits for all children after it received the pass.
inline SimTime child_wait(const AggregationTree& tree, NodeId id, SimTime delta) {
    return (2 * static_cast<SimTime>(tree.subtree_height(id)) + 1) * delta;
}

/// One down+up aggregation pass over `digest`. Succeeds only when all n
/// members contribute a valid share; any missing child is reported by its
/// parent and the pass falls back.
PassResult speculative_round(const AggregationTree& tree, const HashDigest& digest, const CryptoProvider& crypto,
                             const ThresholdKeySet& keys, const PassEnvironment& env);

}  // namespace linbft
