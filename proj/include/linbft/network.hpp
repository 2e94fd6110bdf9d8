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

#include <limits>
#include <map>
#include <optional>

#include "linbft/messages.hpp"
#include "linbft/rng.hpp"
#include "linbft/types.hpp"

namespace linbft {

inline constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

struct NetworkConfig {
    SimTime delta = 10;
    SimTime gst = 0;  // kNever: the network never stabilizes
    bool drop_before_gst = false;
    bool reorder = true;  // false: per-link FIFO delivery
};

/// Delivery model. After GST, latency is uniform in [1, delta]. Before GST
/// the adversary holds certificates and finalize messages until just past the
/// receiver's round deadline, and delays everything else at random, never
/// beyond gst + delta.
class Network {
public:
    Network(NetworkConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

    const NetworkConfig& config() const { return cfg_; }
    bool stable_at(SimTime t) const { return cfg_.gst != kNever && t >= cfg_.gst; }

    /// Delivery time for a message sent at `now`, or nullopt if dropped.
    /// `receiver_deadline` is the receiver's armed round timer.
    std::optional<SimTime> schedule(SimTime now, NodeId from, NodeId to, const ProtocolMessage& msg,
                                    bool delay_max, SimTime receiver_deadline);

private:
    SimTime cap() const;

    NetworkConfig cfg_;
    Rng rng_;
    std::map<std::pair<NodeId, NodeId>, SimTime> last_on_link_;
};

}  // namespace linbft
