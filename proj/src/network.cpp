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


#include "linbft/network.hpp"

#include <algorithm>

namespace linbft {

namespace {

bool held_by_adversary(const ProtocolMessage& msg) {
    return std::holds_alternative<CCBroadcast>(msg) || std::holds_alternative<FinalizeBroadcast>(msg) ||
           std::holds_alternative<FallbackBroadcast>(msg) || std::holds_alternative<TreeDown>(msg);
}

}  // namespace

SimTime Network::cap() const {
    if (cfg_.gst == kNever) return kNever;
    return cfg_.gst + cfg_.delta;
}

std::optional<SimTime> Network::schedule(SimTime now, NodeId from, NodeId to, const ProtocolMessage& msg,
                                         bool delay_max, SimTime receiver_deadline) {
    SimTime at = 0;
    if (stable_at(now)) {
        at = now + (delay_max ? cfg_.delta : rng_.between(1, cfg_.delta));
    } else {
        if (cfg_.drop_before_gst) return std::nullopt;
        const SimTime limit = cap();
        if (delay_max) {
            at = limit;
        } else if (held_by_adversary(msg)) {
            at = std::max(now + 1, receiver_deadline == kNever ? now + 1 : receiver_deadline + 1);
        } else {
            const SimTime span = limit == kNever ? 8 * cfg_.delta : std::min(limit - now, 8 * cfg_.delta);
            at = now + rng_.between(1, std::max<SimTime>(span, 1));
        }
        if (limit != kNever) at = std::min(at, limit);
        at = std::max(at, now + 1);
    }
    if (!cfg_.reorder) {
        SimTime& last = last_on_link_[{from, to}];
        at = std::max(at, last);
        last = at;
    }
    return at;
}

}  // namespace linbft
