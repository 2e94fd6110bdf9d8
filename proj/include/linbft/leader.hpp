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

#include <vector>

#include "linbft/crypto.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Seed-driven Fisher-Yates permutation of member positions [0, n).
std::vector<std::size_t> leader_permutation(const HashDigest& height_seed, std::uint32_t n);

/// Modular: members[H(seed | round) mod n]. Permutation: round-robin over
/// leader_permutation(seed), so rounds 1..n visit every member once.
NodeId leader_for(Height height, Round round, const HashDigest& height_seed, const ParticipantSet& set,
                  LeaderMode mode);

/// Seed for the next height: the proof bytes of the threshold signature that
/// let the previous height finalize.
inline HashDigest next_height_seed(const ThresholdSignature& finalizing) { return finalizing.proof; }

std::string to_string(LeaderMode mode);
LeaderMode leader_mode_from_string(const std::string& s);

}  // namespace linbft
