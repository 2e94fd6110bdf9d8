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

#include <cstdint>
#include <string>

#include "linbft/types.hpp"

namespace linbft {

enum class SizeClass : std::uint8_t { Constant, Linear };

/// One accounted transmission. Linear-class entries cost n units.
struct TransmissionRecord {
    Height height = 0;
    Round round = 0;
    std::string msg_kind;
    SizeClass size_class = SizeClass::Constant;
    std::uint64_t units = 1;
    bool counted_toward_completion = true;
    SimTime sent_at = 0;
    bool after_gst = true;
};

inline std::uint64_t class_units(SizeClass c, std::uint32_t n) { return c == SizeClass::Constant ? 1 : n; }

}  // namespace linbft
