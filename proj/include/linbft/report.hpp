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

#include <string>

#include "linbft/metrics.hpp"
#include "linbft/simulator.hpp"

namespace linbft {

/// Line-delimited JSON: one "run" record, then "height", "setup", "evidence"
/// and "pass" records in simulation order. Byte-identical for identical runs.
std::string to_jsonl(const RunReport& report);
std::string to_jsonl(const ComplexityReport& report);

std::string summary(const RunReport& report);
std::string summary(const ComplexityReport& report);

}  // namespace linbft
