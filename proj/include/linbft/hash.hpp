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

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linbft {

/// Fixed-length 32-byte SHA-256 digest. Equality is bytewise.
struct HashDigest {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const HashDigest&) const = default;

    std::string to_hex() const;
    /// Parses 64 hex characters; throws std::invalid_argument otherwise.
    static HashDigest from_hex(std::string_view hex);

    /// First eight bytes read big-endian.
    std::uint64_t prefix_u64() const;
};

/// Canonical, length-prefixed byte encoding used for every hashed or
/// size-accounted structure. Integers are fixed-width big-endian; variable
/// byte strings carry a u64 length prefix.
class Encoder {
public:
    Encoder& u8(std::uint8_t v);
    Encoder& u32(std::uint32_t v);
    Encoder& u64(std::uint64_t v);
    Encoder& boolean(bool v) { return u8(v ? 1 : 0); }
    Encoder& digest(const HashDigest& d);
    Encoder& raw(std::span<const std::uint8_t> data);
    Encoder& bytes(std::span<const std::uint8_t> data);
    Encoder& str(std::string_view s);

    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

HashDigest sha256(std::span<const std::uint8_t> data);
inline HashDigest sha256(const Encoder& enc) { return sha256(enc.buffer()); }

/// Domain-separated hash of a list of parts: tag followed by the encoder contents.
HashDigest tagged_hash(std::string_view tag, const Encoder& payload);

}  // namespace linbft
