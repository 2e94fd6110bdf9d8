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

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "linbft/hash.hpp"

namespace linbft {

using Height = std::uint64_t;
using Round = std::uint32_t;
using SimTime = std::uint64_t;
using Epoch = std::uint64_t;

/// Stable node identity. Positions inside an epoch's participant set are
/// separate (see ParticipantSet::position_of).
struct NodeId {
    std::uint32_t index = 0;
    auto operator<=>(const NodeId&) const = default;
};

struct Signature {
    NodeId signer;
    HashDigest digest;
    HashDigest proof;
    bool operator==(const Signature&) const = default;
};

/// Opaque transfer. `valid` stands in for transaction validity, which an
/// adversarial proposer may set to false.
struct Transfer {
    std::vector<std::uint8_t> payload;
    bool valid = true;
    bool operator==(const Transfer&) const = default;
};

struct Join {
    NodeId node;
    HashDigest public_key;
    std::uint64_t deposit = 0;
    bool operator==(const Join&) const = default;
};

struct Leave {
    NodeId node;
    bool operator==(const Leave&) const = default;
};

struct SlashEvidence;

/// Slash evidence carried on-chain so every replica applies it at the same height.
struct SlashReport {
    std::shared_ptr<const SlashEvidence> evidence;
    bool operator==(const SlashReport& o) const;
};

using Transaction = std::variant<Transfer, Join, Leave, SlashReport>;

struct Block {
    Height height = 0;
    HashDigest parent_hash;
    NodeId proposer;
    Round round = 0;
    std::vector<Transaction> txs;
    bool operator==(const Block&) const = default;
};

/// Leader-signed proposal header: the proposer's signature covers
/// proposal_digest(height, round, block_hash).
struct SignedProposal {
    Height height = 0;
    Round round = 0;
    HashDigest block_hash;
    Signature sig;
    bool operator==(const SignedProposal&) const = default;
};

enum class LeaderMode : std::uint8_t { Modular, Permutation };

struct EquivocationEvidence {
    SignedProposal first;
    SignedProposal second;
    bool operator==(const EquivocationEvidence&) const = default;
};

struct NonLeaderProposalEvidence {
    SignedProposal proposal;
    HashDigest height_seed;
    LeaderMode mode = LeaderMode::Modular;
    bool operator==(const NonLeaderProposalEvidence&) const = default;
};

struct InvalidBlockEvidence {
    SignedProposal proposal;
    Block block;
    std::uint32_t tx_index = 0;
    bool operator==(const InvalidBlockEvidence&) const = default;
};

struct SlashEvidence {
    std::variant<EquivocationEvidence, NonLeaderProposalEvidence, InvalidBlockEvidence> kind;

    NodeId offender() const;
    std::string kind_name() const;
    bool operator==(const SlashEvidence&) const = default;
};

struct Member {
    NodeId id;
    HashDigest public_key;
    bool operator==(const Member&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Membership of one epoch. f defaults to floor((n-1)/3); the quorum is the
/// smallest q with 2q - n >= f + 1, which is 2f+1 whenever n = 3f+1.
class ParticipantSet {
public:
    ParticipantSet() = default;
    ParticipantSet(Epoch epoch, std::vector<Member> members, std::uint64_t stake_per_member,
                   std::optional<std::uint32_t> f_override = std::nullopt);

    Epoch epoch() const { return epoch_; }
    const std::vector<Member>& members() const { return members_; }
    std::uint32_t n() const { return static_cast<std::uint32_t>(members_.size()); }
    std::uint32_t f() const { return f_; }
    std::uint32_t quorum() const;
    std::uint32_t threshold_t() const { return quorum() - 1; }
    std::uint64_t stake_per_member() const { return stake_per_member_; }

    bool contains(NodeId id) const { return position_of(id).has_value(); }
    std::optional<std::size_t> position_of(NodeId id) const;
    NodeId at(std::size_t position) const { return members_.at(position).id; }
    std::vector<NodeId> ids() const;

    bool operator==(const ParticipantSet&) const = default;

    static std::uint32_t default_f(std::uint32_t n) { return n == 0 ? 0 : (n - 1) / 3; }

private:
    Epoch epoch_ = 0;
    std::vector<Member> members_;
    std::uint64_t stake_per_member_ = 0;
    std::uint32_t f_ = 0;
    std::vector<std::pair<NodeId, std::size_t>> index_;  // sorted by id
};

inline constexpr std::size_t kDefaultMaxTxsPerBlock = 64;

void encode(Encoder& enc, const Signature& sig);
void encode(Encoder& enc, const SignedProposal& p);
void encode(Encoder& enc, const Transaction& tx);
void encode(Encoder& enc, const SlashEvidence& ev);
void encode(Encoder& enc, const Block& b);

/// Canonical digest over every block field in declaration order.
HashDigest hash_block(const Block& b);

/// Digest a proposer signs to attribute a proposal.
HashDigest proposal_digest(Height height, Round round, const HashDigest& block_hash);

/// True if every Transfer in the block is flagged valid; on failure writes the
/// first offending index.
bool block_txs_valid(const Block& b, std::uint32_t* failing_index = nullptr);

std::string to_string(NodeId id);

}  // namespace linbft
