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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "linbft/accounting.hpp"
#include "linbft/crypto.hpp"
#include "linbft/types.hpp"

namespace linbft {

/// Raw shares standing in for a threshold signature when the keyset is
/// unusable. Linear in size.
struct ShareBundle {
    std::vector<Signature> shares;
    bool operator==(const ShareBundle&) const = default;
};

using QuorumProof = std::variant<ThresholdSignature, ShareBundle>;

/// <round, block hash, quorum proof over the round's prepare digest>.
struct CommitCert {
    Height height = 0;
    Round round = 0;
    HashDigest block_hash;
    QuorumProof proof;

    bool is_fallback() const { return std::holds_alternative<ShareBundle>(proof); }
    bool operator==(const CommitCert&) const = default;
};

enum class Stage : std::uint8_t { Prepare, Commit };

struct Preprepare {
    Height height = 0;
    Round round = 0;
    Block block;
    std::optional<CommitCert> highest_cc;
    Signature proposer_sig;  // over proposal_digest(height, round, hash(block))

    SignedProposal header() const;
};

struct PrepareVote {
    Height height = 0;
    Round round = 0;
    HashDigest block_hash;
    Signature share;  // over prepare_digest(height, round, block_hash)
};

struct CCBroadcast {
    CommitCert cc;
};

struct CommitVote {
    Height height = 0;
    Round round = 0;
    HashDigest cc_hash;
    Signature share;       // over commit_digest(cc)
    Signature seed_share;  // over seed_digest(height, block_hash)
};

struct FinalizeBroadcast {
    CommitCert cc;
    QuorumProof ts_cc;                              // over commit_digest(cc)
    std::optional<ThresholdSignature> seed_ts;      // absent on the fallback path
};

struct NewView {
    Height height = 0;
    Round new_round = 0;
    std::optional<CommitCert> locked_cc;
    Signature share;  // over new_view_digest(height, new_round)
    std::optional<SignedProposal> observed;  // proposal header seen in the abandoned round
    std::optional<Block> locked_block;       // body of locked_cc's block when known
};

/// Unaggregated 2f+1 shares, broadcast when the keyset cannot combine.
struct FallbackBroadcast {
    Height height = 0;
    Round round = 0;
    Stage stage = Stage::Prepare;
    HashDigest block_hash;
    std::vector<Signature> shares;
    std::optional<CommitCert> cc;  // Commit stage: the certificate the shares cover
};

/// Speculative tree pass, child to parent: partial aggregate of a subtree.
struct TreeUp {
    Height height = 0;
    Round round = 0;
    Stage stage = Stage::Prepare;
    HashDigest digest;
    std::vector<Signature> shares;
    std::vector<Signature> seed_shares;
};

/// Speculative tree pass, parent to children.
struct TreeDown {
    Height height = 0;
    Round round = 0;
    MultiSignature all_signed;
    std::optional<CommitCert> cc;
    std::optional<FinalizeBroadcast> finalize;
};

struct SpecFallback {
    Height height = 0;
    Round round = 0;
    Stage stage = Stage::Prepare;
    NodeId reporter;
};

struct SpecAbort {
    Height height = 0;
    Round round = 0;
    Stage stage = Stage::Prepare;
    std::optional<CommitCert> cc;  // Commit stage: certificate to commit on directly
};

struct SyncRequest {
    Height height = 0;
};

/// Catch-up answer: a finalization proof plus the block body.
struct Decided {
    FinalizeBroadcast fin;
    Block block;
};

using ProtocolMessage = std::variant<Preprepare, PrepareVote, CCBroadcast, CommitVote, FinalizeBroadcast, NewView,
                                     FallbackBroadcast, TreeUp, TreeDown, SpecFallback, SpecAbort, SyncRequest,
                                     Decided>;

std::string kind_name(const ProtocolMessage& msg);
Height height_of(const ProtocolMessage& msg);
Round round_of(const ProtocolMessage& msg);
SizeClass size_class(const ProtocolMessage& msg);

HashDigest prepare_digest(Height height, Round round, const HashDigest& block_hash);
HashDigest cert_hash(const CommitCert& cc);
HashDigest commit_digest(const CommitCert& cc);
HashDigest seed_digest(Height height, const HashDigest& block_hash);
HashDigest new_view_digest(Height height, Round round);
/// Next-height seed when finalization went through the unaggregated path.
HashDigest fallback_height_seed(Height height, const HashDigest& block_hash);

void encode(Encoder& enc, const ThresholdSignature& ts);
void encode(Encoder& enc, const QuorumProof& proof);
void encode(Encoder& enc, const CommitCert& cc);

}  // namespace linbft
