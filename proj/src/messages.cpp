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

#include "linbft/messages.hpp"

namespace linbft {

SignedProposal Preprepare::header() const { return SignedProposal{height, round, hash_block(block), proposer_sig}; }

std::string kind_name(const ProtocolMessage& msg) {
    static const char* const kNames[] = {"Preprepare", "PrepareVote", "CCBroadcast", "CommitVote",
                                         "FinalizeBroadcast", "NewView", "FallbackBroadcast", "TreeUp",
                                         "TreeDown", "SpecFallback", "SpecAbort", "SyncRequest", "Decided"};
    return kNames[msg.index()];
}

Height height_of(const ProtocolMessage& msg) {
    return std::visit(
        [](const auto& m) -> Height {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CCBroadcast>) return m.cc.height;
            else if constexpr (std::is_same_v<T, FinalizeBroadcast>) return m.cc.height;
            else if constexpr (std::is_same_v<T, Decided>) return m.fin.cc.height;
            else return m.height;
        },
        msg);
}

Round round_of(const ProtocolMessage& msg) {
    return std::visit(
        [](const auto& m) -> Round {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CCBroadcast>) return m.cc.round;
            else if constexpr (std::is_same_v<T, FinalizeBroadcast>) return m.cc.round;
            else if constexpr (std::is_same_v<T, Decided>) return m.fin.cc.round;
            else if constexpr (std::is_same_v<T, NewView>) return m.new_round;
            else if constexpr (std::is_same_v<T, SyncRequest>) return 0;
            else return m.round;
        },
        msg);
}

namespace {

bool linear(const std::optional<CommitCert>& cc) { return cc && cc->is_fallback(); }
bool linear(const FinalizeBroadcast& f) { return f.cc.is_fallback() || std::holds_alternative<ShareBundle>(f.ts_cc); }

}  // namespace

SizeClass size_class(const ProtocolMessage& msg) {
    const bool lin = std::visit(
        [](const auto& m) -> bool {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FallbackBroadcast>) return true;
            else if constexpr (std::is_same_v<T, Preprepare>) return linear(m.highest_cc);
            else if constexpr (std::is_same_v<T, NewView>) return linear(m.locked_cc);
            else if constexpr (std::is_same_v<T, CCBroadcast>) return m.cc.is_fallback();
            else if constexpr (std::is_same_v<T, FinalizeBroadcast>) return linear(m);
            else if constexpr (std::is_same_v<T, Decided>) return linear(m.fin);
            else return false;
        },
        msg);
    return lin ? SizeClass::Linear : SizeClass::Constant;
}

HashDigest prepare_digest(Height height, Round round, const HashDigest& block_hash) {
    Encoder enc;
    enc.u64(height).u32(round).digest(block_hash);
    return tagged_hash("linbft/prepare/v1", enc);
}

void encode(Encoder& enc, const ThresholdSignature& ts) { enc.digest(ts.digest).u64(ts.generation).digest(ts.proof); }

void encode(Encoder& enc, const QuorumProof& proof) {
    enc.u8(static_cast<std::uint8_t>(proof.index()));
    if (const auto* ts = std::get_if<ThresholdSignature>(&proof)) {
        encode(enc, *ts);
    } else {
        const auto& b = std::get<ShareBundle>(proof);
        enc.u64(b.shares.size());
        for (const auto& s : b.shares) encode(enc, s);
    }
}

void encode(Encoder& enc, const CommitCert& cc) {
    enc.u64(cc.height).u32(cc.round).digest(cc.block_hash);
    encode(enc, cc.proof);
}

HashDigest cert_hash(const CommitCert& cc) {
    Encoder enc;
    encode(enc, cc);
    return tagged_hash("linbft/cert/v1", enc);
}

HashDigest commit_digest(const CommitCert& cc) {
    Encoder enc;
    enc.digest(cert_hash(cc));
    return tagged_hash("linbft/commit/v1", enc);
}

HashDigest seed_digest(Height height, const HashDigest& block_hash) {
    Encoder enc;
    enc.u64(height).digest(block_hash);
    return tagged_hash("linbft/height-seed/v1", enc);
}

HashDigest new_view_digest(Height height, Round round) {
    Encoder enc;
    enc.u64(height).u32(round);
    return tagged_hash("linbft/new-view/v1", enc);
}

HashDigest fallback_height_seed(Height height, const HashDigest& block_hash) {
    Encoder enc;
    enc.u64(height).digest(block_hash);
    return tagged_hash("linbft/fallback-seed/v1", enc);
}

}  // namespace linbft
