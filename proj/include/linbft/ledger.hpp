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
#include <stdexcept>
#include <vector>

#include "linbft/crypto.hpp"
#include "linbft/types.hpp"

namespace linbft {

struct SlashRecord {
    NodeId node;
    SlashEvidence evidence;
    Height height = 0;
    std::uint64_t confiscated = 0;
};

struct EvidenceContext;
struct SlashResult;

/// Equal-stake deposits with confiscation. Conservation:
/// total_deposits() + confiscated() + withdrawn() == deposited().
class StakeLedger {
public:
    void deposit(NodeId node, std::uint64_t amount);
    /// Returns the withdrawn amount (zero for slashed or unknown nodes).
    std::uint64_t withdraw(NodeId node);

    std::uint64_t deposit_of(NodeId node) const;
    bool is_slashed(NodeId node) const;

    std::uint64_t total_deposits() const;
    std::uint64_t confiscated() const { return confiscated_; }
    std::uint64_t withdrawn() const { return withdrawn_; }
    std::uint64_t deposited() const { return deposited_; }
    bool conserved() const { return total_deposits() + confiscated_ + withdrawn_ == deposited_; }

    const std::map<NodeId, std::uint64_t>& deposits() const { return deposits_; }
    const std::vector<SlashRecord>& slashed() const { return slashed_; }

private:
    friend SlashResult apply_slash(const StakeLedger&, const SlashEvidence&, const ParticipantSet&,
                                   const EvidenceContext&, Height);
    std::map<NodeId, std::uint64_t> deposits_;
    std::vector<SlashRecord> slashed_;
    std::uint64_t confiscated_ = 0;
    std::uint64_t withdrawn_ = 0;
    std::uint64_t deposited_ = 0;
};

/// Everything a verifier needs to check evidence from its own view: the
/// keyset in force for the evidence's height and the seed it recorded.
struct EvidenceContext {
    const CryptoProvider* crypto = nullptr;
    const ThresholdKeySet* keys = nullptr;
    const ParticipantSet* set = nullptr;
    std::function<std::optional<HashDigest>(Height)> seed_of;
};

bool verify_proposal(const SignedProposal& p, const EvidenceContext& ctx);
bool verify_evidence(const SlashEvidence& ev, const EvidenceContext& ctx);

enum class SlashErrc { InvalidEvidence, NotAMember };

class SlashError : public std::runtime_error {
public:
    SlashError(SlashErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    SlashErrc code() const { return code_; }

private:
    SlashErrc code_;
};

struct SlashResult {
    StakeLedger ledger;
    ParticipantSet pending_set;  // membership carried to the next epoch, offender removed
    bool newly_slashed = false;
};

/// Confiscates the offender's deposit and drops it from the pending set.
/// Repeating evidence against an already-slashed node changes nothing.
SlashResult apply_slash(const StakeLedger& ledger, const SlashEvidence& ev, const ParticipantSet& set,
                        const EvidenceContext& ctx, Height height);

}  // namespace linbft
