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


#include <gtest/gtest.h>

#include <map>

#include "helpers.hpp"
#include "linbft/crypto.hpp"
#include "linbft/messages.hpp"
#include "linbft/rng.hpp"

namespace linbft {
namespace {

using test::make_set;

class CryptoTest : public ::testing::Test {
protected:
    IdealCrypto crypto{sha256(Encoder{}.str("unit-master"))};
    ParticipantSet set4 = make_set(4);
    ThresholdKeySet keys4 = crypto.make_keyset(set4, 1, true);
    HashDigest msg = sha256(Encoder{}.str("block"));

    std::vector<Signature> shares(const ThresholdKeySet& keys, std::initializer_list<std::uint32_t> ids,
                                  const HashDigest& d) const {
        std::vector<Signature> out;
        for (auto i : ids) out.push_back(crypto.sign(keys, NodeId{i}, d));
        return out;
    }
};

TEST_F(CryptoTest, SignIsDeterministicAndUnique) {
    EXPECT_EQ(crypto.sign(keys4, NodeId{0}, msg), crypto.sign(keys4, NodeId{0}, msg));
    EXPECT_NE(crypto.sign(keys4, NodeId{0}, msg).proof, crypto.sign(keys4, NodeId{1}, msg).proof);
    EXPECT_NE(crypto.sign(keys4, NodeId{0}, msg).proof,
              crypto.sign(keys4, NodeId{0}, sha256(Encoder{}.str("other"))).proof);
    EXPECT_TRUE(crypto.verify(keys4, crypto.sign(keys4, NodeId{2}, msg)));
}

TEST_F(CryptoTest, SharesBindToGeneration) {
    ThresholdKeySet other = crypto.make_keyset(set4, 2, true);
    Signature s = crypto.sign(keys4, NodeId{0}, msg);
    EXPECT_FALSE(crypto.verify(other, s));
    EXPECT_NE(other.group_public_key, keys4.group_public_key);
}

TEST_F(CryptoTest, NonHolderCannotSign) {
    try {
        crypto.sign(keys4, NodeId{9}, msg);
        FAIL();
    } catch (const CryptoError& e) {
        EXPECT_EQ(e.code(), CryptoErrc::NoKey);
    }
}

TEST_F(CryptoTest, ThresholdCombineAtQuorum) {
    ASSERT_EQ(keys4.t, 2u);
    auto s = shares(keys4, {0, 1, 2}, msg);
    ThresholdSignature ts = crypto.combine_threshold(s, keys4);
    EXPECT_TRUE(crypto.verify_threshold(ts, msg, keys4));
    EXPECT_FALSE(crypto.verify_threshold(ts, sha256(Encoder{}.str("x")), keys4));
    // Any quorum yields the same aggregate: it carries no signer identities.
    EXPECT_EQ(crypto.combine_threshold(shares(keys4, {1, 2, 3}, msg), keys4), ts);
}

void expect_code(const std::function<void()>& fn, CryptoErrc code) {
    try {
        fn();
        FAIL() << "no exception";
    } catch (const CryptoError& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

TEST_F(CryptoTest, CombineErrors) {
    expect_code([&] { crypto.combine_threshold(shares(keys4, {0, 1}, msg), keys4); }, CryptoErrc::InsufficientShares);
    // Duplicates count once.
    expect_code([&] { crypto.combine_threshold(shares(keys4, {0, 0, 1}, msg), keys4); },
                CryptoErrc::InsufficientShares);
    expect_code([&] { crypto.combine_threshold(std::vector<Signature>{}, keys4); }, CryptoErrc::EmptyInput);
    auto mixed = shares(keys4, {0, 1}, msg);
    mixed.push_back(crypto.sign(keys4, NodeId{2}, sha256(Encoder{}.str("x"))));
    expect_code([&] { crypto.combine_threshold(mixed, keys4); }, CryptoErrc::MixedDigests);
    ThresholdKeySet broken = crypto.make_keyset(set4, 3, false);
    expect_code([&] { crypto.combine_threshold(shares(broken, {0, 1, 2, 3}, msg), broken); }, CryptoErrc::DkgFailed);
    // Forged shares do not count toward the quorum.
    auto forged = shares(keys4, {0, 1}, msg);
    forged.push_back(Signature{NodeId{2}, msg, sha256(Encoder{}.str("junk"))});
    expect_code([&] { crypto.combine_threshold(forged, keys4); }, CryptoErrc::InsufficientShares);
}

TEST_F(CryptoTest, RandomThresholdProofsNeverVerify) {
    Rng rng(1234);
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        ThresholdSignature ts;
        ts.digest = msg;
        ts.generation = keys4.generation;
        ts.proof = sha256(Encoder{}.u64(rng.next()).u64(rng.next()));
        accepted += crypto.verify_threshold(ts, msg, keys4);
        Signature s{NodeId{static_cast<std::uint32_t>(i % 4)}, msg, ts.proof};
        accepted += crypto.verify(keys4, s);
    }
    EXPECT_EQ(accepted, 0);
}

TEST_F(CryptoTest, ThresholdSignatureSizeIsConstant) {
    for (std::uint32_t n : {4u, 16u, 64u, 256u}) {
        ParticipantSet s = make_set(n);
        ThresholdKeySet k = crypto.make_keyset(s, 7, true);
        std::vector<Signature> sh;
        for (std::uint32_t i = 0; i < k.quorum(); ++i) sh.push_back(crypto.sign(k, NodeId{i}, msg));
        Encoder enc;
        encode(enc, crypto.combine_threshold(sh, k));
        EXPECT_EQ(enc.size(), ThresholdSignature::kEncodedSize) << "n=" << n;
    }
    EXPECT_EQ(ThresholdSignature::kEncodedSize, 72u);
}

TEST_F(CryptoTest, MultiSignatureListsSigners) {
    auto s = shares(keys4, {3, 0, 2}, msg);
    MultiSignature ms = crypto.combine_multi(s, keys4);
    ASSERT_EQ(ms.signers.size(), 3u);
    EXPECT_EQ(ms.signers[0], NodeId{0});
    EXPECT_EQ(ms.signers[2], NodeId{3});
    EXPECT_TRUE(crypto.verify_multi(ms, msg, keys4));
    MultiSignature tampered = ms;
    tampered.signers.push_back(NodeId{1});
    EXPECT_FALSE(crypto.verify_multi(tampered, msg, keys4));
    EXPECT_FALSE(crypto.verify_multi(ms, sha256(Encoder{}.str("x")), keys4));
}

// Chi-square over 16 buckets with 15 degrees of freedom; 37.697 is the
// 0.999 quantile from standard tables.
TEST(Vrf, OutputsAreUniform) {
    constexpr int kBuckets = 16, kSamples = 10000;
    std::vector<int> counts(kBuckets, 0);
    const HashDigest seed = sha256(Encoder{}.str("vrf-seed"));
    for (int i = 0; i < kSamples; ++i) ++counts[vrf_output(seed, static_cast<std::uint64_t>(i)).prefix_u64() % kBuckets];
    const double expected = static_cast<double>(kSamples) / kBuckets;
    double chi2 = 0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 37.697);
}

TEST(Vrf, DependsOnSeedAndTag) {
    const HashDigest a = sha256(Encoder{}.u8(1)), b = sha256(Encoder{}.u8(2));
    EXPECT_NE(vrf_output(a, 1), vrf_output(a, 2));
    EXPECT_NE(vrf_output(a, 1), vrf_output(b, 1));
    EXPECT_EQ(vrf_output(a, 1), vrf_output(a, 1));
}

TEST(Dkg, CostFollowsNLogCubed) {
    EXPECT_EQ(ceil_log2(1), 0u);
    EXPECT_EQ(ceil_log2(5), 3u);
    EXPECT_EQ(dkg_cost_units(4, 1.0), 32u);    // 4 * 2^3
    EXPECT_EQ(dkg_cost_units(16, 1.0), 1024u);  // 16 * 4^3
    EXPECT_EQ(dkg_cost_units(256, 1.0), 131072u);
    EXPECT_EQ(dkg_cost_units(16, 0.5), 512u);
}

TEST(Dkg, FailureProbabilityExtremes) {
    IdealCrypto crypto(sha256(Encoder{}.str("m")));
    ParticipantSet s = make_set(7);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        EXPECT_TRUE(run_dkg(s, crypto, {0.0, 1.0, seed, 1}).keys.valid);
        EXPECT_FALSE(run_dkg(s, crypto, {1.0, 1.0, seed, 1}).keys.valid);
    }
    DkgResult r = run_dkg(s, crypto, {0.0, 1.0, 3, 9});
    EXPECT_EQ(r.keys.t, s.threshold_t());
    EXPECT_EQ(r.keys.generation, 9u);
    EXPECT_EQ(r.cost.units, dkg_cost_units(7, 1.0));
}

}  // namespace
}  // namespace linbft
