#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "scb/parallel.hpp"
#include "scb/rng.hpp"

using scb::Philox4x32;
using scb::RandomStream;

// Known-answer vectors published with Random123 (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RandomStream, SameSeedSameDraws) {
    RandomStream a(42, 3);
    RandomStream b(42, 3);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, StreamsDiffer) {
    RandomStream a(42, 3);
    RandomStream b(42, 4);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
    EXPECT_EQ(equal, 0);
}

TEST(RandomStream, UniformMomentsAndRange) {
    RandomStream s(7, 0);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.003);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(RandomStream, NormalMoments) {
    RandomStream s(11, 5);
    const int n = 400000;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m3 += z * z * z;
        m4 += z * z * z * z;
    }
    EXPECT_NEAR(m1 / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
    EXPECT_NEAR(m3 / n, 0.0, 0.03);
    EXPECT_NEAR(m4 / n, 3.0, 0.06);
}

TEST(RandomStream, ExponentialMean) {
    RandomStream s(3, 1);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = s.exponential();
        ASSERT_GT(e, 0.0);
        sum += e;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(RandomStream, BelowIsUniform) {
    RandomStream s(5, 2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto k = s.below(7);
        ASSERT_LT(k, 7u);
        ++counts[k];
    }
    for (int c : counts) EXPECT_NEAR(c, n / 7, 400);
}

TEST(DeriveSeed, TagsAndIndicesSeparate) {
    using scb::StreamTag;
    EXPECT_NE(scb::derive_seed(1, StreamTag::SupPaths, 0), scb::derive_seed(1, StreamTag::Bootstrap, 0));
    EXPECT_NE(scb::derive_seed(1, StreamTag::SupPaths, 0), scb::derive_seed(1, StreamTag::SupPaths, 1));
    EXPECT_NE(scb::derive_seed(1, StreamTag::SupPaths, 0), scb::derive_seed(2, StreamTag::SupPaths, 0));
    EXPECT_EQ(scb::derive_seed(9, StreamTag::Data, 4), scb::derive_seed(9, StreamTag::Data, 4));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    scb::parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
    EXPECT_THROW(scb::parallel_for(100, 4,
                                   [](std::size_t i) {
                                       if (i == 37) throw std::runtime_error("boom");
                                   }),
                 std::runtime_error);
}
