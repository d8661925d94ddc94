#include "brc/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using brc::Philox4x32;
using brc::RandomStream;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, ZeroCounterZeroKey) {
    const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out, (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, AllOnes) {
    const auto out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                          {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, PiDigits) {
    const auto out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                          {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, SameKeySameSequence) {
    RandomStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, SubstreamsAreDistinctAndStable) {
    const RandomStream root(7);
    EXPECT_EQ(root.substream("data").key(), root.substream("data").key());
    std::set<std::uint64_t> keys;
    for (const char* name : {"data", "matrices", "search", "grid", "input-matrix", "adjacency"})
        keys.insert(root.substream(name).key());
    for (std::uint64_t i = 0; i < 100; ++i) keys.insert(root.substream(i).key());
    EXPECT_EQ(keys.size(), 106u);
    EXPECT_NE(RandomStream(1).substream("data").key(), RandomStream(2).substream("data").key());
}

TEST(RandomStream, UniformMoments) {
    RandomStream s(3);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform(-1.0, 1.0);
        ASSERT_GE(u, -1.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.01);
}

TEST(RandomStream, NormalMoments) {
    RandomStream s(5);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}
