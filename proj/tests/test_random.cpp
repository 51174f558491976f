#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "kerzoo/random.hpp"

using namespace kerzoo;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const philox4x32 gen(0);
  const auto out = gen({0, 0, 0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const philox4x32 gen(~0ull);
  const auto out = gen({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(CounterStream, StreamsAndIndicesAreDistinct) {
  std::set<std::uint64_t> words;
  for (std::uint64_t idx = 0; idx < 50; ++idx)
    for (auto s : {stream::direction, stream::scalar, stream::rotation, stream::dataset, stream::init})
      for (std::uint32_t b = 0; b < 3; ++b)
        for (auto w : counter_stream(99, idx, s).block(b)) words.insert(w);
  EXPECT_EQ(words.size(), 50u * 5u * 3u * 2u);
}

TEST(CounterStream, PureFunctionOfAddress) {
  const counter_stream a(7, 12345, stream::scalar), b(7, 12345, stream::scalar);
  EXPECT_EQ(a.block(4), b.block(4));
  EXPECT_NE(counter_stream(8, 12345, stream::scalar).block(4), a.block(4));
}

TEST(UnitInterval, Bounds) {
  EXPECT_EQ(to_unit_interval(0), 0.0);
  EXPECT_LT(to_unit_interval(~0ull), 1.0);
  EXPECT_GT(to_open_unit_interval(0), 0.0);
  EXPECT_EQ(to_open_unit_interval(~0ull), 1.0);
}

TEST(Gaussian, MomentsAreStandard) {
  std::vector<double> z(200000);
  fill_gaussian(counter_stream(3, 0, stream::direction), z);
  double m = 0, m2 = 0;
  for (double v : z) {
    m += v;
    m2 += v * v;
  }
  m /= z.size();
  m2 /= z.size();
  // 5 standard errors
  EXPECT_LT(std::abs(m), 5.0 / std::sqrt(200000.0));
  EXPECT_LT(std::abs(m2 - 1.0), 5.0 * std::sqrt(2.0 / 200000.0));
}

TEST(Gaussian, PrefixStable) {
  std::vector<double> a(5), b(8);
  fill_gaussian(counter_stream(1, 2, stream::init), a);
  fill_gaussian(counter_stream(1, 2, stream::init), b);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(RepeatSeed, DistinctAndIdentityAtZero) {
  EXPECT_EQ(repeat_seed(42, 0), 42u);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(repeat_seed(42, i));
  EXPECT_EQ(seeds.size(), 1000u);
}
