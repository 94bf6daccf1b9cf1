// Copyright 2026 The nucleartight Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "nucleartight/parallel.hpp"
#include "nucleartight/rng.hpp"

namespace nt = nucleartight;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerVectors) {
  using C = nt::Philox4x32::Counter;
  using K = nt::Philox4x32::Key;
  EXPECT_EQ(nt::Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(nt::Philox4x32::block(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}),
            (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(nt::Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
            (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UsableInConstantExpressions) {
  constexpr auto r = nt::Philox4x32::block({0, 0, 0, 0}, {0, 0});
  static_assert(r[0] == 0x6627e8d5u);
  SUCCEED();
}

TEST(NormalStream, SameAddressSameDraws) {
  nt::NormalStream a({42, nt::StreamPurpose::particles, 3, 7, 10});
  nt::NormalStream b({42, nt::StreamPurpose::particles, 3, 7, 10});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(NormalStream, AddressFieldsSeparateStreams) {
  const nt::StreamId base{42, nt::StreamPurpose::particles, 3, 7, 10};
  std::vector<nt::StreamId> variants(5, base);
  variants[1].seed = 43;
  variants[2].purpose = nt::StreamPurpose::initial_condition;
  variants[3].major = 4;
  variants[4].minor = 8;
  std::set<double> firsts;
  for (const auto& id : variants) firsts.insert(nt::NormalStream(id).next());
  EXPECT_EQ(firsts.size(), variants.size());
  auto g = base;
  g.group = 11;
  EXPECT_NE(nt::NormalStream(base).next(), nt::NormalStream(g).next());
}

TEST(NormalStream, MomentsOfStandardNormal) {
  nt::NormalStream rng({7, nt::StreamPurpose::test, 0, 0, 0});
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean, kurt = s4 / n;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(kurt - 3.0), 4.0 * std::sqrt(96.0 / n));
}

TEST(NormalStream, UniformsInUnitInterval) {
  nt::NormalStream rng({1, nt::StreamPurpose::resample, 0, 0, 0});
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(MixSeed, DistinctOutputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(nt::mix_seed(i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<int> hits(1001, 0);
    nt::parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(nt::parallel_for(100, 4,
                                [](std::size_t i) {
                                  if (i == 57) throw std::runtime_error("boom");
                                }),
               std::runtime_error);
}
