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

#pragma once

// Counter-based random streams.
//
// Every Monte Carlo draw in the library comes from a Philox4x32-10 block
// addressed by (seed, purpose, major index, minor index, block counter).
// A stream therefore depends only on its address, never on which thread
// consumes it or in which order, which is what makes ensemble statistics
// independent of the thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nucleartight {

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < kRounds; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Purpose tags keep streams for different roles disjoint even when they
/// share a seed and indices.
enum class StreamPurpose : std::uint32_t {
  particles = 1,
  limit_driver = 2,
  initial_condition = 3,
  resample = 4,
  test = 0xFF,
};

/// Address of one independent stream.
struct StreamId {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::test;
  std::uint32_t major = 0;  // e.g. Monte Carlo repetition
  std::uint32_t minor = 0;  // e.g. particle index
  std::uint32_t group = 0;  // e.g. particle count n; must be < 2^24
};

/// SplitMix64 finalizer; derives sub-seeds for independent replicate runs.
inline constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Standard-normal stream; Box-Muller on 53-bit uniforms drawn from
/// consecutive Philox blocks. Cheap to construct, so callers create one per
/// work unit instead of sharing.
class NormalStream {
 public:
  explicit NormalStream(const StreamId& id) noexcept
      : key_{static_cast<std::uint32_t>(id.seed),
             static_cast<std::uint32_t>(id.seed >> 32)},
        minor_(id.minor),
        major_(id.major),
        purpose_((static_cast<std::uint32_t>(id.purpose) << 24) ^ id.group) {}

  double next() noexcept {
    if (cached_ == 0) refill();
    return buffer_[--cached_];
  }

  /// Uniform on (0, 1], exposed for tests and resampling.
  double next_uniform() noexcept {
    const auto r = raw_block();
    return to_unit(r[0], r[1]);
  }

 private:
  Philox4x32::Counter raw_block() noexcept {
    const Philox4x32::Counter ctr{block_, minor_, major_, purpose_};
    ++block_;
    return Philox4x32::block(ctr, key_);
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits =
        ((std::uint64_t{hi} << 32) | std::uint64_t{lo}) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  void refill() noexcept {
    const auto r = raw_block();
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    buffer_[0] = radius * std::sin(angle);
    buffer_[1] = radius * std::cos(angle);
    cached_ = 2;
  }

  Philox4x32::Key key_;
  std::uint32_t minor_;
  std::uint32_t major_;
  std::uint32_t purpose_;
  std::uint32_t block_ = 0;
  std::array<double, 2> buffer_{};
  int cached_ = 0;
};

}  // namespace nucleartight
