// Copyright 2026 The umlmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "umlmc/error.hpp"

namespace umlmc {

/// Philox4x32 with 10 rounds: a counter-based bijection keyed by 64 bits.
/// Output depends only on (counter, key), so any draw can be recomputed
/// without replaying the sequence that precedes it.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  static constexpr Counter apply(Counter c, Key k) {
    c = round(c, k);
    for (int r = 1; r < 10; ++r) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
      c = round(c, k);
    }
    return c;
  }
};

/// SplitMix64 finalizer; used to derive child stream identifiers.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Inverse of the standard normal CDF (Wichura, AS241 PPND16).
/// Relative accuracy is about 1e-16 over (0, 1); uses only arithmetic,
/// log and sqrt so results are reproducible across platforms.
inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
             4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
             2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
             1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
             1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
             2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
             7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

/// Maps 64 random bits to a double strictly inside (0, 1). Uses 52 bits so
/// that the largest value 1 - 2^-53 is still representable.
constexpr double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// A reproducible random stream addressed by (seed, stream_id, counter).
///
/// Draw number k of a stream is a pure function of (seed, stream_id, k):
/// Philox is keyed by the seed and fed the block index k/2 together with
/// the stream id; each block yields two 64-bit words. Child streams are
/// obtained with derive(), which hashes the parent id with a key, so
/// nested algorithms can hand out independent streams per sample.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0)
      : seed_(seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent child stream, positioned at counter 0.
  RngStream derive(std::uint64_t key) const {
    return RngStream(seed_, mix64(stream_id_ ^ mix64(key ^ 0x5DEECE66Dull)), 0);
  }

  /// Next 64 random bits; advances the counter by one.
  std::uint64_t next_bits() {
    const std::uint64_t block = counter_ >> 1;
    if (!cache_valid_ || block != cached_block_) {
      const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                    static_cast<std::uint32_t>(stream_id_),
                                    static_cast<std::uint32_t>(stream_id_ >> 32)};
      const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
      const auto out = Philox4x32::apply(ctr, key);
      cache_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
      cache_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
      cached_block_ = block;
      cache_valid_ = true;
    }
    return cache_[counter_++ & 1u];
  }

  double uniform() { return bits_to_open_unit(next_bits()); }

  double normal() { return normal_quantile(uniform()); }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t cached_block_ = 0;
  std::array<std::uint64_t, 2> cache_{};
  bool cache_valid_ = false;
};

/// Fills `out` with a Brownian increment ~ N(0, h I).
inline void fill_gaussian_increment(RngStream& rng, double h, std::span<double> out) {
  const double scale = std::sqrt(h);
  for (double& v : out) v = scale * rng.normal();
}

/// Brownian increment of dimension d over a step of length h.
inline std::vector<double> gaussian_increment(RngStream& rng, std::size_t d, double h) {
  std::vector<double> dw(d);
  fill_gaussian_increment(rng, h, dw);
  return dw;
}

/// Draws j >= 1 with P[j = k] = 2^-k by counting trailing zero bits.
/// Throws JCapError rather than truncating when j would exceed j_cap.
inline int geometric_half(RngStream& rng, int j_cap = 64) {
  int j = 1;
  for (;;) {
    const std::uint64_t w = rng.next_bits();
    if (w != 0) {
      j += std::countr_zero(w);
      break;
    }
    j += 64;
    if (j > j_cap) break;
  }
  if (j > j_cap) throw JCapError("geometric draw j=" + std::to_string(j) + " exceeds j_cap=" + std::to_string(j_cap));
  return j;
}

}  // namespace umlmc
