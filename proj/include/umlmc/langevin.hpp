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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include "umlmc/error.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/vec.hpp"

namespace umlmc {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kDivergenceBound = 1e12;

/// One Euler-Maruyama step x - h g + sqrt(2) dW, written into out (may alias x).
inline void em_step(std::span<const double> x, std::span<const double> g, double h, std::span<const double> dw,
                    std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - h * g[i] + kSqrt2 * dw[i];
}

inline Point em_step(std::span<const double> x, std::span<const double> g, double h, std::span<const double> dw) {
  Point out(x.size());
  em_step(x, g, h, dw, out);
  return out;
}

/// Throws DivergenceError if the state is non-finite or beyond 1e12.
inline void check_state(std::span<const double> x, std::uint64_t step, const char* path = "path") {
  for (double v : x) {
    if (!std::isfinite(v) || std::fabs(v) > kDivergenceBound)
      throw DivergenceError(std::string(path) + " diverged at step " + std::to_string(step));
  }
}

struct PathConfig {
  double h = 0.01;
  std::uint64_t n_steps = 0;
  Point x0;
};

struct PathResult {
  Point x;
  std::uint64_t grad_queries = 0;
};

/// Advances x in place by n steps of size h, drawing increments from rng.
inline std::uint64_t advance_path(const Potential& p, std::span<double> x, double h, std::uint64_t n,
                                  RngStream& rng, std::uint64_t step_offset = 0) {
  Point g(x.size());
  Point dw(x.size());
  for (std::uint64_t k = 0; k < n; ++k) {
    p.gradient(x, g);
    fill_gaussian_increment(rng, h, dw);
    em_step(x, g, h, dw, x);
    check_state(x, step_offset + k + 1);
  }
  return n;
}

/// N-step Euler-Maruyama endpoint for the overdamped Langevin SDE.
inline PathResult simulate_path(const Potential& p, const PathConfig& cfg, RngStream& rng) {
  PathResult r{cfg.x0, 0};
  r.grad_queries = advance_path(p, r.x, cfg.h, cfg.n_steps, rng);
  return r;
}

/// Splits horizon T into floor(T/h) steps of h plus one remainder step.
/// A remainder below 1e-9 h is treated as rounding noise and dropped.
struct HorizonSplit {
  std::uint64_t full_steps = 0;
  double remainder = 0.0;
};

inline HorizonSplit split_horizon(double T, double h) {
  if (!(h > 0.0) || !(T >= 0.0)) throw ParameterError("horizon split needs h > 0 and T >= 0");
  const double ratio = T / h;
  double n = std::floor(ratio);
  if (ratio - n > 1.0 - 1e-9) n += 1.0;
  double rem = T - n * h;
  if (std::fabs(rem) <= 1e-9 * h) rem = 0.0;
  return {static_cast<std::uint64_t>(n), rem};
}

/// Path over an arbitrary horizon T using the remainder rule.
inline PathResult simulate_horizon(const Potential& p, double T, double h, const Point& x0, RngStream& rng) {
  const HorizonSplit s = split_horizon(T, h);
  PathResult r{x0, 0};
  r.grad_queries = advance_path(p, r.x, h, s.full_steps, rng);
  if (s.remainder > 0.0) r.grad_queries += advance_path(p, r.x, s.remainder, 1, rng, s.full_steps);
  return r;
}

struct CoupledEndpoints {
  Point x_fine;
  Point x_coarse;
  std::uint64_t grad_queries = 0;
};

/// Fine path with 2N steps of h and coarse path with N steps of 2h, sharing
/// Brownian motion: each coarse increment is the sum of two fine ones.
inline CoupledEndpoints simulate_coupled(const Potential& p, double h, std::uint64_t N, const Point& x0_fine,
                                         const Point& x0_coarse, RngStream& rng) {
  if (!(h > 0.0)) throw ParameterError("coupled step must be positive");
  const std::size_t d = x0_fine.size();
  CoupledEndpoints e{x0_fine, x0_coarse, 0};
  Point g(d), dw1(d), dw2(d), dwc(d);
  const double h2 = 2.0 * h;
  for (std::uint64_t n = 0; n < N; ++n) {
    fill_gaussian_increment(rng, h, dw1);
    fill_gaussian_increment(rng, h, dw2);
    p.gradient(e.x_fine, g);
    em_step(e.x_fine, g, h, dw1, e.x_fine);
    check_state(e.x_fine, 2 * n + 1, "fine path");
    p.gradient(e.x_fine, g);
    em_step(e.x_fine, g, h, dw2, e.x_fine);
    check_state(e.x_fine, 2 * n + 2, "fine path");
    p.gradient(e.x_coarse, g);
    for (std::size_t i = 0; i < d; ++i) dwc[i] = dw1[i] + dw2[i];
    em_step(e.x_coarse, g, h2, dwc, e.x_coarse);
    check_state(e.x_coarse, n + 1, "coarse path");
  }
  e.grad_queries = 3 * N;
  return e;
}

}  // namespace umlmc
