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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "umlmc/langevin.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/stats.hpp"

namespace umlmc {
namespace {

TEST(EmStep, Examples) {
  EXPECT_EQ(em_step(Point{0.0}, Point{0.0}, 0.1, Point{0.0}), Point{0.0});
  EXPECT_NEAR(em_step(Point{1.0}, Point{1.0}, 0.5, Point{0.1})[0], 1.0 - 0.5 + std::sqrt(2.0) * 0.1, 1e-15);
  EXPECT_NEAR(em_step(Point{1.0}, Point{1.0}, 0.5, Point{0.1})[0], 0.6414214, 1e-7);
}

TEST(EmStep, GeometricDecayWithoutNoise) {
  const Potential q = make_quadratic(1);
  Point x{3.0};
  const double h = 0.1;
  for (int n = 1; n <= 20; ++n) {
    x = em_step(x, q.gradient(x), h, Point{0.0});
    EXPECT_NEAR(x[0], 3.0 * std::pow(1.0 - h, n), 1e-13);
  }
}

TEST(SimulatePath, ZeroSteps) {
  RngStream rng(1, 0);
  const PathResult r = simulate_path(make_quadratic(2), {0.1, 0, {1.0, 2.0}}, rng);
  EXPECT_EQ(r.x, (Point{1.0, 2.0}));
  EXPECT_EQ(r.grad_queries, 0u);
}

TEST(SimulatePath, QueriesAndDeterminism) {
  const Potential p = make_oscillatory(2).counted();
  RngStream a(5, 1), b(5, 1);
  const PathResult ra = simulate_path(p, {0.01, 250, {0.5, -0.5}}, a);
  const PathResult rb = simulate_path(p, {0.01, 250, {0.5, -0.5}}, b);
  EXPECT_EQ(ra.x, rb.x);
  EXPECT_EQ(ra.grad_queries, 250u);
  EXPECT_EQ(p.grad_calls(), 500u);
}

TEST(SimulatePath, DivergenceNamesStep) {
  RngStream rng(1, 0);
  try {
    simulate_path(make_quadratic(1), {5.0, 200, {1.0}}, rng);  // |1 - h| = 4: explodes
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(SimulatePath, StationaryQuadraticLaw) {
  const Potential q = make_quadratic(1);
  const RngStream root(2024, 0);
  Welford w;
  for (int i = 0; i < 10000; ++i) {
    RngStream s = root.derive(i);
    w.add(simulate_path(q, {0.01, 1000, {5.0}}, s).x[0]);
  }
  EXPECT_LT(std::fabs(w.mean()), 3.0 * std::sqrt(w.variance() / 1e4));
  // EM on f = x^2/2 has stationary variance 1/(1 - h/2)
  EXPECT_NEAR(w.variance(), 1.0, 0.1);
}

TEST(Horizon, RemainderRule) {
  const HorizonSplit s = split_horizon(1.05, 0.1);
  EXPECT_EQ(s.full_steps, 10u);
  EXPECT_NEAR(s.remainder, 0.05, 1e-12);
  const HorizonSplit e = split_horizon(1.0, 0.1);  // 1.0/0.1 is 9.999... in binary
  EXPECT_EQ(e.full_steps, 10u);
  EXPECT_EQ(e.remainder, 0.0);
  const Potential q = make_quadratic(1).counted();
  RngStream rng(3, 0);
  EXPECT_EQ(simulate_horizon(q, 1.05, 0.1, {0.0}, rng).grad_queries, 11u);
}

TEST(Coupled, TrivialCases) {
  RngStream rng(1, 0);
  const CoupledEndpoints e = simulate_coupled(make_quadratic(2), 0.1, 0, {1.0, 1.0}, {1.0, 1.0}, rng);
  EXPECT_EQ(e.x_fine, (Point{1.0, 1.0}));
  EXPECT_EQ(e.x_coarse, (Point{1.0, 1.0}));
  EXPECT_EQ(e.grad_queries, 0u);

  RngStream r2(2, 0);
  const CoupledEndpoints z = simulate_coupled(make_zero_potential(3), 0.01, 100, {0, 0, 0}, {0, 0, 0}, r2);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(z.x_fine[i], z.x_coarse[i], 1e-13);
}

TEST(Coupled, GradQueries) {
  const Potential p = make_oscillatory(2).counted();
  RngStream rng(3, 0);
  const CoupledEndpoints e = simulate_coupled(p, 0.01, 40, {0, 0}, {0, 0}, rng);
  EXPECT_EQ(e.grad_queries, 120u);
  EXPECT_EQ(p.grad_calls(), 120u);
}

// Re-deriving the coarse path from the recorded fine increments reproduces it bit for bit.
TEST(Coupled, ExactNoiseSharing) {
  const Potential p = make_oscillatory(2);
  const double h = 0.01;
  const std::uint64_t N = 50;
  RngStream rng(8, 4);
  const RngStream replay = rng;
  const CoupledEndpoints e = simulate_coupled(p, h, N, {0.3, 0.1}, {0.3, 0.1}, rng);

  RngStream r = replay;
  Point xf{0.3, 0.1}, xc{0.3, 0.1};
  for (std::uint64_t n = 0; n < N; ++n) {
    const Point dw1 = gaussian_increment(r, 2, h);
    const Point dw2 = gaussian_increment(r, 2, h);
    xf = em_step(xf, p.gradient(xf), h, dw1);
    xf = em_step(xf, p.gradient(xf), h, dw2);
    xc = em_step(xc, p.gradient(xc), 2 * h, Point{dw1[0] + dw2[0], dw1[1] + dw2[1]});
  }
  EXPECT_EQ(e.x_fine, xf);
  EXPECT_EQ(e.x_coarse, xc);
}

double coupled_msd(double h, double T, int n) {
  const Potential q = make_quadratic(1);
  const RngStream root(99, static_cast<std::uint64_t>(std::llround(1.0 / h)));
  const auto N = static_cast<std::uint64_t>(std::llround(T / (2 * h)));
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    RngStream r = root.derive(i);
    const CoupledEndpoints e = simulate_coupled(q, h, N, {0.0}, {0.0}, r);
    s += dist_sq(e.x_fine, e.x_coarse);
  }
  return s / n;
}

TEST(Coupled, SquaredDistanceScalesLikeHSquared) {
  const double m1 = coupled_msd(0.02, 1.0, 10000);
  const double m2 = coupled_msd(0.01, 1.0, 10000);
  const double m3 = coupled_msd(0.005, 1.0, 10000);
  EXPECT_GE(m1 / m2, 3.0);
  EXPECT_LE(m1 / m2, 5.0);
  EXPECT_GE(m2 / m3, 3.0);
  EXPECT_LE(m2 / m3, 5.0);
}

// Synchronous coupling of two starts contracts like exp(-2 m T) for m = 1.
TEST(Coupled, ContractionFromDifferentStarts) {
  const Potential q = make_quadratic(1);
  const double h = 0.01;
  for (double T : {1.0, 2.0, 4.0}) {
    const RngStream root(12, static_cast<std::uint64_t>(T));
    const auto n = static_cast<std::uint64_t>(std::llround(T / h));
    double s = 0.0;
    for (int i = 0; i < 10000; ++i) {
      RngStream a = root.derive(i), b = root.derive(i);
      const PathResult x = simulate_path(q, {h, n, {0.0}}, a);
      const PathResult y = simulate_path(q, {h, n, {4.0}}, b);
      s += dist_sq(x.x, y.x);
    }
    EXPECT_LE(s / 10000, std::exp(-2.0 * T) * 16.0 * 1.1) << T;
  }
}

}  // namespace
}  // namespace umlmc
