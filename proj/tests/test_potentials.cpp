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
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"

namespace umlmc {
namespace {

BuiltinSpec spec_for(const std::string& name) {
  BuiltinSpec s;
  s.name = name;
  s.dim = 3;
  if (name == "logistic_regression" || name == "gaussian_mixture_logistic")
    s.data = synthetic_dataset(LabelKind::kBinary);
  if (name == "welsch") s.data = synthetic_dataset(LabelKind::kReal);
  return s;
}

Point random_in_ball(RngStream& rng, std::size_t d, double radius) {
  Point x(d);
  for (double& v : x) v = rng.normal();
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  const double n = norm(x);
  for (double& v : x) v *= r / n;
  return x;
}

TEST(Potentials, Examples) {
  const Potential osc = make_oscillatory(2);
  const Point zero{0.0, 0.0};
  EXPECT_DOUBLE_EQ(osc.value(zero), -2.0);
  EXPECT_EQ(osc.gradient(zero), zero);

  // second directional derivative along e1 at x1 = pi, by central differences of the gradient
  const double h = 1e-5;
  const double d2 = (osc.gradient(Point{std::numbers::pi + h, 0.0})[0] - osc.gradient(Point{std::numbers::pi - h, 0.0})[0]) / (2 * h);
  EXPECT_NEAR(d2, -1.0, 1e-8);

  const Potential st = make_student_t(1, 3.0);
  EXPECT_NEAR(st.value(Point{2.0}), 2.0 * std::log(5.0), 1e-12);
  EXPECT_NEAR(st.value(Point{2.0}), 3.2188758, 1e-7);

  const Potential q = make_quadratic(3);
  const Point x{1.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(q.value(x), 4.5);
  EXPECT_EQ(q.gradient(x), x);
}

TEST(Potentials, DocumentedConstants) {
  const RegularityInfo& i = make_oscillatory(2).info();
  EXPECT_EQ(*i.smooth_L, 3.0);
  EXPECT_EQ(*i.hessian_L, 2.0);
  EXPECT_EQ(*i.weak_osl_lambda, 1.0);
  EXPECT_EQ(i.dissipative->first, 0.5);
  EXPECT_EQ(i.dissipative->second, 2.0);
  EXPECT_FALSE(i.osl_m.has_value());
  EXPECT_EQ(*make_quadratic(1).info().osl_m, 1.0);
}

TEST(Potentials, Errors) {
  BuiltinSpec s;
  s.name = "radial_gauss";
  s.a = 1.0;  // below e/2
  EXPECT_THROW(make_potential(s), ParameterError);
  s.name = "student_t";
  s.kappa = 0.0;
  EXPECT_THROW(make_potential(s), ParameterError);
  s.name = "no_such_potential";
  EXPECT_THROW(make_potential(s), ConfigError);
  EXPECT_THROW(check_gradient(make_quadratic(1), Point{1.0}, 0.1), ParameterError);
}

TEST(CheckGradient, Examples) {
  EXPECT_LE(check_gradient(make_quadratic(2), Point{1.0, 1.0}, 1e-5), 1e-8);

  BuiltinSpec w;
  w.name = "welsch";
  w.dim = 1;
  w.sigma = 1.0;
  w.lambda0 = 0.1;
  w.data = Dataset{1, 1, {1.0}, {0.0}};
  EXPECT_LE(check_gradient(make_potential(w), Point{0.5}, 1e-5), 1e-5);

  RngStream rng(11, 0);
  const Potential st = make_student_t(3, 2.0);
  for (int k = 0; k < 20; ++k) EXPECT_LE(check_gradient(st, random_in_ball(rng, 3, 5.0), 1e-5), 1e-5);
}

TEST(CheckGradient, AllBuiltinsOnBall) {
  for (const auto& name : builtin_potential_names()) {
    const Potential p = make_potential(spec_for(name));
    RngStream rng(2, 0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) worst = std::max(worst, check_gradient(p, random_in_ball(rng, p.dim(), 5.0), 1e-5));
    EXPECT_LE(worst, 1e-5) << name;
  }
}

TEST(Potentials, DeclaredConstantsHoldOnSamples) {
  for (const auto& name : builtin_potential_names()) {
    const Potential p = make_potential(spec_for(name));
    const RegularityInfo& info = p.info();
    RngStream rng(3, 1);
    for (int k = 0; k < 2000; ++k) {
      const Point x = random_in_ball(rng, p.dim(), 10.0);
      const Point y = random_in_ball(rng, p.dim(), 10.0);
      const Point gx = p.gradient(x), gy = p.gradient(y);
      if (info.smooth_L) {
        EXPECT_LE(std::sqrt(dist_sq(gx, gy)), *info.smooth_L * std::sqrt(dist_sq(x, y)) * (1 + 1e-12) + 1e-12) << name;
      }
      if (info.dissipative) {
        const auto [a, b] = *info.dissipative;
        EXPECT_GE(dot(x, gx), a * norm_sq(x) - b - 1e-9) << name;
      }
      Point dg(gx.size()), dx(x.size());
      for (std::size_t i = 0; i < dx.size(); ++i) {
        dg[i] = gx[i] - gy[i];
        dx[i] = x[i] - y[i];
      }
      if (info.weak_osl_lambda) {
        EXPECT_GE(dot(dg, dx), -*info.weak_osl_lambda * norm_sq(dx) - 1e-9) << name;
      }
      if (info.osl_m) {
        EXPECT_GE(dot(dg, dx), *info.osl_m * norm_sq(dx) - 1e-9) << name;
      }
    }
  }
}

TEST(Potentials, DissipativeExamples) {
  RngStream rng(4, 0);
  const Potential osc = make_oscillatory(2);
  const Potential rg = make_radial_gauss(2, 2.0);
  const Potential cw = make_cosine_well(2, 0.5);
  for (int k = 0; k < 2000; ++k) {
    const Point x = random_in_ball(rng, 2, 10.0);
    const Point y = random_in_ball(rng, 2, 10.0);
    EXPECT_GE(dot(x, osc.gradient(x)), 0.5 * norm_sq(x) - 2.0);
    EXPECT_GE(dot(x, rg.gradient(x)), norm_sq(x) - 1e-12);
    EXPECT_LE(std::sqrt(dist_sq(cw.gradient(x), cw.gradient(y))), 1.5 * std::sqrt(dist_sq(x, y)) + 1e-12);
  }
}

TEST(Potentials, RadialProfilesMatchValues) {
  for (const Potential& p : {make_quadratic(2), make_radial_gauss(2, 2.0), make_student_t(2, 3.0)}) {
    ASSERT_TRUE(p.has_radial_profile());
    for (double r : {0.0, 0.3, 1.0, 2.5, 7.0, 1e3}) {
      const auto f = p.radial()(r);
      EXPECT_NEAR(f[0], p.value(Point{r, 0.0}), 1e-12 * std::max(1.0, std::fabs(f[0]))) << p.name() << " r=" << r;
      const double h = 1e-5 * std::max(1.0, r);
      if (r > 0.0) {
        const auto fp = p.radial()(r + h), fm = p.radial()(r - h);
        for (int k = 0; k < 3; ++k)
          EXPECT_NEAR((fp[k] - fm[k]) / (2 * h), f[k + 1], 1e-6 * std::max(1.0, std::fabs(f[k + 1]))) << p.name() << " k=" << k;
      }
    }
  }
}

TEST(Potentials, StudentTProfileStableAtHugeRadius) {
  const auto f = make_student_t(2, 3.0).radial()(1e200);
  EXPECT_NEAR(f[0], 5.0 * std::log(1e200), 1e-9 * f[0]);
  EXPECT_NEAR(f[1] * 1e200, 5.0, 1e-12);
  EXPECT_TRUE(std::isfinite(f[2]) && std::isfinite(f[3]));
}

TEST(Potentials, CountedTalliesGradientCalls) {
  const Potential p = make_quadratic(2).counted();
  const Potential copy = p;
  p.gradient(Point{1.0, 2.0});
  copy.gradient(Point{1.0, 2.0});
  EXPECT_EQ(p.grad_calls(), 2u);
  EXPECT_EQ(make_quadratic(2).grad_calls(), 0u);
}

TEST(Observables, LipschitzAndBound) {
  RngStream rng(6, 0);
  for (const std::string name : {"cos", "sin", "tanh", "sigmoid_linear"}) {
    ObservableSpec s;
    s.name = name;
    const Observable phi = make_observable(s, 2);
    for (int k = 0; k < 2000; ++k) {
      const Point x = random_in_ball(rng, 2, 10.0), y = random_in_ball(rng, 2, 10.0);
      EXPECT_LE(std::fabs(phi(x) - phi(y)), phi.lipschitz_K * std::sqrt(dist_sq(x, y)) + 1e-15) << name;
      EXPECT_LE(std::fabs(phi(x)), phi.bound) << name;
    }
  }
  ObservableSpec bad;
  bad.name = "cos";
  bad.coord = 5;
  EXPECT_THROW(make_observable(bad, 2), ConfigError);
  bad.name = "nope";
  bad.coord = 0;
  EXPECT_THROW(make_observable(bad, 2), ConfigError);
}

}  // namespace
}  // namespace umlmc
