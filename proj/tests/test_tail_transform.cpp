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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "umlmc/langevin.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/stats.hpp"
#include "umlmc/tail_transform.hpp"

namespace umlmc {
namespace {

const TransformParams kDefault{};  // alpha 0, b 1, beta 2, R1 1, R2 2

Point random_point(RngStream& rng, std::size_t d, double r_lo, double r_hi) {
  Point x(d);
  for (double& v : x) v = rng.normal();
  const double r = r_lo + (r_hi - r_lo) * rng.uniform();
  const double k = r / norm(x);
  for (double& v : x) v *= k;
  return x;
}

TEST(Chi, Values) {
  EXPECT_EQ(chi(0.5, 1.0, 2.0)[0], 1.0);
  EXPECT_EQ(chi(2.5, 1.0, 2.0)[0], 0.0);
  EXPECT_DOUBLE_EQ(chi(1.5, 1.0, 2.0)[0], 0.5);
  const double oracle = 1.0 - 35.0 / 256.0 + 84.0 / 1024.0 - 70.0 / 4096.0 + 20.0 / 16384.0;
  EXPECT_NEAR(chi(3.5, 3.0, 5.0)[0], oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.9294434, 1e-7);
}

TEST(Chi, EndpointDerivativesVanish) {
  for (double R : {1.0, 2.0}) {
    for (double r : {std::nextafter(R, 0.0), std::nextafter(R, 3.0)}) {
      const Jet c = chi(r, 1.0, 2.0);
      for (int k = 1; k <= 3; ++k) EXPECT_LE(std::fabs(c[k]), 1e-12) << "r=" << r << " k=" << k;
    }
  }
}

TEST(Chi, DerivativesMatchFiniteDifferences) {
  const double e = 1e-6;
  for (double r = 1.05; r < 2.0; r += 0.1) {
    const Jet c = chi(r, 1.0, 2.0), cp = chi(r + e, 1.0, 2.0), cm = chi(r - e, 1.0, 2.0);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR((cp[k] - cm[k]) / (2 * e), c[k + 1], 1e-5 * std::max(1.0, std::fabs(c[k + 1])));
  }
}

TEST(Chi, NonincreasingOnBlend) {
  for (int k = 0; k <= 10000; ++k) EXPECT_LE(chi(1.0 + k / 10000.0, 1.0, 2.0)[1], 0.0);
}

TEST(RadialMap, Examples) {
  EXPECT_EQ(g_eval(0.5, kDefault), 0.5);
  EXPECT_NEAR(g_eval(3.0, kDefault) / std::exp(9.0), 1.0, 1e-14);
  EXPECT_NEAR(g_eval(3.0, kDefault), 8103.0839, 1e-4);
  EXPECT_NEAR(g_eval(1.5, kDefault), 0.75 + 0.5 * std::exp(2.25), 1e-12);
  EXPECT_NEAR(g_eval(1.5, kDefault), 5.4939, 1e-4);
  EXPECT_THROW(g_eval(-1.0, kDefault), DomainError);
  EXPECT_THROW(g_eval(27.0, kDefault), RangeError);
  EXPECT_THROW(g_deriv(1.0, kDefault, 4), ParameterError);
}

TEST(RadialMap, DerivativesMatchFiniteDifferences) {
  for (const TransformParams& p : {kDefault, TransformParams{1.5, 0.5, 1.5, 0.8, 1.7}}) {
    for (double r : {0.5, 1.2, 1.5, 1.9, 2.3, 3.0}) {
      const double e = 1e-6 * r;
      const Jet g = g_jet(r, p), gp = g_jet(r + e, p), gm = g_jet(r - e, p);
      for (int k = 0; k < 3; ++k)
        EXPECT_NEAR((gp[k] - gm[k]) / (2 * e), g[k + 1], 1e-6 * std::max(1.0, std::fabs(g[k + 1])))
            << "r=" << r << " k=" << k;
    }
  }
}

TEST(RadialMap, JunctionsAreThreeTimesDifferentiable) {
  for (const TransformParams& p : {kDefault, TransformParams{1.5, 0.5, 1.5, 0.8, 1.7}}) {
    for (double R : {p.R1, p.R2}) {
      const double d = 1e-10;
      const Jet lo = g_jet(R - d, p), hi = g_jet(R + d, p);
      for (int k = 0; k <= 3; ++k)
        EXPECT_NEAR(lo[k], hi[k], 1e-6 * std::max(1.0, std::fabs(hi[k]))) << "R=" << R << " order " << k;
    }
  }
}

TEST(RadialMap, StrictlyIncreasing) {
  RngStream rng(5, 0);
  for (int k = 0; k < 1000; ++k) {
    double a = 5.0 * rng.uniform(), b = 5.0 * rng.uniform();
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_LT(g_eval(a, kDefault), g_eval(b, kDefault));
  }
}

TEST(RadialMap, InverseRoundTrip) {
  EXPECT_EQ(g_inverse(0.7, kDefault), 0.7);
  EXPECT_EQ(g_inverse(0.0, kDefault), 0.0);
  EXPECT_NEAR(g_inverse(std::exp(9.0), kDefault), 3.0, 1e-10);
  EXPECT_THROW(g_inverse(-1.0, kDefault), DomainError);
  RngStream rng(6, 0);
  for (int k = 0; k < 100; ++k) {
    const double r = 5.0 * rng.uniform();
    const double s = g_eval(r, kDefault);
    const double back = g_inverse(s, kDefault);
    EXPECT_NEAR(back, r, 1e-10);
    EXPECT_LE(std::fabs(g_eval(back, kDefault) - s), 1e-12 * std::max(1.0, s));
  }
}

TEST(RadialMap, JacobianPositiveOnLogGrid) {
  for (int k = 0; k <= 700; ++k) {
    const double r = 1e-6 * std::pow(10.0, k / 100.0);
    const Jet g = g_jet(r, kDefault);
    EXPECT_GT(g[0], 0.0);
    EXPECT_GT(g[1], 0.0);
    EXPECT_TRUE(std::isfinite(2.0 * (log_g(r, kDefault) - std::log(r)) + std::log(g[1])));
  }
}

TEST(IsotropicMap, Properties) {
  EXPECT_EQ(h_map(Point{0.0, 0.0}, kDefault), (Point{0.0, 0.0}));
  RngStream rng(7, 0);
  for (int k = 0; k < 100; ++k) {
    const Point x = random_point(rng, 3, 0.01, 4.0);
    const Point y = h_map(x, kDefault);
    const double r = norm(x), s = norm(y);
    EXPECT_NEAR(s / g_eval(r, kDefault), 1.0, 1e-14);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i] / s, x[i] / r, 1e-14);
    const Point back = h_inverse(y, kDefault);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], x[i], 1e-10);
  }
}

TEST(TransformParams, Validation) {
  EXPECT_NO_THROW(kDefault.validate());
  EXPECT_THROW((TransformParams{0.0, 0.0, 2.0, 1.0, 2.0}.validate()), ParameterError);
  EXPECT_THROW((TransformParams{0.5, 0.0, 2.0, 1.0, 2.0}.validate()), ParameterError);
  EXPECT_NO_THROW((TransformParams{1.0, 0.0, 2.0, 1.0, 2.0}.validate()));
  EXPECT_THROW((TransformParams{0.0, 1.0, 2.5, 1.0, 2.0}.validate()), ParameterError);
  EXPECT_THROW((TransformParams{0.0, 1.0, 1.0, 1.0, 2.0}.validate()), ParameterError);
  EXPECT_THROW((TransformParams{0.0, 1.0, 2.0, 2.0, 2.0}.validate()), ParameterError);
  EXPECT_THROW((TransformParams{-1.0, 1.0, 2.0, 1.0, 2.0}.validate()), ParameterError);
  // psi(2) = exp(0.04) < 2
  const TransformParams bad{0.0, 0.01, 2.0, 2.0, 3.0};
  EXPECT_LT(std::exp(bad.log_psi(2.0)), 2.0);
  EXPECT_THROW(bad.validate(), ParameterError);
  EXPECT_THROW(TransformedPotential(make_student_t(1, 3.0), bad), ParameterError);
}

TEST(TransformedPotential, RejectsNonIsotropicBase) {
  BuiltinSpec s;
  s.name = "logistic_regression";
  s.dim = 3;
  s.data = synthetic_dataset(LabelKind::kBinary);
  EXPECT_THROW(TransformedPotential(make_potential(s), kDefault), IsotropyError);
  EXPECT_THROW(TransformedPotential(make_oscillatory(2), kDefault), IsotropyError);
  EXPECT_NO_THROW(TransformedPotential(make_oscillatory(1), kDefault));
}

TEST(TransformedPotential, IdentityRegionIsBitExact) {
  for (const Potential& base : {make_student_t(2, 3.0), make_quadratic(3), make_radial_gauss(2, 2.0)}) {
    const TransformedPotential tp(base, kDefault);
    RngStream rng(8, 0);
    for (int k = 0; k < 200; ++k) {
      const Point x = random_point(rng, base.dim(), 0.0, 0.999);
      EXPECT_EQ(tp.value(x), base.value(x));
      EXPECT_EQ(tp.gradient(x), base.gradient(x));
    }
  }
}

TEST(TransformedPotential, GradientMatchesFiniteDifferences) {
  const TransformedPotential tp(make_student_t(2, 3.0), kDefault);
  RngStream rng(9, 0);
  for (int k = 0; k < 100; ++k) {
    const Point x = random_point(rng, 2, 0.1, 4.0);
    const Point g = tp.gradient(x);
    const double scale = std::max(1.0, norm(g));
    for (std::size_t i = 0; i < 2; ++i) {
      Point xp = x, xm = x;
      const double e = 1e-6;
      xp[i] += e;
      xm[i] -= e;
      EXPECT_LE(std::fabs((tp.value(xp) - tp.value(xm)) / (2 * e) - g[i]) / scale, 1e-5) << "r=" << norm(x);
    }
  }
}

TEST(TransformedPotential, FiniteDifferenceProfileForBasesWithoutOne) {
  // oscillatory in one dimension is even, so it is isotropic but has no analytic profile
  const TransformedPotential tp(make_oscillatory(1), kDefault);
  for (double r : {1.3, 2.5}) {
    const Point x{r};
    const double e = 1e-6;
    EXPECT_NEAR((tp.value(Point{r + e}) - tp.value(Point{r - e})) / (2 * e), tp.gradient(x)[0],
                1e-5 * std::max(1.0, std::fabs(tp.gradient(x)[0])));
  }
}

TEST(TransformedPotential, LogDeterminantIdentity) {
  for (std::size_t d : {1u, 2u, 3u}) {
    const Potential base = make_student_t(d, 3.0);
    const TransformedPotential tp(base, kDefault);
    RngStream rng(10, d);
    for (int k = 0; k < 50; ++k) {
      const Point x = random_point(rng, d, 0.05, 4.0);
      const double r = norm(x);
      const double lhs = base.value(h_map(x, kDefault)) - tp.value(x);
      const double rhs = static_cast<double>(d - 1) * (log_g(r, kDefault) - std::log(r)) + std::log(g_deriv(r, kDefault, 1));
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::fabs(rhs))) << "d=" << d << " r=" << r;
    }
  }
}

TEST(TransformedPotential, HessianEigenvalues) {
  const TransformedPotential q(make_quadratic(3), kDefault);
  const auto [a, b] = q.hessian_eigs(0.6);
  EXPECT_DOUBLE_EQ(a, 1.0);
  EXPECT_DOUBLE_EQ(b, 1.0);

  const TransformedPotential st(make_student_t(2, 3.0), kDefault);
  const auto [rad0, tan0] = st.hessian_eigs(0.5);
  EXPECT_DOUBLE_EQ(tan0, 5.0 / 1.25);  // f'(r)/r with f' = c r / (1 + r^2)
  EXPECT_DOUBLE_EQ(rad0, 5.0 * 0.75 / (1.25 * 1.25));

  for (double r : {1.5, 3.0}) {
    const auto [rad, tan] = st.hessian_eigs(r);
    const double e = 1e-6;
    const double fd_rad = (st.gradient(Point{r + e, 0.0})[0] - st.gradient(Point{r - e, 0.0})[0]) / (2 * e);
    const double fd_tan = (st.gradient(Point{r, e})[1] - st.gradient(Point{r, -e})[1]) / (2 * e);
    EXPECT_NEAR(rad, fd_rad, 1e-4 * std::fabs(fd_rad)) << r;
    EXPECT_NEAR(tan, fd_tan, 1e-4 * std::fabs(fd_tan)) << r;
  }
}

TEST(TransformedPotential, ThirdRadialDerivativeInTail) {
  const TransformedPotential st(make_student_t(3, 2.0), kDefault);
  for (double r : {2.5, 4.0}) {
    const double e = 1e-5;
    const double fd = (st.radial(r + e).u2 - st.radial(r - e).u2) / (2 * e);
    EXPECT_NEAR(st.radial(r).u3, fd, 1e-5 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(AssumptionScan, StudentTTailLimits) {
  const double kappa = 2.0, b = 1.0;
  const TransformedPotential st(make_student_t(3, kappa), kDefault);
  const ScanReport rep = st.assumption_scan({2.5, 5.0, 10.0}, 1e9, kappa, 0.0);
  ASSERT_EQ(rep.rows.size(), 3u);
  const ScanRow& row = rep.rows[2];
  const double r = 10.0;
  EXPECT_GT(row.dissipativity, 0.9 * 2.0 * b * kappa * r * r);
  ASSERT_TRUE(row.special.has_value());
  EXPECT_NEAR((*row.special)[2], row.dissipativity, 1e-9 * row.dissipativity);
  EXPECT_NEAR((*row.special)[0], row.smooth_radial, 1e-9 * std::fabs(row.smooth_radial));
  EXPECT_NEAR((*row.special)[1], row.smooth_tangential, 1e-9 * std::fabs(row.smooth_tangential));
  EXPECT_LT(std::fabs(row.third), 1.0);
  EXPECT_LT(std::fabs(row.mixed), 1.0);
  EXPECT_LT(std::fabs((*row.special)[3]), 1.0);
  EXPECT_LT(std::fabs((*row.special)[4]), 1.0);
  EXPECT_TRUE(rep.smooth_ok);
  EXPECT_TRUE(rep.dissipative_ok);
  EXPECT_TRUE(rep.hessian_ok);
  // a candidate L below the observed smoothness is flagged
  EXPECT_FALSE(st.assumption_scan({10.0}, 1.0, 0.0, 0.0).smooth_ok);
}

TEST(AssumptionScan, RejectsPointsOutsideTail) {
  const TransformedPotential st(make_student_t(2, 3.0), kDefault);
  EXPECT_THROW(st.assumption_scan({3.0, 2.0}, 1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(st.assumption_scan({1.5}, 1.0, 0.0, 0.0), DomainError);
}

TEST(TransformedSampler, ZeroStepsMapsStart) {
  const TransformedPotential tp(make_student_t(2, 3.0), kDefault);
  RngStream rng(1, 0);
  const Point y0{1.2, -0.7};
  const TransformedDraw d = transformed_langevin_sample(tp, 0.01, 0, y0, rng);
  EXPECT_EQ(d.x, h_map(y0, kDefault));
  EXPECT_EQ(d.grad_queries, 0u);
}

TEST(TransformedSampler, IdentityTransformReproducesPlainUla) {
  const TransformParams far{0.0, 1.0, 2.0, 100.0, 200.0};
  const Potential q = make_quadratic(2);
  const TransformedPotential tp(q, far);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream a(seed, 0), b(seed, 0);
    const TransformedDraw d = transformed_langevin_sample(tp, 0.01, 500, {0.3, 0.1}, a);
    const PathResult r = simulate_path(q, {0.01, 500, {0.3, 0.1}}, b);
    EXPECT_EQ(d.x, r.x);
    EXPECT_EQ(d.grad_queries, r.grad_queries);
  }
}

double student_t3_cdf(double x) {  // density proportional to (1 + x^2)^-2
  return 0.5 + (x / (1.0 + x * x) + std::atan(x)) / std::numbers::pi;
}

TEST(TransformedSampler, HeavyTailedTargetSmallRun) {
  const TransformedPotential tp(make_student_t(1, 3.0), kDefault);
  const RngStream root(44, 0);
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    RngStream s = root.derive(i);
    xs.push_back(transformed_langevin_sample(tp, 0.005, 4000, {0.0}, s).x[0]);
  }
  EXPECT_LE(ks_statistic(xs, student_t3_cdf), 0.05);
  EXPECT_NEAR(scaled_student_t_cdf(0.7, 3.0), student_t3_cdf(0.7), 1e-12);
}

TEST(TransformedSampler, SpringWeightsAreReported) {
  const TransformedPotential tp(make_student_t(1, 3.0), kDefault);
  RngStream rng(2, 0);
  const WeightedTransformedDraw d = transformed_spring_sample(tp, 1.0, 0.01, 100, {0.0}, rng);
  EXPECT_GT(d.weight, 0.0);
  EXPECT_TRUE(std::isfinite(d.weight));
  EXPECT_EQ(d.grad_queries, 300u);
  RngStream z(2, 0);
  EXPECT_EQ(transformed_spring_sample(tp, 0.0, 0.01, 100, {0.0}, z).weight, 1.0);
}

}  // namespace
}  // namespace umlmc
