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

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "umlmc/error.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/vec.hpp"

namespace umlmc {

/// Regularity constants of a potential. Absent entries mean "not known";
/// algorithms that need one raise RegimeError when it is missing.
struct RegularityInfo {
  std::optional<double> smooth_L;         ///< gradient Lipschitz constant
  std::optional<double> hessian_L;        ///< Hessian Lipschitz constant
  std::optional<double> osl_m;            ///< one-sided Lipschitz (strong convexity) constant
  std::optional<double> weak_osl_lambda;  ///< weak one-sided Lipschitz constant
  std::optional<std::pair<double, double>> dissipative;  ///< (a, b): <x, grad f> >= a|x|^2 - b
  double grad_norm_at_origin = 0.0;                      ///< recorded, not enforced
};

/// f(x) = F(|x|) for an isotropic potential. Returns (F, F', F'', F''').
using RadialProfile = std::function<std::array<double, 4>(double)>;

/// A potential f with analytic gradient.
///
/// Potentials are immutable value types and safe to share across threads.
/// Gradient calls go through gradient(), which bumps an optional shared
/// counter so callers can audit the number of queries actually made.
class Potential {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

  Potential(std::string name, std::size_t dim, ValueFn value, GradFn grad, RegularityInfo info = {},
            RadialProfile radial = nullptr)
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        grad_(std::move(grad)),
        info_(std::move(info)),
        radial_(std::move(radial)) {}

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  const RegularityInfo& info() const { return info_; }
  RegularityInfo& mutable_info() { return info_; }
  const RadialProfile& radial() const { return radial_; }
  bool has_radial_profile() const { return static_cast<bool>(radial_); }

  double value(std::span<const double> x) const { return value_(x); }

  void gradient(std::span<const double> x, std::span<double> out) const {
    if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
    grad_(x, out);
  }

  Point gradient(std::span<const double> x) const {
    Point g(dim_);
    gradient(x, g);
    return g;
  }

  /// Copy of this potential whose gradient calls are tallied in a fresh counter.
  Potential counted() const {
    Potential p = *this;
    p.counter_ = std::make_shared<std::atomic<std::uint64_t>>(0);
    return p;
  }

  /// Gradient calls made through this counter; 0 when not counted.
  std::uint64_t grad_calls() const { return counter_ ? counter_->load() : 0; }

 private:
  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradFn grad_;
  RegularityInfo info_;
  RadialProfile radial_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

/// Bounded Lipschitz test function phi.
struct Observable {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  double lipschitz_K = 1.0;
  double bound = 1.0;  ///< sup |phi|; infinity if unbounded

  double operator()(std::span<const double> x) const { return eval(x); }
};

/// In-memory dataset of rows (x_i, y_i), row-major features.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
};

enum class LabelKind { kBinary, kReal };

/// Small reproducible dataset for tests and examples. Features are standard
/// normal; binary labels follow a noisy linear rule, real labels a noisy
/// linear response with a few gross outliers.
inline Dataset synthetic_dataset(LabelKind kind, std::uint64_t seed = 2024, std::size_t n = 20, std::size_t d = 3) {
  Dataset data{n, d, std::vector<double>(n * d), std::vector<double>(n)};
  RngStream rng(seed, 0xDA7Aull);
  Point w_true(d);
  for (std::size_t j = 0; j < d; ++j) w_true[j] = (j % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(j + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data.x[i * d + j] = rng.normal();
    const double score = dot(data.row(i), w_true);
    const double noise = rng.normal();
    if (kind == LabelKind::kBinary) {
      data.y[i] = score + 0.5 * noise > 0.0 ? 1.0 : -1.0;
    } else {
      data.y[i] = score + 0.1 * noise + (i % 7 == 3 ? 4.0 : 0.0);
    }
  }
  return data;
}

/// Parameters naming a builtin potential.
struct BuiltinSpec {
  std::string name = "quadratic";
  std::size_t dim = 1;
  double a = 2.0;          ///< radial_gauss depth; must exceed e/2
  double kappa = 3.0;      ///< student_t degrees of freedom
  double lambda0 = 0.5;    ///< welsch ridge / cosine_well amplitude
  double sigma = 1.0;      ///< welsch bandwidth
  Dataset data;            ///< logistic_regression, gaussian_mixture_logistic, welsch
  std::vector<double> precision;  ///< prior precision Lambda, row-major d x d; identity if empty
  std::vector<Point> means;       ///< mixture component means
  std::vector<double> weights;    ///< mixture weights
};

namespace detail {

inline double log1p_exp_neg(double z) {  // log(1 + e^{-z})
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

inline Eigen::MatrixXd precision_matrix(const BuiltinSpec& spec, std::size_t d) {
  if (spec.precision.empty()) return Eigen::MatrixXd::Identity(d, d);
  require(spec.precision.size() == d * d, "precision must be d x d");
  Eigen::MatrixXd lam(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) lam(i, j) = spec.precision[i * d + j];
  require((lam - lam.transpose()).norm() <= 1e-12 * (1.0 + lam.norm()), "precision must be symmetric");
  return lam;
}

struct DataSummary {
  double max_row_norm = 0.0;
  double sum_row_norm = 0.0;
  double gram_norm = 0.0;  // || sum_i x_i x_i^T ||
};

inline DataSummary summarize(const Dataset& data) {
  DataSummary s;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(data.d, data.d);
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto r = data.row(i);
    const double nr = norm(r);
    s.max_row_norm = std::max(s.max_row_norm, nr);
    s.sum_row_norm += nr;
    Eigen::Map<const Eigen::VectorXd> v(r.data(), static_cast<Eigen::Index>(data.d));
    gram += v * v.transpose();
  }
  s.gram_norm = data.n == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  return s;
}

inline void check_dataset(const Dataset& data, std::size_t d) {
  require(data.n > 0, "dataset is empty");
  require(data.d == d, "dataset feature dimension must equal potential dimension");
  require(data.x.size() == data.n * data.d && data.y.size() == data.n, "dataset arrays have inconsistent sizes");
}

// Sum of logistic losses and its gradient contribution.
inline double logistic_value(const Dataset& data, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) s += log1p_exp_neg(data.y[i] * dot(data.row(i), w));
  return s;
}

inline void logistic_grad_add(const Dataset& data, std::span<const double> w, std::span<double> out) {
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto xi = data.row(i);
    const double c = sigmoid(-data.y[i] * dot(xi, w)) * data.y[i];
    for (std::size_t j = 0; j < data.d; ++j) out[j] -= c * xi[j];
  }
}

inline void matvec(const Eigen::MatrixXd& m, std::span<const double> v, std::span<double> out) {
  Eigen::Map<const Eigen::VectorXd> vin(v.data(), static_cast<Eigen::Index>(v.size()));
  Eigen::Map<Eigen::VectorXd> vout(out.data(), static_cast<Eigen::Index>(out.size()));
  vout.noalias() = m * vin;
}

inline double quad_form(const Eigen::MatrixXd& m, std::span<const double> v) {
  Eigen::Map<const Eigen::VectorXd> vin(v.data(), static_cast<Eigen::Index>(v.size()));
  return vin.dot(m * vin);
}

inline Potential finish(Potential p) {
  Point zero(p.dim(), 0.0);
  p.mutable_info().grad_norm_at_origin = norm(p.gradient(zero));
  return p;
}

}  // namespace detail

/// f = |x|^2 / 2.
inline Potential make_quadratic(std::size_t d) {
  RegularityInfo info;
  info.smooth_L = 1.0;
  info.hessian_L = 0.0;
  info.osl_m = 1.0;
  info.weak_osl_lambda = 0.0;
  info.dissipative = std::pair{1.0, 0.0};
  return detail::finish(Potential(
      "quadratic", d, [](std::span<const double> x) { return 0.5 * norm_sq(x); },
      [](std::span<const double> x, std::span<double> g) { std::copy(x.begin(), x.end(), g.begin()); }, info,
      [](double r) { return std::array<double, 4>{0.5 * r * r, r, 1.0, 0.0}; }));
}

/// f = |x|^2 / 2 - 2 cos(x_1). Nonconvex along e_1 near x_1 = pi.
inline Potential make_oscillatory(std::size_t d) {
  RegularityInfo info;
  info.smooth_L = 3.0;
  info.hessian_L = 2.0;
  info.weak_osl_lambda = 1.0;
  info.dissipative = std::pair{0.5, 2.0};
  return detail::finish(Potential(
      "oscillatory", d, [](std::span<const double> x) { return 0.5 * norm_sq(x) - 2.0 * std::cos(x[0]); },
      [](std::span<const double> x, std::span<double> g) {
        std::copy(x.begin(), x.end(), g.begin());
        g[0] += 2.0 * std::sin(x[0]);
      },
      info));
}

/// f = |x|^2 / 2 - a exp(-|x|^2) with a > e/2, nonconvex around |x| = 1.
inline Potential make_radial_gauss(std::size_t d, double a) {
  detail::require(a > std::numbers::e / 2.0, "radial_gauss requires a > e/2");
  RegularityInfo info;
  info.smooth_L = 1.0 + 2.0 * a;
  // min over r of the radial Hessian eigenvalue is attained at r^2 = 3/2
  info.weak_osl_lambda = std::max(0.0, 4.0 * a * std::exp(-1.5) - 1.0);
  info.dissipative = std::pair{1.0, 0.0};
  return detail::finish(Potential(
      "radial_gauss", d, [a](std::span<const double> x) { const double s = norm_sq(x); return 0.5 * s - a * std::exp(-s); },
      [a](std::span<const double> x, std::span<double> g) {
        const double c = 1.0 + 2.0 * a * std::exp(-norm_sq(x));
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = c * x[i];
      },
      info,
      [a](double r) {
        const double s = r * r;
        const double e = std::exp(-s);
        return std::array<double, 4>{0.5 * s - a * e, r + 2.0 * a * r * e, 1.0 + 2.0 * a * e * (1.0 - 2.0 * s),
                                     2.0 * a * e * (4.0 * s * r - 6.0 * r)};
      }));
}

/// Student-t potential ((d + kappa)/2) log(1 + |x|^2). Heavy tailed, not dissipative.
inline Potential make_student_t(std::size_t d, double kappa) {
  detail::require(kappa > 0.0, "student_t requires kappa > 0");
  const double c = static_cast<double>(d) + kappa;
  RegularityInfo info;
  info.smooth_L = c;
  info.weak_osl_lambda = c / 8.0;
  return detail::finish(Potential(
      "student_t", d, [c](std::span<const double> x) { return 0.5 * c * std::log1p(norm_sq(x)); },
      [c](std::span<const double> x, std::span<double> g) {
        const double k = c / (1.0 + norm_sq(x));
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = k * x[i];
      },
      info,
      [c](double r) {
        if (r > 1.0) {  // in terms of u = 1/r so huge radii neither overflow nor lose F
          const double u = 1.0 / r, u2 = u * u;
          const double q = 1.0 / (1.0 + u2);
          return std::array<double, 4>{c * (std::log(r) + 0.5 * std::log1p(u2)), c * u * q,
                                       c * (u2 * u2 - u2) * q * q, c * (2.0 * u2 * u - 6.0 * u2 * u2 * u) * q * q * q};
        }
        const double s = r * r;
        const double q = 1.0 / (1.0 + s);
        return std::array<double, 4>{0.5 * c * std::log1p(s), c * r * q, c * (1.0 - s) * q * q,
                                     c * (2.0 * s * r - 6.0 * r) * q * q * q};
      }));
}

/// Bayesian logistic regression with Gaussian prior of precision Lambda.
inline Potential make_logistic_regression(const BuiltinSpec& spec) {
  const std::size_t d = spec.dim;
  detail::check_dataset(spec.data, d);
  const Eigen::MatrixXd lam = detail::precision_matrix(spec, d);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lam).eigenvalues();
  const double lmin = ev.minCoeff();
  const double lmax = ev.maxCoeff();
  detail::require(lmin > 0.0, "precision must be positive definite");
  const auto sum = detail::summarize(spec.data);
  const double n = static_cast<double>(spec.data.n);
  const double r = sum.max_row_norm;
  RegularityInfo info;
  info.smooth_L = lmax + n * r * r / 4.0;
  info.hessian_L = n * r * r * r / (6.0 * std::sqrt(3.0));
  info.osl_m = lmin;
  info.weak_osl_lambda = 0.0;
  info.dissipative = std::pair{lmin / 2.0, sum.sum_row_norm * sum.sum_row_norm / (2.0 * lmin)};
  auto data = std::make_shared<const Dataset>(spec.data);
  return detail::finish(Potential(
      "logistic_regression", d,
      [data, lam](std::span<const double> w) { return 0.5 * detail::quad_form(lam, w) + detail::logistic_value(*data, w); },
      [data, lam](std::span<const double> w, std::span<double> g) {
        detail::matvec(lam, w, g);
        detail::logistic_grad_add(*data, w, g);
      },
      info));
}

/// Gaussian-mixture prior with logistic likelihood: dissipative but not convex.
inline Potential make_gaussian_mixture_logistic(const BuiltinSpec& spec) {
  const std::size_t d = spec.dim;
  detail::check_dataset(spec.data, d);
  const Eigen::MatrixXd lam = detail::precision_matrix(spec, d);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lam).eigenvalues();
  const double lmin = ev.minCoeff();
  const double lnorm = ev.maxCoeff();
  detail::require(lmin > 0.0, "precision must be positive definite");

  std::vector<Point> means = spec.means;
  std::vector<double> weights = spec.weights;
  if (means.empty()) {
    Point m(d, 0.0);
    m[0] = 1.5;
    means.push_back(m);
    m[0] = -1.5;
    means.push_back(m);
  }
  if (weights.empty()) weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
  detail::require(weights.size() == means.size(), "mixture weights and means differ in length");
  double wsum = 0.0;
  for (double w : weights) {
    detail::require(w > 0.0, "mixture weights must be positive");
    wsum += w;
  }
  detail::require(std::fabs(wsum - 1.0) < 1e-12, "mixture weights must sum to 1");
  double max_mean = 0.0;
  double diam = 0.0;
  for (const auto& m : means) {
    detail::require(m.size() == d, "mixture mean has wrong dimension");
    max_mean = std::max(max_mean, norm(m));
    for (const auto& m2 : means) diam = std::max(diam, std::sqrt(dist_sq(m, m2)));
  }

  const auto sum = detail::summarize(spec.data);
  // Hessian of the mixture part is Lambda - Lambda Cov(m) Lambda with |Cov| <= D^2/4.
  const double cov_term = lnorm * lnorm * diam * diam / 4.0;
  RegularityInfo info;
  info.smooth_L = std::max(lnorm, cov_term) + 0.25 * sum.gram_norm;
  info.weak_osl_lambda = std::max(0.0, cov_term - lmin);
  info.dissipative = std::pair{lmin / 4.0, lnorm * lnorm * max_mean * max_mean / (2.0 * lmin) +
                                               sum.sum_row_norm * sum.sum_row_norm / lmin};

  std::vector<double> log_w(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) log_w[k] = std::log(weights[k]);
  auto data = std::make_shared<const Dataset>(spec.data);

  // Log-sum-exp terms a_k(w) = log p_k - (w - m_k)^T Lambda (w - m_k) / 2.
  auto exponents = [means, log_w, lam](std::span<const double> w, std::vector<double>& a) {
    Point diff(w.size());
    a.resize(means.size());
    for (std::size_t k = 0; k < means.size(); ++k) {
      for (std::size_t j = 0; j < w.size(); ++j) diff[j] = w[j] - means[k][j];
      a[k] = log_w[k] - 0.5 * detail::quad_form(lam, diff);
    }
    return *std::max_element(a.begin(), a.end());
  };

  return detail::finish(Potential(
      "gaussian_mixture_logistic", d,
      [data, exponents](std::span<const double> w) {
        std::vector<double> a;
        const double amax = exponents(w, a);
        double s = 0.0;
        for (double ak : a) s += std::exp(ak - amax);
        return -(amax + std::log(s)) + detail::logistic_value(*data, w);
      },
      [data, exponents, means, lam](std::span<const double> w, std::span<double> g) {
        std::vector<double> a;
        const double amax = exponents(w, a);
        double s = 0.0;
        for (double& ak : a) s += (ak = std::exp(ak - amax));
        Point shifted(w.begin(), w.end());  // w - mbar(w)
        for (std::size_t k = 0; k < means.size(); ++k)
          for (std::size_t j = 0; j < w.size(); ++j) shifted[j] -= a[k] / s * means[k][j];
        detail::matvec(lam, shifted, g);
        detail::logistic_grad_add(*data, w, g);
      },
      info));
}

/// Correntropy-loss regression: mean Welsch loss plus a ridge term.
inline Potential make_welsch(const BuiltinSpec& spec) {
  const std::size_t d = spec.dim;
  detail::check_dataset(spec.data, d);
  const double sigma = spec.sigma;
  const double lambda0 = spec.lambda0;
  detail::require(sigma > 0.0, "welsch requires sigma > 0");
  detail::require(lambda0 > 0.0, "welsch requires lambda0 > 0");
  const auto sum = detail::summarize(spec.data);
  const double r = sum.max_row_norm;
  const double s2 = sigma * sigma;
  // sup_s |s e^{-s^2/2} (3 - s^2)|, attained at s^4 - 6 s^2 + 3 = 0
  const double s_star = std::sqrt(3.0 - std::sqrt(6.0));
  const double c3 = s_star * std::exp(-0.5 * s_star * s_star) * (3.0 - s_star * s_star);
  RegularityInfo info;
  info.smooth_L = lambda0 + r * r / s2;
  info.hessian_L = c3 * r * r * r / (s2 * sigma);
  info.weak_osl_lambda = std::max(0.0, 2.0 * std::exp(-1.5) * r * r / s2 - lambda0);
  // |phi'| <= 1/(sigma sqrt(e)) then Young's inequality
  info.dissipative = std::pair{lambda0 / 2.0, r * r / (2.0 * std::numbers::e * lambda0 * s2)};
  auto data = std::make_shared<const Dataset>(spec.data);
  const double inv_n = 1.0 / static_cast<double>(spec.data.n);
  return detail::finish(Potential(
      "welsch", d,
      [data, s2, lambda0, inv_n](std::span<const double> w) {
        double s = 0.0;
        for (std::size_t i = 0; i < data->n; ++i) {
          const double t = data->y[i] - dot(data->row(i), w);
          s += -std::expm1(-t * t / (2.0 * s2));
        }
        return inv_n * s + 0.5 * lambda0 * norm_sq(w);
      },
      [data, s2, lambda0, inv_n](std::span<const double> w, std::span<double> g) {
        for (std::size_t j = 0; j < w.size(); ++j) g[j] = lambda0 * w[j];
        for (std::size_t i = 0; i < data->n; ++i) {
          const auto xi = data->row(i);
          const double t = data->y[i] - dot(xi, w);
          const double dphi = t / s2 * std::exp(-t * t / (2.0 * s2));
          for (std::size_t j = 0; j < w.size(); ++j) g[j] -= inv_n * dphi * xi[j];
        }
      },
      info));
}

/// f = |x|^2 / 2 + lambda0 sum_i cos(x_i / sqrt(d)).
inline Potential make_cosine_well(std::size_t d, double lambda0) {
  detail::require(lambda0 > 0.0, "cosine_well requires lambda0 > 0");
  const double dd = static_cast<double>(d);
  const double rt = std::sqrt(dd);
  RegularityInfo info;
  info.smooth_L = 1.0 + lambda0;
  info.hessian_L = lambda0 / (dd * rt);
  info.weak_osl_lambda = std::max(0.0, lambda0 / dd - 1.0);
  if (lambda0 < dd) info.osl_m = 1.0 - lambda0 / dd;
  info.dissipative = std::pair{0.5, 0.5 * lambda0 * lambda0 * dd};
  return detail::finish(Potential(
      "cosine_well", d,
      [lambda0, rt](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += std::cos(v / rt);
        return 0.5 * norm_sq(x) + lambda0 * s;
      },
      [lambda0, rt](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - lambda0 / rt * std::sin(x[i] / rt);
      },
      info));
}

/// f = 0. Drift-free Brownian motion; handy for exact-coupling checks.
inline Potential make_zero_potential(std::size_t d) {
  RegularityInfo info;
  info.smooth_L = 0.0;
  info.hessian_L = 0.0;
  info.weak_osl_lambda = 0.0;
  return Potential(
      "zero", d, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); }, info,
      [](double) { return std::array<double, 4>{0.0, 0.0, 0.0, 0.0}; });
}

/// Names accepted by make_potential.
inline const std::vector<std::string>& builtin_potential_names() {
  static const std::vector<std::string> names = {"quadratic", "oscillatory",      "radial_gauss",
                                                 "student_t", "logistic_regression", "gaussian_mixture_logistic",
                                                 "welsch",    "cosine_well"};
  return names;
}

inline Potential make_potential(const BuiltinSpec& spec) {
  if (spec.dim == 0) throw ParameterError("potential dimension must be positive");
  const std::string& n = spec.name;
  if (n == "quadratic") return make_quadratic(spec.dim);
  if (n == "oscillatory") return make_oscillatory(spec.dim);
  if (n == "radial_gauss") return make_radial_gauss(spec.dim, spec.a);
  if (n == "student_t") return make_student_t(spec.dim, spec.kappa);
  if (n == "logistic_regression") return make_logistic_regression(spec);
  if (n == "gaussian_mixture_logistic") return make_gaussian_mixture_logistic(spec);
  if (n == "welsch") return make_welsch(spec);
  if (n == "cosine_well") return make_cosine_well(spec.dim, spec.lambda0);
  throw ConfigError("unknown potential '" + n + "'");
}

/// Max over coordinates of |central FD - grad_i| / max(1, |grad|).
inline double check_gradient(const Potential& p, std::span<const double> x, double fd_step) {
  if (!(fd_step > 0.0 && fd_step <= 1e-2)) throw ParameterError("fd_step must lie in (0, 1e-2]");
  if (!all_finite(x)) throw NumericError("check_gradient: non-finite point");
  const Point g = p.gradient(x);
  if (!all_finite(g)) throw NumericError("check_gradient: non-finite gradient");
  const double scale = std::max(1.0, norm(g));
  Point xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + fd_step;
    const double fp = p.value(xp);
    xp[i] = xi - fd_step;
    const double fm = p.value(xp);
    xp[i] = xi;
    const double fd = (fp - fm) / (2.0 * fd_step);
    if (!std::isfinite(fd)) throw NumericError("check_gradient: non-finite value near coordinate " + std::to_string(i));
    worst = std::max(worst, std::fabs(fd - g[i]) / scale);
  }
  return worst;
}

/// Parameters naming a builtin observable.
struct ObservableSpec {
  std::string name = "cos";  ///< cos, sin, tanh, coord, constant, sigmoid_linear
  std::size_t coord = 0;
  double value = 0.0;             ///< constant
  std::vector<double> direction;  ///< sigmoid_linear
};

inline Observable make_observable(const ObservableSpec& spec, std::size_t dim) {
  const std::size_t i = spec.coord;
  if (spec.name != "constant" && spec.name != "sigmoid_linear" && i >= dim)
    throw ConfigError("observable coordinate " + std::to_string(i) + " out of range");
  const double inf = std::numeric_limits<double>::infinity();
  if (spec.name == "cos") return {"cos", [i](std::span<const double> x) { return std::cos(x[i]); }, 1.0, 1.0};
  if (spec.name == "sin") return {"sin", [i](std::span<const double> x) { return std::sin(x[i]); }, 1.0, 1.0};
  if (spec.name == "tanh") return {"tanh", [i](std::span<const double> x) { return std::tanh(x[i]); }, 1.0, 1.0};
  if (spec.name == "coord") return {"coord", [i](std::span<const double> x) { return x[i]; }, 1.0, inf};
  if (spec.name == "constant") {
    const double c = spec.value;
    return {"constant", [c](std::span<const double>) { return c; }, 0.0, std::fabs(c)};
  }
  if (spec.name == "sigmoid_linear") {
    Point a = spec.direction;
    if (a.empty()) a.assign(dim, 1.0);
    if (a.size() != dim) throw ConfigError("sigmoid_linear direction has wrong dimension");
    const double k = 0.25 * norm(a);
    return {"sigmoid_linear", [a](std::span<const double> x) { return detail::sigmoid(dot(a, x)); }, k, 1.0};
  }
  throw ConfigError("unknown observable '" + spec.name + "'");
}

}  // namespace umlmc
