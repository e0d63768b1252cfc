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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "umlmc/error.hpp"
#include "umlmc/langevin.hpp"
#include "umlmc/measure_change.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/vec.hpp"

namespace umlmc {

using Jet = std::array<double, 4>;  ///< value and first three derivatives

/// Radial map g(r) = chi(r) r + (1 - chi(r)) psi(r) with psi(r) = r^alpha exp(b r^beta).
struct TransformParams {
  double alpha = 0.0;
  double b = 1.0;
  double beta = 2.0;
  double R1 = 1.0;
  double R2 = 2.0;

  double log_psi(double r) const { return (alpha == 0.0 ? 0.0 : alpha * std::log(r)) + b * std::pow(r, beta); }

  void validate() const {
    if (!(alpha >= 0.0) || !(b >= 0.0)) throw ParameterError("transform needs alpha >= 0 and b >= 0");
    if (alpha == 0.0 && b == 0.0) throw ParameterError("transform needs alpha and b not both zero");
    if (b == 0.0 && alpha < 1.0) throw ParameterError("transform needs alpha >= 1 when b = 0");
    if (!(beta > 1.0 && beta <= 2.0)) throw ParameterError("transform needs beta in (1, 2]");
    if (!(R1 > 0.0) || !(R2 > R1)) throw ParameterError("transform needs 0 < R1 < R2");
    // psi(r) >= r keeps g' > 0 across the blend; checked at R1 and on a grid up to R2.
    for (int k = 0; k <= 200; ++k) {
      const double r = R1 + (R2 - R1) * k / 200.0;
      if (log_psi(r) < std::log(r))
        throw ParameterError("transform needs psi(r) >= r on [R1, R2]; fails at r = " + std::to_string(r));
    }
  }
};

/// Smooth cutoff: 1 on [0, R1], 0 on [R2, inf), degree-7 polynomial between.
inline Jet chi(double r, double R1, double R2) {
  if (r <= R1) return {1.0, 0.0, 0.0, 0.0};
  if (r >= R2) return {0.0, 0.0, 0.0, 0.0};
  const double w = R2 - R1;
  const double t = (r - R1) / w;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  const double p = 1.0 - 35.0 * t4 + 84.0 * t4 * t - 70.0 * t4 * t2 + 20.0 * t4 * t3;
  const double u = 1.0 - t;
  const double p1 = -140.0 * t3 * u * u * u;
  const double p2 = -420.0 * t2 + 1680.0 * t3 - 2100.0 * t4 + 840.0 * t4 * t;
  const double p3 = -840.0 * t + 5040.0 * t2 - 8400.0 * t3 + 4200.0 * t4;
  return {p, p1 / w, p2 / (w * w), p3 / (w * w * w)};
}

/// Logarithmic derivatives of psi: q = (log psi)', q1 = q', q2 = q'', q3 = q'''.
struct TailJet {
  double psi = 0.0;
  double log_psi = 0.0;
  double q = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;

  Jet psi_jet() const { return {psi, psi * q, psi * (q * q + q1), psi * (q * q * q + 3.0 * q * q1 + q2)}; }
};

inline TailJet tail_jet(double r, const TransformParams& p) {
  const double e = p.b * std::pow(r, p.beta);
  if (e > 700.0) throw RangeError("transform overflow: b r^beta = " + std::to_string(e) + " exceeds 700");
  const double a = p.alpha, bb = p.b * p.beta, be = p.beta;
  TailJet j;
  j.log_psi = p.log_psi(r);
  j.psi = std::exp(j.log_psi);
  j.q = a / r + bb * std::pow(r, be - 1.0);
  j.q1 = -a / (r * r) + bb * (be - 1.0) * std::pow(r, be - 2.0);
  j.q2 = 2.0 * a / (r * r * r) + bb * (be - 1.0) * (be - 2.0) * std::pow(r, be - 3.0);
  j.q3 = -6.0 * a / (r * r * r * r) + bb * (be - 1.0) * (be - 2.0) * (be - 3.0) * std::pow(r, be - 4.0);
  return j;
}

/// g and its first three derivatives at r >= 0.
inline Jet g_jet(double r, const TransformParams& p) {
  if (r <= p.R1) return {r, 1.0, 0.0, 0.0};
  const Jet s = tail_jet(r, p).psi_jet();
  if (r >= p.R2) return s;
  const Jet c = chi(r, p.R1, p.R2);
  const double d = r - s[0];
  return {s[0] + c[0] * d, c[0] + (1.0 - c[0]) * s[1] + c[1] * d,
          c[2] * d + 2.0 * c[1] * (1.0 - s[1]) + (1.0 - c[0]) * s[2],
          c[3] * d + 3.0 * c[2] * (1.0 - s[1]) - 3.0 * c[1] * s[2] + (1.0 - c[0]) * s[3]};
}

inline double g_eval(double r, const TransformParams& p) {
  if (!(r >= 0.0)) throw DomainError("g needs r >= 0");
  return g_jet(r, p)[0];
}

inline double g_deriv(double r, const TransformParams& p, int order) {
  if (!(r >= 0.0)) throw DomainError("g needs r >= 0");
  if (order < 1 || order > 3) throw ParameterError("g_deriv order must be 1, 2 or 3");
  return g_jet(r, p)[order];
}

/// log g(r), finite in the tail even where g itself would overflow.
inline double log_g(double r, const TransformParams& p) {
  if (r >= p.R2) return p.log_psi(r);
  return std::log(g_eval(r, p));
}

/// Inverse of the strictly increasing g, by bisection on log g.
inline double g_inverse(double s, const TransformParams& p) {
  if (!(s >= 0.0)) throw DomainError("g_inverse needs s >= 0");
  if (s <= p.R1) return s;
  const double target = std::log(s);
  double lo = p.R1, hi = 2.0 * p.R1;
  while (log_g(hi, p) < target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 4000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (log_g(mid, p) < target ? lo : hi) = mid;
  }
  return std::fabs(g_eval(lo, p) - s) <= std::fabs(g_eval(hi, p) - s) ? lo : hi;
}

/// h(x) = g(|x|) x / |x|; identity (returns x itself) for |x| <= R1.
inline Point h_map(std::span<const double> x, const TransformParams& p) {
  Point y(x.begin(), x.end());
  const double r = norm(x);
  if (r <= p.R1) return y;
  const double k = g_eval(r, p) / r;
  for (double& v : y) v *= k;
  return y;
}

inline Point h_inverse(std::span<const double> y, const TransformParams& p) {
  Point x(y.begin(), y.end());
  const double s = norm(y);
  if (s <= p.R1) return x;
  const double k = g_inverse(s, p) / s;
  for (double& v : x) v *= k;
  return x;
}

/// First three derivatives of u(r) = f_h along a ray.
struct RadialDerivs {
  double u1 = 0.0, u2 = 0.0, u3 = std::numeric_limits<double>::quiet_NaN();
};

/// Per-radius values of the transformed-assumption expressions.
struct ScanRow {
  double r = 0.0;
  double smooth_radial = 0.0;      ///< u''
  double smooth_tangential = 0.0;  ///< u' / r
  double dissipativity = 0.0;      ///< r u'
  double third = 0.0;              ///< u'''
  double mixed = 0.0;              ///< u''/r - u'/r^2
  std::optional<std::array<double, 5>> special;  ///< same five via the alpha = 0, beta = 2 forms
};

struct ScanReport {
  std::vector<ScanRow> rows;
  double max_smooth = -std::numeric_limits<double>::infinity();
  double min_dissipative_margin = std::numeric_limits<double>::infinity();  ///< min of r u' - (A r^2 - B)
  double max_third = -std::numeric_limits<double>::infinity();
  double max_abs_mixed = 0.0;
  bool smooth_ok = true;
  bool dissipative_ok = true;
  bool hessian_ok = true;
};

/// Potential f_h(x) = f(h(x)) - log det Dh(x) for an isotropic base f.
class TransformedPotential {
 public:
  TransformedPotential(Potential base, TransformParams params, std::uint64_t check_seed = 0x150)
      : base_(std::move(base)), params_(params) {
    params_.validate();
    check_isotropy(check_seed);
  }

  const Potential& base() const { return base_; }
  const TransformParams& params() const { return params_; }
  std::size_t dim() const { return base_.dim(); }

  /// Radial profile (F, F', F'', F''') of the base at radius s.
  Jet profile(double s) const {
    if (base_.has_radial_profile()) return base_.radial()(s);
    return fd_profile(s);
  }

  double value(std::span<const double> x) const {
    const double r = norm(x);
    if (r < params_.R1) return base_.value(x);
    const double dm1 = static_cast<double>(dim()) - 1.0;
    if (r >= params_.R2) {
      const TailJet t = tail_jet(r, params_);
      return profile(t.psi)[0] - (t.log_psi + std::log(t.q)) - dm1 * t.log_psi + dm1 * std::log(r);
    }
    const Jet g = g_jet(r, params_);
    return profile(g[0])[0] - std::log(g[1]) - dm1 * std::log(g[0]) + dm1 * std::log(r);
  }

  void gradient(std::span<const double> x, std::span<double> out) const {
    const double r = norm(x);
    if (r < params_.R1) {
      base_.gradient(x, out);
      return;
    }
    const double k = radial(r).u1 / r;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = k * x[i];
  }

  Point gradient(std::span<const double> x) const {
    Point g(dim());
    gradient(x, g);
    return g;
  }

  /// u', u'' everywhere r > 0; u''' only in the tail r >= R2.
  RadialDerivs radial(double r) const {
    if (!(r > 0.0)) throw DomainError("radial derivatives need r > 0");
    const double dm1 = static_cast<double>(dim()) - 1.0;
    if (r < params_.R1) {
      const Jet f = profile(r);
      return {f[1], f[2], f[3]};
    }
    if (r >= params_.R2) {
      const TailJet t = tail_jet(r, params_);
      const Jet f = profile(t.psi);
      // scaled jets psi^k F^(k)(psi), multiplied stepwise to avoid overflow
      const double A1 = t.psi * f[1];
      const double A2 = t.psi * (t.psi * f[2]);
      const double A3 = t.psi * (t.psi * (t.psi * f[3]));
      const double q = t.q, q1 = t.q1, q2 = t.q2, q3 = t.q3;
      const double w1 = q1 / q;
      const double w2 = q2 / q - w1 * w1;
      const double w3 = q3 / q - 3.0 * q1 * q2 / (q * q) + 2.0 * w1 * w1 * w1;
      const double d = dm1 + 1.0;
      RadialDerivs u;
      u.u1 = q * A1 - d * q - w1 + dm1 / r;
      u.u2 = q * q * A2 + (q * q + q1) * A1 - (q1 + w2) - dm1 * q1 - dm1 / (r * r);
      u.u3 = q * q * q * A3 + 3.0 * q * (q * q + q1) * A2 + (q * q * q + 3.0 * q * q1 + q2) * A1 - (q2 + w3) -
             dm1 * q2 + 2.0 * dm1 / (r * r * r);
      return u;
    }
    const Jet g = g_jet(r, params_);
    const Jet f = profile(g[0]);
    const double a = g[2] / g[1];
    const double c = g[1] / g[0];
    RadialDerivs u;
    u.u1 = g[1] * f[1] - a - dm1 * c + dm1 / r;
    u.u2 = g[2] * f[1] + g[1] * g[1] * f[2] - (g[3] / g[1] - a * a) - dm1 * (g[2] / g[0] - c * c) - dm1 / (r * r);
    return u;
  }

  /// Hessian eigenvalues at radius r: radial (multiplicity 1) and tangential (d - 1).
  std::pair<double, double> hessian_eigs(double r) const {
    const RadialDerivs u = radial(r);
    return {u.u2, u.u1 / r};
  }

  /// The transformed potential as a plain Potential (for samplers and counting).
  Potential as_potential() const {
    const TransformedPotential self = *this;
    return Potential(
        "transformed_" + base_.name(), dim(), [self](std::span<const double> x) { return self.value(x); },
        [self](std::span<const double> x, std::span<double> g) { self.gradient(x, g); });
  }

  /// Evaluates the tail assumption expressions on r_grid against candidates (L, A, B).
  ScanReport assumption_scan(const std::vector<double>& r_grid, double L, double A, double B) const {
    ScanReport rep;
    const bool special = params_.alpha == 0.0 && params_.beta == 2.0;
    const double d = static_cast<double>(dim());
    for (double r : r_grid) {
      if (!(r > params_.R2)) throw DomainError("assumption scan grid point r = " + std::to_string(r) + " is not in the tail r > R2");
      const RadialDerivs u = radial(r);
      ScanRow row{r, u.u2, u.u1 / r, r * u.u1, u.u3, u.u2 / r - u.u1 / (r * r), std::nullopt};
      if (special) {
        const double b = params_.b;
        const TailJet t = tail_jet(r, params_);
        const Jet f = profile(t.psi);
        const double A1 = t.psi * f[1], A2 = t.psi * (t.psi * f[2]), A3 = t.psi * (t.psi * (t.psi * f[3]));
        const double r2 = r * r, r3 = r2 * r, b2 = b * b, b3 = b2 * b;
        row.special = std::array<double, 5>{
            4.0 * b2 * r2 * A2 + (2.0 * b + 4.0 * b2 * r2) * A1 - 2.0 * b * d - (d - 2.0) / r2,
            2.0 * b * A1 - 2.0 * b * d + (d - 2.0) / r2,
            2.0 * b * r2 * A1 - 2.0 * b * d * r2 + (d - 2.0),
            (12.0 * b2 * r + 8.0 * b3 * r3) * A1 + (12.0 * b2 * r + 24.0 * b3 * r3) * A2 + 8.0 * b3 * r3 * A3 +
                2.0 * (d - 2.0) / r3,
            4.0 * b2 * r * A1 + 4.0 * b2 * r * A2 - 2.0 * (d - 2.0) / r3};
      }
      rep.max_smooth = std::max({rep.max_smooth, row.smooth_radial, row.smooth_tangential});
      rep.min_dissipative_margin = std::min(rep.min_dissipative_margin, row.dissipativity - (A * r * r - B));
      rep.max_third = std::max(rep.max_third, row.third);
      rep.max_abs_mixed = std::max(rep.max_abs_mixed, std::fabs(row.mixed));
      rep.rows.push_back(row);
    }
    rep.smooth_ok = rep.max_smooth < L;
    rep.dissipative_ok = rep.min_dissipative_margin > 0.0;
    rep.hessian_ok = rep.max_third <= L && rep.max_abs_mixed <= L;
    return rep;
  }

 private:
  double radial_value(double s) const {
    Point e(dim(), 0.0);
    e[0] = s;
    return base_.value(e);
  }

  // Central differences on the 1-D profile for bases without analytic radial derivatives.
  Jet fd_profile(double s) const {
    const double h = 1e-3 * std::max(1.0, s);
    const double fm2 = radial_value(std::fabs(s - 2 * h)), fm = radial_value(std::fabs(s - h));
    const double f0 = radial_value(s), fp = radial_value(s + h), fp2 = radial_value(s + 2 * h);
    return {f0, (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * h),
            (-fp2 + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fm2) / (12.0 * h * h),
            (fp2 - 2.0 * fp + 2.0 * fm - fm2) / (2.0 * h * h * h)};
  }

  void check_isotropy(std::uint64_t seed) const {
    RngStream rng(seed, 0);
    for (int k = 0; k < 32; ++k) {
      Point x(dim());
      for (double& v : x) v = 2.0 * rng.normal();
      const double fx = base_.value(x);
      const double fr = radial_value(norm(x));
      if (std::fabs(fx - fr) > 1e-10 * std::max(1.0, std::fabs(fx)))
        throw IsotropyError("potential '" + base_.name() + "' is not isotropic");
    }
  }

  Potential base_;
  TransformParams params_;
};

struct TransformedDraw {
  Point x;
  std::uint64_t grad_queries = 0;
};

/// ULA on f_h for N steps from y0, mapped back through h.
inline TransformedDraw transformed_langevin_sample(const TransformedPotential& tp, double h, std::uint64_t N,
                                                   const Point& y0, RngStream& rng) {
  const Potential fh = tp.as_potential();
  Point y = y0;
  const std::uint64_t q = advance_path(fh, y, h, N, rng);
  return {h_map(y, tp.params()), q};
}

struct WeightedTransformedDraw {
  Point x;
  double weight = 1.0;  ///< Radon-Nikodym weight exp(log_rf) of the fine path
  std::uint64_t grad_queries = 0;
};

/// Spring-coupled sampler on f_h; returns h(fine endpoint) and its reweighting factor.
inline WeightedTransformedDraw transformed_spring_sample(const TransformedPotential& tp, double S, double h,
                                                         std::uint64_t N, const Point& y0, RngStream& rng) {
  const Potential fh = tp.as_potential();
  const Observable none{"none", [](std::span<const double>) { return 0.0; }, 0.0, 0.0};
  const WeightedLevelSample w = spring_level_sample(fh, none, {S, h, N, y0, false}, rng);
  return {h_map(w.y_fine, tp.params()), std::exp(w.log_rf), w.grad_queries};
}

}  // namespace umlmc
