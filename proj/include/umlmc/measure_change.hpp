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
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "umlmc/error.hpp"
#include "umlmc/langevin.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/vec.hpp"

namespace umlmc {

inline constexpr double kMaxLogWeight = 700.0;

/// Log of the single-step Radon-Nikodym factor that removes the spring drift s_hat
/// from a step of size h driven by increment dw.
inline double rn_step_log(std::span<const double> dw, std::span<const double> s_hat, double h) {
  return -(kSqrt2 / 2.0) * dot(dw, s_hat) - 0.25 * norm_sq(s_hat) * h;
}

struct SpringConfig {
  double S = 1.0;
  double h = 0.01;
  std::uint64_t N = 0;  ///< coarse steps; the fine path takes 2N
  Point x0;
  bool check_spring = true;  ///< enforce S > lambda/2 against the potential metadata
};

/// Default spring coefficient: max(lambda, 1), or 1 without metadata.
inline double default_spring(const Potential& p) {
  return std::max(p.info().weak_osl_lambda.value_or(1.0), 1.0);
}

inline void validate_spring(const SpringConfig& cfg, const Potential& p) {
  if (!(cfg.S >= 0.0) || !std::isfinite(cfg.S)) throw ParameterError("spring coefficient S must be finite and >= 0");
  if (!(cfg.h > 0.0)) throw ParameterError("spring step h must be positive");
  if (!(cfg.S * cfg.h < 1.0)) throw ParameterError("spring requires S*h < 1");
  if (cfg.x0.size() != p.dim()) throw ParameterError("spring x0 has wrong dimension");
  if (cfg.check_spring && p.info().weak_osl_lambda) {
    const double lam = *p.info().weak_osl_lambda;
    // With lambda = 0 the plain coupling S = 0 is admissible.
    if (lam > 0.0 ? !(cfg.S > lam / 2.0) : false)
      throw ParameterError("spring requires S > lambda/2 (S=" + std::to_string(cfg.S) +
                           ", lambda=" + std::to_string(lam) + ")");
  }
}

/// One level correction drawn under the spring coupling.
struct WeightedLevelSample {
  double delta = 0.0;
  double log_rf = 0.0;
  double log_rc = 0.0;
  std::uint64_t grad_queries = 0;
  Point y_fine;
  Point y_coarse;
  double phi_fine = 0.0;
  double phi_coarse = 0.0;
  double max_sq_distance = 0.0;  ///< max over even indices of |y^f - y^c|^2
};

/// Spring-coupled fine/coarse pair with accumulated log Radon-Nikodym weights.
///
/// Per coarse step the coarse drift and spring are frozen at the even index.
/// The coarse update is evaluated as one double step, which equals the sum of
/// its two half steps and makes S = 0 reproduce simulate_coupled bit for bit.
/// The coarse midpoint is still formed because the fine spring needs it.
inline WeightedLevelSample spring_level_sample(const Potential& p, const Observable& phi, const SpringConfig& cfg,
                                               RngStream& rng) {
  validate_spring(cfg, p);
  const std::size_t d = p.dim();
  const double h = cfg.h;
  const double h2 = 2.0 * h;
  const double S = cfg.S;
  WeightedLevelSample out;
  Point& yf = out.y_fine;
  Point& yc = out.y_coarse;
  yf = cfg.x0;
  yc = cfg.x0;
  Point gf(d), gc(d), dw1(d), dw2(d), dwc(d), sf(d), sc(d), yc_mid(d);
  double lrf = 0.0;
  double lrc = 0.0;
  for (std::uint64_t n = 0; n < cfg.N; ++n) {
    fill_gaussian_increment(rng, h, dw1);
    fill_gaussian_increment(rng, h, dw2);
    p.gradient(yf, gf);
    p.gradient(yc, gc);
    for (std::size_t i = 0; i < d; ++i) {
      sf[i] = S * (yc[i] - yf[i]);
      sc[i] = S * (yf[i] - yc[i]);
    }
    // odd step: both paths
    for (std::size_t i = 0; i < d; ++i) {
      yc_mid[i] = yc[i] + h * sc[i] - h * gc[i] + kSqrt2 * dw1[i];
      yf[i] = yf[i] + h * sf[i] - h * gf[i] + kSqrt2 * dw1[i];
    }
    lrf += rn_step_log(dw1, sf, h);
    check_state(yf, 2 * n + 1, "fine path");
    // even step: fine refreshes spring and drift, coarse keeps both
    for (std::size_t i = 0; i < d; ++i) sf[i] = S * (yc_mid[i] - yf[i]);
    p.gradient(yf, gf);
    for (std::size_t i = 0; i < d; ++i) {
      yf[i] = yf[i] + h * sf[i] - h * gf[i] + kSqrt2 * dw2[i];
      dwc[i] = dw1[i] + dw2[i];
      yc[i] = yc[i] + h2 * sc[i] - h2 * gc[i] + kSqrt2 * dwc[i];
    }
    lrf += rn_step_log(dw2, sf, h);
    lrc += rn_step_log(dwc, sc, h2);
    check_state(yf, 2 * n + 2, "fine path");
    check_state(yc, n + 1, "coarse path");
    if (lrf > kMaxLogWeight || lrc > kMaxLogWeight)
      throw OverflowError("log Radon-Nikodym weight exceeds 700 at fine step " + std::to_string(2 * n + 2));
    out.max_sq_distance = std::max(out.max_sq_distance, dist_sq(yf, yc));
  }
  out.log_rf = lrf;
  out.log_rc = lrc;
  out.phi_fine = phi(yf);
  out.phi_coarse = phi(yc);
  out.delta = out.phi_fine * std::exp(lrf) - out.phi_coarse * std::exp(lrc);
  out.grad_queries = 3 * cfg.N;
  return out;
}

/// Number of coarse steps covering horizon T with coarse step 2h; T/(2h) must be integral.
inline std::uint64_t coarse_steps(double T, double h) {
  const double ratio = T / (2.0 * h);
  const double n = std::round(ratio);
  if (!(h > 0.0) || std::fabs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw ParameterError("horizon T=" + std::to_string(T) + " is not a multiple of 2h=" + std::to_string(2.0 * h));
  return static_cast<std::uint64_t>(n);
}

/// Empirical Var(delta) of the spring sampler at each step size.
inline std::vector<std::pair<double, double>> spring_variance_scan(const Potential& p, const Observable& phi, double S,
                                                                   const std::vector<double>& h_list, double T,
                                                                   std::uint64_t n_pilot, const RngStream& rng,
                                                                   const Point& x0 = {}) {
  if (n_pilot < 2) throw ParameterError("spring_variance_scan needs n_pilot >= 2");
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < h_list.size(); ++k) {
    SpringConfig cfg{S, h_list[k], coarse_steps(T, h_list[k]), x0.empty() ? Point(p.dim(), 0.0) : x0};
    const RngStream base = rng.derive(k);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < n_pilot; ++i) {
      RngStream s = base.derive(i);
      const double v = spring_level_sample(p, phi, cfg, s).delta;
      const double dlt = v - mean;
      mean += dlt / static_cast<double>(i + 1);
      m2 += dlt * (v - mean);
    }
    out.emplace_back(h_list[k], m2 / static_cast<double>(n_pilot - 1));
  }
  return out;
}

}  // namespace umlmc
