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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "umlmc/error.hpp"
#include "umlmc/parallel.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/stats.hpp"

namespace umlmc {

struct LevelDraw {
  double value = 0.0;
  std::uint64_t grad_queries = 0;
};

/// Level 0 draws P_0; level l >= 1 draws one coupled realization of P_l - P_{l-1}.
struct LevelSampler {
  std::function<LevelDraw(int, RngStream&)> sample;
  std::optional<int> max_level_hint;
};

struct LevelStat {
  int level = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_cost = 0.0;
  std::uint64_t n_used = 0;
};

using LevelStats = std::vector<LevelStat>;

struct RateFit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double r2_alpha = 0.0;
  double r2_beta = 0.0;
  double r2_gamma = 0.0;
  double log2_mean_intercept = 0.0;  ///< |mean_l| ~ 2^{intercept - alpha l}
  double log2_var_intercept = 0.0;
  double log2_cost_intercept = 0.0;
};

struct LevelReport {
  int level = 0;
  std::uint64_t n = 0;      ///< samples drawn (0 when only a budget was assigned)
  double sigma_hat = 0.0;   ///< per-level accuracy in the quantum model
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t queries = 0;
  double quantum_queries = 0.0;
};

struct CostReport {
  double estimate = 0.0;
  double est_variance = 0.0;
  std::uint64_t classical_queries = 0;
  double quantum_model_queries = 0.0;
  std::vector<LevelReport> per_level;
};

/// Stream of draw i at level l, disjoint across (l, i).
inline RngStream level_stream(const RngStream& base, int level, std::uint64_t i) {
  return base.derive(static_cast<std::uint64_t>(level)).derive(i);
}

namespace detail {

inline std::vector<LevelDraw> draw_level(const LevelSampler& sampler, int level, std::uint64_t n, const RngStream& base,
                                         unsigned threads) {
  return parallel_map(n, threads, [&](std::size_t i) {
    RngStream s = level_stream(base, level, i);
    try {
      return sampler.sample(level, s);
    } catch (Error& e) {
      e.add_context("level " + std::to_string(level) + ", sample " + std::to_string(i));
      throw;
    }
  });
}

}  // namespace detail

/// Standard multilevel estimator: sum over levels of per-level sample means.
inline CostReport mlmc_estimate(const LevelSampler& sampler, const std::vector<std::uint64_t>& n_per_level,
                                const RngStream& rng, unsigned threads = 1) {
  if (n_per_level.empty()) throw ParameterError("mlmc_estimate needs at least one level");
  CostReport rep;
  for (std::size_t l = 0; l < n_per_level.size(); ++l) {
    if (n_per_level[l] < 1) throw ParameterError("every level needs at least one sample");
    const auto draws = detail::draw_level(sampler, static_cast<int>(l), n_per_level[l], rng, threads);
    Welford w;
    std::uint64_t q = 0;
    for (const auto& d : draws) {
      w.add(d.value);
      q += d.grad_queries;
    }
    LevelReport lr;
    lr.level = static_cast<int>(l);
    lr.n = n_per_level[l];
    lr.mean = w.mean();
    lr.variance = w.variance();
    lr.queries = q;
    rep.estimate += w.mean();
    rep.est_variance += w.variance() / static_cast<double>(n_per_level[l]);
    rep.classical_queries += q;
    rep.per_level.push_back(lr);
  }
  return rep;
}

/// Pilot statistics for levels [first, last] from n_pilot draws each.
inline LevelStats estimate_level_stats(const LevelSampler& sampler, int first, int last, std::uint64_t n_pilot,
                                       const RngStream& rng, unsigned threads = 1) {
  if (n_pilot < 2) throw ParameterError("pilot needs n_pilot >= 2");
  if (first < 0 || last < first) throw ParameterError("invalid pilot level range");
  LevelStats stats;
  for (int l = first; l <= last; ++l) {
    const auto draws = detail::draw_level(sampler, l, n_pilot, rng, threads);
    Welford w;
    double cost = 0.0;
    for (const auto& d : draws) {
      w.add(d.value);
      cost += static_cast<double>(d.grad_queries);
    }
    stats.push_back({l, w.mean(), w.variance(), cost / static_cast<double>(n_pilot), n_pilot});
  }
  return stats;
}

/// Regression of log2 |mean|, log2 variance and log2 cost against level.
/// alpha is NaN if a level mean is exactly zero.
inline RateFit fit_rates(const LevelStats& stats, int first, int last) {
  std::vector<double> ls, lm, lv, lc;
  for (const auto& s : stats) {
    if (s.level < first || s.level > last) continue;
    if (!(s.variance > 0.0)) throw FitError("nonpositive variance at level " + std::to_string(s.level));
    if (!(s.mean_cost > 0.0)) throw FitError("zero cost at level " + std::to_string(s.level));
    ls.push_back(s.level);
    lm.push_back(std::log2(std::fabs(s.mean)));
    lv.push_back(std::log2(s.variance));
    lc.push_back(std::log2(s.mean_cost));
  }
  if (ls.size() < 3) throw FitError("rate fit needs at least three levels in range");
  const LineFit fv = least_squares(ls, lv);
  const LineFit fc = least_squares(ls, lc);
  RateFit f{NAN, -fv.slope, fc.slope, NAN, fv.r2, fc.r2, NAN, fv.intercept, fc.intercept};
  // alpha is undefined when some level mean is exactly zero
  if (std::all_of(lm.begin(), lm.end(), [](double v) { return std::isfinite(v); })) {
    const LineFit fm = least_squares(ls, lm);
    f.alpha = -fm.slope;
    f.r2_alpha = fm.r2;
    f.log2_mean_intercept = fm.intercept;
  }
  return f;
}

/// Bias constant K1 with |E[P_L - P]| <= K1 2^{-alpha L}, from the geometric tail
/// of the fitted level means.
inline double bias_constant(const RateFit& fit) {
  if (!(fit.alpha > 0.0)) throw FitError("bias constant needs alpha > 0");
  return std::exp2(fit.log2_mean_intercept) / (std::exp2(fit.alpha) - 1.0);
}

/// K1 for a prescribed decay rate alpha: a fixed-slope fit of log2 of the upper
/// bounds |mean_l| + 2 stderr_l over [first, last]. Stays finite when the level
/// means vanish.
inline double bias_constant_fixed_rate(const LevelStats& stats, int first, int last, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("bias constant needs alpha > 0");
  double sum = 0.0;
  int k = 0;
  for (const auto& s : stats) {
    if (s.level < first || s.level > last || s.n_used < 2) continue;
    const double ub = std::fabs(s.mean) + 2.0 * std::sqrt(s.variance / static_cast<double>(s.n_used));
    if (!(ub > 0.0)) continue;
    sum += std::log2(ub) + alpha * s.level;
    ++k;
  }
  if (k == 0) return 0.0;  // every level is exactly zero: no bias to control
  return std::exp2(sum / k) / (std::exp2(alpha) - 1.0);
}

/// Smallest L >= 0 with K1 2^{-alpha L} <= tol.
inline int levels_for_bias(double K1, double alpha, double tol) {
  if (!(alpha > 0.0) || !(tol > 0.0)) throw ParameterError("levels_for_bias needs alpha > 0 and tol > 0");
  if (K1 <= tol) return 0;
  return static_cast<int>(std::ceil(std::log2(K1 / tol) / alpha - 1e-12));
}

/// Pilot statistics extended to levels 0..L: measured where available,
/// otherwise extrapolated from the last measured level with rates beta, gamma.
inline LevelStats extend_stats(const LevelStats& stats, int L, double beta, double gamma) {
  if (stats.empty()) throw ParameterError("cannot extend empty statistics");
  LevelStats out;
  const LevelStat& last = stats.back();
  for (int l = 0; l <= L; ++l) {
    auto it = std::find_if(stats.begin(), stats.end(), [l](const LevelStat& s) { return s.level == l; });
    if (it != stats.end()) {
      out.push_back(*it);
    } else {
      LevelStat s = last;
      s.level = l;
      s.variance = last.variance * std::exp2(-beta * (l - last.level));
      s.mean_cost = last.mean_cost * std::exp2(gamma * (l - last.level));
      s.mean = last.mean * std::exp2(-beta / 2.0 * (l - last.level));
      s.n_used = 0;
      out.push_back(s);
    }
  }
  return out;
}

/// Sample counts minimizing cost subject to sum V_l / N_l <= eps^2 / 2.
inline std::vector<std::uint64_t> allocate_classical(const LevelStats& stats, double eps) {
  if (!(eps > 0.0)) throw ParameterError("allocate_classical needs eps > 0");
  if (stats.empty()) throw ParameterError("allocate_classical needs at least one level");
  double sum = 0.0;
  for (const auto& s : stats) {
    if (s.variance > 0.0) {
      if (!(s.mean_cost > 0.0)) throw ParameterError("level with positive variance has zero cost");
      sum += std::sqrt(s.variance * s.mean_cost);
    }
  }
  std::vector<std::uint64_t> n(stats.size(), 1);
  if (sum == 0.0) return n;
  const double mu = 2.0 / (eps * eps) * sum;
  for (std::size_t l = 0; l < stats.size(); ++l) {
    const auto& s = stats[l];
    if (s.variance > 0.0)
      n[l] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(mu * std::sqrt(s.variance / s.mean_cost))));
  }
  return n;
}

/// Expected classical cost sum N_l C_l of an allocation.
inline double classical_cost(const LevelStats& stats, const std::vector<std::uint64_t>& n) {
  double c = 0.0;
  for (std::size_t l = 0; l < stats.size(); ++l) c += static_cast<double>(n[l]) * stats[l].mean_cost;
  return c;
}

enum class Regime { kVarianceDominated, kBalanced, kCostDominated };

struct QuantumAllocation {
  int L = 0;
  Regime regime = Regime::kBalanced;
  std::vector<double> sigma_per_level;
  std::vector<double> queries_per_level;
  double quantum_model_queries = 0.0;
};

/// Per-level accuracy budget of the quantum-accelerated estimator. The
/// polynomial prefactor in the L rule and all log factors are set to 1.
inline QuantumAllocation allocate_quantum_model(double K1, double alpha, double beta, double gamma,
                                                const LevelStats& stats, double sigma_hat, std::size_t r) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) throw ParameterError("quantum model needs positive rates");
  if (!(sigma_hat > 0.0)) throw ParameterError("quantum model needs sigma_hat > 0");
  QuantumAllocation qa;
  qa.L = levels_for_bias(K1, alpha, sigma_hat / std::sqrt(2.0));
  const int L = qa.L;
  const double gap = beta / 2.0 - gamma;
  const double tol = 1e-12 * std::max(1.0, std::fabs(beta));
  qa.regime = std::fabs(beta - 2.0 * gamma) <= tol ? Regime::kBalanced
              : gap > 0.0                          ? Regime::kVarianceDominated
                                                   : Regime::kCostDominated;
  for (int l = 0; l <= L; ++l) {
    double s = 0.0;
    switch (qa.regime) {
      case Regime::kVarianceDominated:
        s = sigma_hat / 2.0 * (1.0 - std::exp2(-gap / 2.0)) * std::exp2(-gap * l / 2.0);
        break;
      case Regime::kBalanced:
        s = sigma_hat / (2.0 * (L + 1));
        break;
      case Regime::kCostDominated:
        // Exponent L + 1 keeps the geometric sum below sigma_hat / 2.
        s = sigma_hat / 2.0 * std::exp2(gap * (L + 1) / 2.0) * (std::exp2(-gap / 2.0) - 1.0) *
            std::exp2(-gap * l / 2.0);
        break;
    }
    qa.sigma_per_level.push_back(s);
  }
  if (!stats.empty()) {
    const LevelStats ext = extend_stats(stats, L, beta, gamma);
    const double rt = std::sqrt(static_cast<double>(r));
    for (int l = 0; l <= L; ++l) {
      const double q = rt * std::sqrt(ext[l].variance) / qa.sigma_per_level[l] * ext[l].mean_cost;
      qa.queries_per_level.push_back(q);
      qa.quantum_model_queries += q;
    }
  }
  return qa;
}

}  // namespace umlmc
