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
#include <numbers>
#include <string>
#include <vector>

#include "umlmc/error.hpp"
#include "umlmc/langevin.hpp"
#include "umlmc/measure_change.hpp"
#include "umlmc/mlmc.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/stats.hpp"

namespace umlmc {

struct ProcResult {
  double value = 0.0;
  std::uint64_t queries = 0;
};

/// A family of estimators A(sigma) with mean squared error at most sigma^2.
using BiasedProcedure = std::function<ProcResult(double, RngStream&)>;

struct GeomDebiasConfig {
  double rho = 0.75;
  double M = 8.0;
  double sigma_tilde = 0.1;
  int j_cap = 64;
  double p = 1.0;  ///< cost exponent; rho must lie in (1/2, 1/p)

  void validate() const {
    if (!(rho > 0.5 && rho < 1.0 / p)) throw ParameterError("debias rho must lie in (1/2, 1/p)");
    const double bound = 2.0 + 16.0 / (1.0 - std::exp2(1.0 - 2.0 * rho));
    if (!(M * M > bound)) throw ParameterError("debias requires M^2 > " + std::to_string(bound));
    if (!(sigma_tilde > 0.0)) throw ParameterError("debias sigma_tilde must be positive");
    if (j_cap < 1) throw ParameterError("debias j_cap must be >= 1");
  }
};

struct DebiasDraw {
  double value = 0.0;
  std::uint64_t queries = 0;
  int j = 0;
};

/// Removes the residual bias of a converging procedure family: returns
/// A_0 + 2^j (A_j - A_{j-1}) with j ~ Geom(1/2) and A_k run at accuracy
/// 2^{-rho k} sigma_tilde / M. The three calls use independent streams.
inline DebiasDraw geom_debias(const BiasedProcedure& proc, const GeomDebiasConfig& cfg, const RngStream& rng) {
  cfg.validate();
  RngStream js = rng.derive(0);
  const int j = geometric_half(js, cfg.j_cap);
  const double base = cfg.sigma_tilde / cfg.M;
  RngStream s0 = rng.derive(1), sj = rng.derive(2), sj1 = rng.derive(3);
  const ProcResult a0 = proc(base, s0);
  const ProcResult aj = proc(base * std::exp2(-cfg.rho * j), sj);
  const ProcResult aj1 = proc(base * std::exp2(-cfg.rho * (j - 1)), sj1);
  return {a0.value + std::exp2(j) * (aj.value - aj1.value), a0.queries + aj.queries + aj1.queries, j};
}

/// Affine horizons T_l = T0 + slope l, snapped up to the h0 grid so that all
/// horizons are integer multiples of h0.
struct TimeSchedule {
  double T0 = 4.0;
  double slope = 4.0 * std::numbers::ln2;
  double h0 = 0.05;

  /// Slope 4 ln2 / m makes the contraction factor exp(-m T_{l-1}/2) shrink like h_l^2.
  static TimeSchedule from_contraction(double T0, double m_hat, double h0) {
    if (!(m_hat > 0.0)) throw ParameterError("contraction estimate must be positive");
    return {T0, 4.0 * std::numbers::ln2 / m_hat, h0};
  }

  void validate() const {
    if (!(T0 > 0.0) || !(slope >= 0.0) || !(h0 > 0.0)) throw ParameterError("schedule needs T0 > 0, slope >= 0, h0 > 0");
  }

  /// Number of base steps h0 in the snapped horizon T_l.
  std::uint64_t grid_steps(int level) const {
    return static_cast<std::uint64_t>(std::ceil((T0 + slope * level) / h0 - 1e-9));
  }

  double horizon(int level) const { return static_cast<double>(grid_steps(level)) * h0; }
};

inline void require_osl(const Potential& p) {
  if (!p.info().osl_m) throw RegimeError("potential '" + p.name() + "' has no one-sided Lipschitz constant");
}

/// Level-l draw of the time-shifted estimator: the fine path first runs alone
/// over T_l - T_{l-1}, then fine (step h_l) and coarse (step 2 h_l, from x0)
/// run coupled over T_{l-1}.
inline LevelDraw unbiased_level_sample_osl(const Potential& p, const Observable& phi, int level, double h0,
                                           const TimeSchedule& sched, RngStream& rng, const Point& x0 = {}) {
  require_osl(p);
  const Point start = x0.empty() ? Point(p.dim(), 0.0) : x0;
  if (level == 0) {
    const PathResult r = simulate_path(p, {h0, sched.grid_steps(0), start}, rng);
    return {phi(r.x), r.grad_queries};
  }
  const double h = h0 * std::exp2(-level);
  const std::uint64_t scale = std::uint64_t{1} << level;
  const std::uint64_t n_pre = (sched.grid_steps(level) - sched.grid_steps(level - 1)) * scale;
  const std::uint64_t n_coupled = sched.grid_steps(level - 1) * (scale / 2);
  Point fine = start;
  const std::uint64_t q = advance_path(p, fine, h, n_pre, rng);
  const CoupledEndpoints e = simulate_coupled(p, h, n_coupled, fine, start, rng);
  return {phi(e.x_fine) - phi(e.x_coarse), q + e.grad_queries};
}

inline LevelSampler make_osl_sampler(const Potential& p, const Observable& phi, double h0, const TimeSchedule& sched,
                                     const Point& x0 = {}) {
  require_osl(p);
  sched.validate();
  return {[p, phi, h0, sched, x0](int level, RngStream& rng) {
            return unbiased_level_sample_osl(p, phi, level, h0, sched, rng, x0);
          },
          std::nullopt};
}

/// Spring-coupled level sampler over n0 base steps of h0. Level 0 is a plain
/// path; level l >= 1 couples steps h0 2^{-l} and h0 2^{1-l}.
inline LevelSampler make_spring_sampler(const Potential& p, const Observable& phi, double S, double h0,
                                        std::uint64_t n0, const Point& x0 = {}, bool check_spring = true) {
  if (n0 < 1) throw ParameterError("spring sampler needs at least one base step");
  const Point start = x0.empty() ? Point(p.dim(), 0.0) : x0;
  return {[p, phi, S, h0, start, n0, check_spring](int level, RngStream& rng) -> LevelDraw {
            if (level == 0) {
              const PathResult r = simulate_path(p, {h0, n0, start}, rng);
              return {phi(r.x), r.grad_queries};
            }
            const SpringConfig cfg{S, h0 * std::exp2(-level), n0 << (level - 1), start, check_spring};
            const WeightedLevelSample w = spring_level_sample(p, phi, cfg, rng);
            return {w.delta, w.grad_queries};
          },
          std::nullopt};
}

enum class GibbsMethod { kOsl, kDissipative };

struct GibbsConfig {
  double sigma_tilde = 0.02;  ///< target standard deviation of the final estimate
  GeomDebiasConfig debias;    ///< rho, M and j_cap; its sigma_tilde is overwritten
  Point x0;
  unsigned threads = 1;

  // one-sided Lipschitz method
  double h0 = 0.05;
  TimeSchedule schedule;
  std::uint64_t n_pilot = 100;
  std::uint64_t min_draws = 2;

  // dissipative method
  double S = -1.0;  ///< negative selects max(lambda, 1)
  double T_base = 2.0;
  double c_T = 1.0;
  double diss_h0 = 0.1;
  int pilot_levels = 3;
  std::uint64_t diss_n_pilot = 200;
  double weak_alpha = 1.0;  ///< decay rate of the level means
  int max_level = 12;
  std::uint64_t n_draws = 2;  ///< independent debiased draws averaged; 2 or more gives an empirical variance
};

namespace detail {

inline constexpr std::uint64_t kPilotTag = 0x9170'7000ull;
inline constexpr std::uint64_t kProductionTag = 0x960D'0000ull;

struct TermDraw {
  double value = 0.0;
  std::uint64_t queries = 0;
  int j = 0;
};

// Y = D_0 + 2^j D_j with j ~ Geom(1/2) is unbiased for the whole telescoping sum.
inline TermDraw single_term_draw(const LevelSampler& sampler, const RngStream& s, int j_cap) {
  RngStream js = s.derive(0);
  const int j = geometric_half(js, j_cap);
  RngStream s0 = s.derive(1), sj = s.derive(2);
  const LevelDraw d0 = sampler.sample(0, s0);
  const LevelDraw dj = sampler.sample(j, sj);
  return {d0.value + std::exp2(j) * dj.value, d0.grad_queries + dj.grad_queries, j};
}

template <class Fn>
std::vector<TermDraw> run_draws(std::uint64_t n, unsigned threads, const RngStream& base, Fn&& fn) {
  return parallel_map(n, threads, [&](std::size_t i) {
    try {
      return fn(base.derive(i));
    } catch (Error& e) {
      e.add_context("estimator draw " + std::to_string(i));
      throw;
    }
  });
}

inline void add_by_j(std::vector<LevelReport>& rows, const TermDraw& d) {
  while (rows.size() <= static_cast<std::size_t>(d.j)) {
    LevelReport r;
    r.level = static_cast<int>(rows.size());
    rows.push_back(r);
  }
  rows[d.j].n += 1;
  rows[d.j].queries += d.queries;
}

inline CostReport summarize_draws(const std::vector<TermDraw>& draws, std::uint64_t extra_queries) {
  CostReport rep;
  Welford w;
  for (const auto& d : draws) {
    w.add(d.value);
    rep.classical_queries += d.queries;
    add_by_j(rep.per_level, d);
  }
  rep.classical_queries += extra_queries;
  rep.estimate = w.mean();
  rep.est_variance = draws.size() > 1 ? w.variance() / static_cast<double>(draws.size()) : 0.0;
  return rep;
}

inline CostReport osl_estimate(const Potential& p, const Observable& phi, const GibbsConfig& cfg,
                               const RngStream& rng) {
  const LevelSampler sampler = make_osl_sampler(p, phi, cfg.h0, cfg.schedule, cfg.x0);
  auto draw = [&](const RngStream& s) { return single_term_draw(sampler, s, cfg.debias.j_cap); };
  const auto pilot = run_draws(cfg.n_pilot, cfg.threads, rng.derive(kPilotTag), draw);
  Welford pw;
  std::uint64_t pilot_q = 0;
  for (const auto& d : pilot) {
    pw.add(d.value);
    pilot_q += d.queries;
  }
  const double target = cfg.sigma_tilde * cfg.sigma_tilde;
  const auto n = std::max<std::uint64_t>(cfg.min_draws, static_cast<std::uint64_t>(std::ceil(pw.variance() / target)));
  const auto prod = run_draws(n, cfg.threads, rng.derive(kProductionTag), draw);
  return summarize_draws(prod, pilot_q);
}

inline std::uint64_t horizon_steps(double T, double h0) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(T / h0 - 1e-9)));
}

inline CostReport dissipative_estimate(const Potential& p, const Observable& phi, const GibbsConfig& cfg,
                                       const RngStream& rng) {
  if (!p.info().dissipative) throw RegimeError("potential '" + p.name() + "' has no dissipativity constants");
  if (cfg.pilot_levels < 1) throw ParameterError("dissipative pilot needs at least one coupled level");
  if (!(cfg.diss_h0 > 0.0) || !(cfg.c_T >= 0.0) || cfg.n_draws < 1) throw ParameterError("invalid dissipative settings");
  const double S = cfg.S < 0.0 ? default_spring(p) : cfg.S;
  GeomDebiasConfig dc = cfg.debias;
  dc.sigma_tilde = cfg.sigma_tilde * std::sqrt(static_cast<double>(cfg.n_draws));
  dc.validate();
  auto steps_for = [&](double sigma) { return horizon_steps(cfg.T_base + cfg.c_T * std::log(1.0 / sigma), cfg.diss_h0); };

  // Pilot at the coarsest accuracy used by any call; rates are reused for all calls.
  const LevelSampler ref = make_spring_sampler(p, phi, S, cfg.diss_h0, steps_for(dc.sigma_tilde / dc.M), cfg.x0);
  const LevelStats stats = estimate_level_stats(ref, 0, cfg.pilot_levels, cfg.diss_n_pilot, rng.derive(kPilotTag),
                                                cfg.threads);
  std::uint64_t pilot_q = 0;
  for (const auto& s : stats) pilot_q += static_cast<std::uint64_t>(std::llround(s.mean_cost * s.n_used));
  double beta = 2.0;
  if (cfg.pilot_levels >= 3) {
    try {
      beta = std::clamp(fit_rates(stats, 1, cfg.pilot_levels).beta, 1.0, 3.0);
    } catch (const FitError&) {
    }
  }
  const LevelStat& s1 = stats[1];
  const double a = cfg.weak_alpha;
  const double c1 = (std::fabs(s1.mean) + 2.0 * std::sqrt(s1.variance / s1.n_used)) * std::exp2(a);
  const double K1 = c1 / (std::exp2(a) - 1.0);

  const BiasedProcedure proc = [&](double sigma, RngStream& s) -> ProcResult {
    const LevelSampler sampler = make_spring_sampler(p, phi, S, cfg.diss_h0, steps_for(sigma), cfg.x0);
    const int L = std::min(cfg.max_level, levels_for_bias(K1, a, sigma / std::sqrt(2.0)));
    const auto n = allocate_classical(extend_stats(stats, L, beta, 1.0), sigma);
    const CostReport r = mlmc_estimate(sampler, n, s, 1);
    return {r.estimate, r.classical_queries};
  };
  auto draw = [&](const RngStream& s) {
    const DebiasDraw d = geom_debias(proc, dc, s);
    return TermDraw{d.value, d.queries, d.j};
  };
  CostReport rep = summarize_draws(run_draws(cfg.n_draws, cfg.threads, rng.derive(kProductionTag), draw), pilot_q);
  if (cfg.n_draws == 1) rep.est_variance = cfg.sigma_tilde * cfg.sigma_tilde;  // declared bound
  return rep;
}

}  // namespace detail

/// Unbiased estimate of E_pi[phi]. The osl method averages single-term
/// randomized draws over the time-shifted level sampler; the dissipative
/// method debiases a spring-coupled MLMC family with growing horizon.
/// per_level rows are indexed by the drawn j.
inline CostReport unbiased_gibbs_estimate(const Potential& p, const Observable& phi, GibbsMethod method,
                                          const GibbsConfig& cfg, const RngStream& rng) {
  if (!(cfg.sigma_tilde > 0.0)) throw ParameterError("sigma_tilde must be positive");
  if (method == GibbsMethod::kOsl) return detail::osl_estimate(p, phi, cfg, rng);
  return detail::dissipative_estimate(p, phi, cfg, rng);
}

}  // namespace umlmc
