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

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "umlmc/config.hpp"
#include "umlmc/debias.hpp"
#include "umlmc/error.hpp"
#include "umlmc/langevin.hpp"
#include "umlmc/measure_change.hpp"
#include "umlmc/mlmc.hpp"
#include "umlmc/parallel.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/stats.hpp"
#include "umlmc/tail_transform.hpp"

namespace umlmc {

/// One CSV line. level -1 marks a row covering a whole estimate.
struct ReportRow {
  std::string method;
  int level = 0;
  double n_or_sigma = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t cost_grad_queries = 0;
  double quantum_model_queries = 0.0;
  double wall_seconds = 0.0;
};

struct Summary {
  std::string method;
  double estimate = 0.0;
  double stderr_replications = 0.0;  ///< spread of the replication estimates
  double stderr_internal = 0.0;      ///< from each estimator's own variance estimate
  std::uint64_t n_replications = 0;
  std::uint64_t total_grad_queries = 0;
  std::uint64_t counted_grad_queries = 0;  ///< tally at the potential boundary
  double total_quantum_model_queries = 0.0;
  std::vector<std::pair<std::string, double>> extra;
};

struct RunOutput {
  std::vector<ReportRow> rows;
  Summary summary;
};

/// Fixed 17-significant-digit rendering used by every report.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kCsvHeader =
    "method,level,n_or_sigma,mean,variance,cost_grad_queries,quantum_model_queries,wall_seconds";

inline std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.level) + "," + format_real(r.n_or_sigma) + "," + format_real(r.mean) +
           "," + format_real(r.variance) + "," + std::to_string(r.cost_grad_queries) + "," +
           format_real(r.quantum_model_queries) + "," + format_real(r.wall_seconds) + "\n";
  }
  return out;
}

inline std::string to_text(const Summary& s) {
  std::string out = "method=" + s.method + "\n";
  out += "estimate=" + format_real(s.estimate) + "\n";
  out += "stderr=" + format_real(s.stderr_replications) + "\n";
  out += "internal_stderr=" + format_real(s.stderr_internal) + "\n";
  out += "n_replications=" + std::to_string(s.n_replications) + "\n";
  out += "total_grad_queries=" + std::to_string(s.total_grad_queries) + "\n";
  out += "counted_grad_queries=" + std::to_string(s.counted_grad_queries) + "\n";
  out += "total_quantum_model_queries=" + format_real(s.total_quantum_model_queries) + "\n";
  for (const auto& [k, v] : s.extra) out += k + "=" + format_real(v) + "\n";
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << text;
}

/// Process exit code for an error: 2 configuration, 3 runtime numerics, 4 j cap.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const JCapError*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const IsotropyError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const RegimeError*>(&e))
    return 2;
  return 3;
}

// ---- config to library objects ----

inline BuiltinSpec potential_spec(const Config& c) {
  BuiltinSpec s;
  s.name = c.str("potential.name");
  const std::int64_t d = c.integer("potential.dim");
  if (d < 1) throw ConfigError("potential.dim: must be at least 1");
  s.dim = static_cast<std::size_t>(d);
  s.a = c.real("potential.a");
  s.kappa = c.real("potential.kappa");
  s.lambda0 = c.real("potential.lambda0");
  s.sigma = c.real("potential.sigma");
  if (s.name == "logistic_regression" || s.name == "gaussian_mixture_logistic" || s.name == "welsch") {
    const auto kind = s.name == "welsch" ? LabelKind::kReal : LabelKind::kBinary;
    s.data = synthetic_dataset(kind, c.count("potential.data_seed"), c.count("potential.data_n"), s.dim);
    const double lam = c.real("potential.prior_precision");
    s.precision.assign(s.dim * s.dim, 0.0);
    for (std::size_t i = 0; i < s.dim; ++i) s.precision[i * s.dim + i] = lam;
  }
  return s;
}

inline Potential potential_from(const Config& c) {
  try {
    return make_potential(potential_spec(c));
  } catch (Error& e) {
    e.add_context("potential");
    throw;
  }
}

inline Observable observable_from(const Config& c, std::size_t dim) {
  ObservableSpec s;
  s.name = c.str("observable.name");
  s.coord = c.count("observable.coord");
  s.value = c.real("observable.value");
  s.direction = c.reals("observable.direction");
  return make_observable(s, dim);
}

inline Point start_point(const Config& c, std::size_t dim) {
  Point x = c.reals("init.x0");
  if (x.empty()) return Point(dim, 0.0);
  if (x.size() != dim) throw ConfigError("init.x0: expected " + std::to_string(dim) + " coordinates");
  return x;
}

inline TransformParams transform_params(const Config& c) {
  return {c.real("transform.alpha"), c.real("transform.b"), c.real("transform.beta"), c.real("transform.R1"),
          c.real("transform.R2")};
}

inline double spring_from(const Config& c, const Potential& p) {
  return c.is_auto("coupling.S") ? default_spring(p) : c.real("coupling.S");
}

inline GibbsConfig gibbs_config(const Config& c, const Potential& p) {
  GibbsConfig g;
  g.sigma_tilde = c.real("debias.sigma_tilde");
  g.debias.rho = c.real("debias.rho");
  g.debias.M = c.real("debias.M");
  g.debias.j_cap = static_cast<int>(c.integer("debias.j_cap"));
  g.x0 = start_point(c, p.dim());
  g.threads = static_cast<unsigned>(c.count("threads"));
  g.h0 = c.real("schedule.h0");
  g.schedule.T0 = c.real("schedule.T0");
  g.schedule.h0 = g.h0;
  if (c.is_auto("schedule.slope")) {
    if (c.str("method") == "unbiased_osl") {
      require_osl(p);
      g.schedule.slope = 4.0 * std::numbers::ln2 / *p.info().osl_m;
    }
  } else {
    g.schedule.slope = c.real("schedule.slope");
  }
  g.n_pilot = c.count("debias.n_pilot");
  g.S = c.is_auto("coupling.S") ? -1.0 : c.real("coupling.S");
  g.T_base = c.real("dissipative.T_base");
  g.c_T = c.real("dissipative.c_T");
  g.diss_h0 = c.real("dissipative.h0");
  g.pilot_levels = static_cast<int>(c.integer("dissipative.pilot_levels"));
  g.diss_n_pilot = c.count("dissipative.n_pilot");
  g.weak_alpha = c.real("dissipative.alpha");
  g.max_level = static_cast<int>(c.integer("dissipative.max_level"));
  g.n_draws = c.count("debias.n_draws");
  return g;
}

namespace detail {

inline constexpr std::uint64_t kReplicationTag = 0x2E9'0000ull;
inline constexpr std::uint64_t kRatesTag = 0x2A7E'5000ull;
inline constexpr std::uint64_t kSampleTag = 0x5A3'9000ull;

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!on_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point t0_;
};

struct Replication {
  double estimate = 0.0;
  double est_variance = 0.0;
  std::vector<ReportRow> rows;
};

inline LevelSampler spring_sampler_from(const Config& c, const Potential& p, const Observable& phi) {
  const double h0 = c.real("mlmc.h0");
  const std::uint64_t n0 = coarse_steps(2.0 * c.real("mlmc.T"), h0);
  return make_spring_sampler(p, phi, spring_from(c, p), h0, n0, start_point(c, p.dim()));
}

inline std::vector<ReportRow> pilot_rows(const std::string& method, const LevelStats& stats) {
  std::vector<ReportRow> rows;
  for (const auto& s : stats) {
    const auto q = static_cast<std::uint64_t>(std::llround(s.mean_cost * static_cast<double>(s.n_used)));
    rows.push_back({method + "_pilot", s.level, static_cast<double>(s.n_used), s.mean, s.variance, q, 0.0, 0.0});
  }
  return rows;
}

// Bias model (K1, alpha): alpha from config, K1 fitted to the pilot level means.
inline std::pair<double, double> bias_model(const Config& c, const LevelStats& stats, int pilot_levels) {
  const double alpha = c.real("mlmc.alpha");
  return {bias_constant_fixed_rate(stats, 1, pilot_levels, alpha), alpha};
}

inline Replication run_mc(const Config& c, const Potential& p, const Observable& phi, const RngStream& rng) {
  const Stopwatch sw(c.flag("report.wall_clock"));
  const std::uint64_t n = c.count("mc.n");
  if (n < 2) throw ConfigError("mc.n: need at least 2 paths");
  const double h = c.real("path.h"), T = c.real("path.T");
  const Point x0 = start_point(c, p.dim());
  const auto draws = parallel_map(n, static_cast<unsigned>(c.count("threads")), [&](std::size_t i) {
    RngStream s = rng.derive(i);
    try {
      const PathResult r = simulate_horizon(p, T, h, x0, s);
      return LevelDraw{phi(r.x), r.grad_queries};
    } catch (Error& e) {
      e.add_context("path " + std::to_string(i));
      throw;
    }
  });
  Welford w;
  std::uint64_t q = 0;
  for (const auto& d : draws) {
    w.add(d.value);
    q += d.grad_queries;
  }
  Replication rep{w.mean(), w.variance() / static_cast<double>(n), {}};
  rep.rows.push_back({"mc", 0, static_cast<double>(n), w.mean(), w.variance(), q, 0.0, sw.seconds()});
  return rep;
}

inline Replication run_leveled(const Config& c, const Potential& p, const Observable& phi, const RngStream& rng,
                               bool quantum) {
  const Stopwatch sw(c.flag("report.wall_clock"));
  const std::string method = quantum ? "qamlmc_model" : "mlmc";
  const unsigned threads = static_cast<unsigned>(c.count("threads"));
  const LevelSampler sampler = spring_sampler_from(c, p, phi);
  const int pl = static_cast<int>(c.integer("mlmc.pilot_levels"));
  const LevelStats stats = estimate_level_stats(sampler, 0, pl, c.count("mlmc.n_pilot"), rng.derive(0), threads);
  Replication rep;
  rep.rows = pilot_rows(method, stats);
  const RateFit fit = fit_rates(stats, 1, pl);
  const double beta = fit.beta, gamma = fit.gamma;
  std::vector<std::uint64_t> n;
  std::vector<double> sig, qq;
  if (quantum) {
    const auto [K1, alpha] = bias_model(c, stats, pl);
    const QuantumAllocation qa = allocate_quantum_model(K1, alpha, beta, gamma, stats, c.real("quantum.sigma_hat"),
                                                        c.count("quantum.r"));
    const LevelStats ext = extend_stats(stats, qa.L, beta, gamma);
    for (int l = 0; l <= qa.L; ++l) {
      const double s = qa.sigma_per_level[l];
      n.push_back(std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(ext[l].variance / (s * s)))));
    }
    sig = qa.sigma_per_level;
    qq = qa.queries_per_level;
  } else {
    int L = 0;
    if (c.is_auto("mlmc.L")) {
      const auto [K1, alpha] = bias_model(c, stats, pl);
      L = std::min<int>(levels_for_bias(K1, alpha, c.real("mlmc.eps") / std::sqrt(2.0)),
                        static_cast<int>(c.integer("mlmc.max_level")));
    } else {
      L = static_cast<int>(c.integer("mlmc.L"));
      if (L < 0) throw ConfigError("mlmc.L: must be nonnegative");
    }
    n = allocate_classical(extend_stats(stats, L, beta, gamma), c.real("mlmc.eps"));
  }
  const CostReport r = mlmc_estimate(sampler, n, rng.derive(1), threads);
  for (const auto& lr : r.per_level) {
    const double ns = quantum ? sig[lr.level] : static_cast<double>(lr.n);
    rep.rows.push_back({method, lr.level, ns, lr.mean, lr.variance, lr.queries, quantum ? qq[lr.level] : 0.0, 0.0});
  }
  rep.rows.back().wall_seconds = sw.seconds();
  rep.estimate = r.estimate;
  rep.est_variance = r.est_variance;
  return rep;
}

inline Replication run_unbiased(const Config& c, const Potential& p, const Observable& phi, const RngStream& rng,
                                GibbsMethod m) {
  const Stopwatch sw(c.flag("report.wall_clock"));
  const GibbsConfig g = gibbs_config(c, p);
  const CostReport r = unbiased_gibbs_estimate(p, phi, m, g, rng);
  const std::string name = m == GibbsMethod::kOsl ? "unbiased_osl" : "unbiased_dissipative";
  Replication rep{r.estimate, r.est_variance, {}};
  rep.rows.push_back({name, -1, g.sigma_tilde, r.estimate, r.est_variance, r.classical_queries, 0.0, sw.seconds()});
  return rep;
}

inline std::vector<Point> transformed_endpoints(const Config& c, const Potential& fh, const TransformParams& tp,
                                                const RngStream& rng, std::uint64_t n, std::uint64_t* queries) {
  const double h = c.real("transform.h");
  const std::uint64_t N = c.count("transform.N");
  const Point y0 = start_point(c, fh.dim());
  const auto out = parallel_map(n, static_cast<unsigned>(c.count("threads")), [&](std::size_t i) {
    RngStream s = rng.derive(i);
    Point y = y0;
    try {
      const std::uint64_t q = advance_path(fh, y, h, N, s);
      return std::pair{h_map(y, tp), q};
    } catch (Error& e) {
      e.add_context("chain " + std::to_string(i));
      throw;
    }
  });
  std::vector<Point> xs;
  xs.reserve(n);
  for (const auto& [x, q] : out) {
    xs.push_back(x);
    *queries += q;
  }
  return xs;
}

}  // namespace detail

/// Executes config's method n_replications times on disjoint streams.
inline RunOutput run_experiment(const Config& c) {
  const std::string method = c.str("method");
  const Potential p = potential_from(c).counted();
  const Observable phi = observable_from(c, p.dim());
  const std::uint64_t R = c.count("n_replications");
  if (R < 1) throw ConfigError("n_replications: must be at least 1");
  const RngStream root(c.count("seed"), 0);

  std::optional<TransformedPotential> tp;
  std::optional<Potential> fh;
  if (method == "transformed_ula") {
    tp.emplace(p, transform_params(c));
    fh = tp->as_potential().counted();
  }

  RunOutput out;
  std::vector<detail::Replication> reps;
  for (std::uint64_t r = 0; r < R; ++r) {
    const RngStream s = root.derive(detail::kReplicationTag).derive(r);
    try {
      if (method == "mc") {
        reps.push_back(detail::run_mc(c, p, phi, s));
      } else if (method == "mlmc" || method == "qamlmc_model") {
        reps.push_back(detail::run_leveled(c, p, phi, s, method == "qamlmc_model"));
      } else if (method == "unbiased_osl") {
        reps.push_back(detail::run_unbiased(c, p, phi, s, GibbsMethod::kOsl));
      } else if (method == "unbiased_dissipative") {
        reps.push_back(detail::run_unbiased(c, p, phi, s, GibbsMethod::kDissipative));
      } else if (method == "transformed_ula") {
        const detail::Stopwatch sw(c.flag("report.wall_clock"));
        const std::uint64_t n = c.count("transform.n_chains");
        if (n < 2) throw ConfigError("transform.n_chains: need at least 2 chains");
        std::uint64_t q = 0;
        const auto xs = detail::transformed_endpoints(c, *fh, tp->params(), s, n, &q);
        Welford w;
        for (const auto& x : xs) w.add(phi(x));
        detail::Replication rep{w.mean(), w.variance() / static_cast<double>(n), {}};
        rep.rows.push_back({method, 0, static_cast<double>(n), w.mean(), w.variance(), q, 0.0, sw.seconds()});
        reps.push_back(rep);
      } else {
        throw ConfigError("method: unknown method '" + method + "'");
      }
    } catch (Error& e) {
      if (R > 1) e.add_context("replication " + std::to_string(r));
      throw;
    }
  }

  Welford est;
  double internal = 0.0;
  for (const auto& rep : reps) {
    est.add(rep.estimate);
    internal += rep.est_variance;
    out.rows.insert(out.rows.end(), rep.rows.begin(), rep.rows.end());
  }
  Summary& s = out.summary;
  s.method = method;
  s.n_replications = R;
  s.estimate = est.mean();
  const double Rd = static_cast<double>(R);
  s.stderr_internal = std::sqrt(internal / Rd / Rd);
  s.stderr_replications = R > 1 ? std::sqrt(est.variance() / Rd) : s.stderr_internal;
  for (const auto& row : out.rows) {
    s.total_grad_queries += row.cost_grad_queries;
    s.total_quantum_model_queries += row.quantum_model_queries;
  }
  s.counted_grad_queries = fh ? fh->grad_calls() : p.grad_calls();
  if (s.counted_grad_queries != s.total_grad_queries)
    throw NumericError("query accounting mismatch: reported " + std::to_string(s.total_grad_queries) + ", counted " +
                       std::to_string(s.counted_grad_queries));
  return out;
}

/// Pilot level statistics and fitted rates of the method's level sampler.
inline RunOutput run_rates(const Config& c) {
  const std::string method = c.str("method");
  const Potential p = potential_from(c);
  const Observable phi = observable_from(c, p.dim());
  LevelSampler sampler;
  if (method == "mlmc" || method == "qamlmc_model") {
    sampler = detail::spring_sampler_from(c, p, phi);
  } else if (method == "unbiased_osl") {
    const GibbsConfig g = gibbs_config(c, p);
    sampler = make_osl_sampler(p, phi, g.h0, g.schedule, g.x0);
  } else {
    throw ConfigError("method: rates needs a leveled method (mlmc, qamlmc_model, unbiased_osl), got '" + method + "'");
  }
  const int pl = static_cast<int>(c.integer("mlmc.pilot_levels"));
  const RngStream root(c.count("seed"), 0);
  const LevelStats stats = estimate_level_stats(sampler, 0, pl, c.count("mlmc.n_pilot"), root.derive(detail::kRatesTag),
                                                static_cast<unsigned>(c.count("threads")));
  const RateFit fit = fit_rates(stats, 1, pl);
  RunOutput out;
  for (const auto& s : stats) {
    const auto q = static_cast<std::uint64_t>(std::llround(s.mean_cost * static_cast<double>(s.n_used)));
    out.rows.push_back({"rates", s.level, static_cast<double>(s.n_used), s.mean, s.variance, q, 0.0, 0.0});
    out.summary.total_grad_queries += q;
  }
  out.summary.method = "rates_" + method;
  out.summary.n_replications = 1;
  out.summary.counted_grad_queries = out.summary.total_grad_queries;
  out.summary.extra = {{"alpha", fit.alpha},     {"beta", fit.beta},       {"gamma", fit.gamma},
                       {"r2_alpha", fit.r2_alpha}, {"r2_beta", fit.r2_beta}, {"r2_gamma", fit.r2_gamma}};
  return out;
}

/// Endpoints of mc paths or transformed chains, one point per line.
inline std::vector<Point> run_sample(const Config& c) {
  const std::string method = c.str("method");
  const Potential p = potential_from(c);
  const RngStream root = RngStream(c.count("seed"), 0).derive(detail::kSampleTag);
  if (method == "mc") {
    const std::uint64_t n = c.count("mc.n");
    const double h = c.real("path.h"), T = c.real("path.T");
    const Point x0 = start_point(c, p.dim());
    return parallel_map(n, static_cast<unsigned>(c.count("threads")), [&](std::size_t i) {
      RngStream s = root.derive(i);
      return simulate_horizon(p, T, h, x0, s).x;
    });
  }
  if (method == "transformed_ula") {
    const TransformedPotential tp(p, transform_params(c));
    std::uint64_t q = 0;
    return detail::transformed_endpoints(c, tp.as_potential(), tp.params(), root, c.count("transform.n_chains"), &q);
  }
  throw ConfigError("method: sample supports mc and transformed_ula, got '" + method + "'");
}

inline std::string points_to_csv(const std::vector<Point>& xs) {
  std::string out;
  for (const auto& x : xs) {
    for (std::size_t i = 0; i < x.size(); ++i) out += (i ? "," : "") + format_real(x[i]);
    out += "\n";
  }
  return out;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TransformCheckOutput {
  std::vector<CheckResult> checks;
  ScanReport scan;
};

namespace detail {

inline std::string fmt_pair(const char* what, double v, const char* bar, double lim) {
  return std::string(what) + "=" + format_real(v) + " " + bar + " " + format_real(lim);
}

// Largest radius whose tail exponent stays representable.
inline double radius_limit(const TransformParams& p) {
  if (p.b == 0.0) return 1e6;
  return std::pow(700.0 / p.b, 1.0 / p.beta);
}

}  // namespace detail

/// Structural battery of the heavy-tail transform plus the tail assumption scan.
inline TransformCheckOutput run_transform_check(const Config& c) {
  const Potential base = potential_from(c);
  const TransformParams prm = transform_params(c);
  const TransformedPotential tp(base, prm);  // validates params and isotropy
  const std::size_t d = tp.dim();
  TransformCheckOutput out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.checks.push_back({std::move(name), ok, std::move(detail)}); };
  RngStream rng = RngStream(c.count("seed"), 0).derive(0x7C4E'C000ull);
  const double r_cap = std::min(2.5 * prm.R2, detail::radius_limit(prm));

  {
    double worst = 0.0;
    for (double r : {std::nextafter(prm.R1, prm.R2), std::nextafter(prm.R2, prm.R1)}) {
      const Jet x = chi(r, prm.R1, prm.R2);
      const double w = prm.R2 - prm.R1;
      worst = std::max({worst, std::fabs(x[1]) * w, std::fabs(x[2]) * w * w, std::fabs(x[3]) * w * w * w});
    }
    add("chi_endpoint_derivatives", worst <= 1e-12, detail::fmt_pair("max_scaled", worst, "<=", 1e-12));
  }
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < 1000; ++k) worst = std::max(worst, chi(prm.R1 + (prm.R2 - prm.R1) * k / 1000.0, prm.R1, prm.R2)[1]);
    add("chi_monotone", worst <= 0.0, detail::fmt_pair("max_d1", worst, "<=", 0.0));
  }
  {
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
      double a = rng.uniform() * r_cap, b = rng.uniform() * r_cap;
      if (a > b) std::swap(a, b);
      if (a < b && !(g_eval(a, prm) < g_eval(b, prm))) ++bad;
    }
    add("g_monotone", bad == 0, "violations=" + std::to_string(bad) + " of 1000 pairs");
  }
  {
    double worst = 0.0;
    for (double R : {prm.R1, prm.R2}) {
      const double del = 1e-10 * std::max(1.0, R);
      const Jet lo = g_jet(R - del, prm), hi = g_jet(R + del, prm);
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::fabs(lo[k] - hi[k]) / std::max(1.0, std::fabs(hi[k])));
    }
    add("g_junction_C3", worst <= 1e-6, detail::fmt_pair("max_rel_jump", worst, "<=", 1e-6));
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double r = rng.uniform() * std::min(5.0, r_cap);
      worst = std::max(worst, std::fabs(g_inverse(g_eval(r, prm), prm) - r) / std::max(1.0, r));
    }
    add("g_inverse_roundtrip", worst <= 1e-10, detail::fmt_pair("max_err", worst, "<=", 1e-10));
  }
  {
    bool ok = true;
    const double top = std::min(10.0, r_cap);
    for (int k = 0; k <= 200; ++k) {
      const double r = 1e-6 * std::pow(top / 1e-6, k / 200.0);
      ok = ok && log_g(r, prm) - std::log(r) > -1e300 && g_deriv(r, prm, 1) > 0.0;
    }
    add("jacobian_positive", ok, "grid [1e-6, " + format_real(top) + "]");
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      Point x(d);
      for (double& v : x) v = rng.normal();
      const double r = 0.1 + rng.uniform() * (std::min(4.0, r_cap) - 0.1);
      const double nx = norm(x);
      for (double& v : x) v *= r / nx;
      const Point g = tp.gradient(x);
      double gmax = 1.0;
      for (double v : g) gmax = std::max(gmax, std::fabs(v));
      for (std::size_t i = 0; i < d; ++i) {
        Point xp = x, xm = x;
        const double st = 1e-5 * std::max(1.0, std::fabs(x[i]));
        xp[i] += st;
        xm[i] -= st;
        worst = std::max(worst, std::fabs((tp.value(xp) - tp.value(xm)) / (2.0 * st) - g[i]) / gmax);
      }
    }
    add("f_h_gradient_fd", worst <= 1e-5, detail::fmt_pair("max_rel_err", worst, "<=", 1e-5));
  }
  {
    bool exact = true;
    for (int k = 0; k < 100; ++k) {
      Point x(d);
      for (double& v : x) v = rng.normal();
      const double nx = norm(x);
      const double r = rng.uniform() * prm.R1 * 0.999;
      for (double& v : x) v *= r / nx;
      exact = exact && tp.value(x) == base.value(x) && tp.gradient(x) == base.gradient(x) && h_map(x, prm) == x;
    }
    add("identity_region_exact", exact, "100 points inside R1, bitwise");
  }
  {
    double worst = 0.0;
    for (double r : {0.5 * (prm.R1 + prm.R2), std::min(1.5 * prm.R2, r_cap)}) {
      const auto [lr, lt] = tp.hessian_eigs(r);
      Point x(d, 0.0);
      x[0] = r;
      const double st = 1e-5 * r;
      Point xp = x, xm = x;
      xp[0] += st;
      xm[0] -= st;
      const double fd_r = (tp.gradient(xp)[0] - tp.gradient(xm)[0]) / (2.0 * st);
      worst = std::max(worst, std::fabs(fd_r - lr) / std::max(1.0, std::fabs(lr)));
      if (d > 1) {
        xp = x;
        xm = x;
        xp[1] += st;
        xm[1] -= st;
        const double fd_t = (tp.gradient(xp)[1] - tp.gradient(xm)[1]) / (2.0 * st);
        worst = std::max(worst, std::fabs(fd_t - lt) / std::max(1.0, std::fabs(lt)));
      }
    }
    add("hessian_eigs_fd", worst <= 1e-4, detail::fmt_pair("max_rel_err", worst, "<=", 1e-4));
  }

  const double inf = std::numeric_limits<double>::infinity();
  const double L = c.is_auto("transform.scan_L") ? inf : c.real("transform.scan_L");
  const double A = c.is_auto("transform.scan_A") ? 0.0 : c.real("transform.scan_A");
  const double B = c.is_auto("transform.scan_B") ? inf : c.real("transform.scan_B");
  out.scan = tp.assumption_scan(c.reals("transform.scan_r"), L, A, B);
  if (!c.is_auto("transform.scan_L")) {
    add("scan_smooth", out.scan.smooth_ok, detail::fmt_pair("max", out.scan.max_smooth, "<", L));
    add("scan_hessian", out.scan.hessian_ok,
        detail::fmt_pair("max_third", out.scan.max_third, "<=", L) + " " +
            detail::fmt_pair("max_abs_mixed", out.scan.max_abs_mixed, "<=", L));
  }
  if (!c.is_auto("transform.scan_A") || !c.is_auto("transform.scan_B"))
    add("scan_dissipative", out.scan.dissipative_ok, detail::fmt_pair("min_margin", out.scan.min_dissipative_margin, ">", 0.0));

  if (c.flag("transform.ks")) {
    if (base.name() != "student_t" || d != 1) throw ConfigError("transform.ks: needs a one-dimensional student_t base");
    const double kappa = c.real("potential.kappa");
    std::uint64_t q = 0;
    const auto xs = detail::transformed_endpoints(c, tp.as_potential(), prm, RngStream(c.count("seed"), 0).derive(detail::kSampleTag),
                                                  c.count("transform.n_chains"), &q);
    std::vector<double> v;
    for (const auto& x : xs) v.push_back(x[0]);
    const double ks = ks_statistic(v, [kappa](double t) { return scaled_student_t_cdf(t, kappa); });
    add("ks_transformed_ula", ks <= 0.05, detail::fmt_pair("ks", ks, "<=", 0.05));
  }
  return out;
}

inline std::string to_text(const TransformCheckOutput& o) {
  std::string out;
  for (const auto& ch : o.checks) out += std::string(ch.pass ? "PASS " : "FAIL ") + ch.name + " " + ch.detail + "\n";
  out += "scan: r,u2,u1_over_r,r_u1,u3,mixed\n";
  for (const auto& row : o.scan.rows) {
    out += "scan: " + format_real(row.r) + "," + format_real(row.smooth_radial) + "," + format_real(row.smooth_tangential) +
           "," + format_real(row.dissipativity) + "," + format_real(row.third) + "," + format_real(row.mixed) + "\n";
  }
  return out;
}

}  // namespace umlmc
