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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "umlmc/error.hpp"

namespace umlmc {

struct ConfigKey {
  const char* key;
  const char* default_value;
  const char* doc;
};

/// Every accepted key with its default. Unknown keys are rejected.
inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"method", "mc", "mc | mlmc | qamlmc_model | unbiased_osl | unbiased_dissipative | transformed_ula"},
      {"seed", "1", "root seed of all random streams"},
      {"n_replications", "1", "independent repetitions of the whole estimator"},
      {"threads", "0", "worker threads; 0 uses every hardware thread; never changes results"},
      {"output_path", "out", "directory receiving report.csv and summary.txt"},
      {"report.wall_clock", "false", "record wall seconds; off keeps reports byte-reproducible"},
      {"potential.name", "quadratic", "builtin potential"},
      {"potential.dim", "1", "dimension"},
      {"potential.a", "2", "radial_gauss depth"},
      {"potential.kappa", "3", "student_t degrees of freedom"},
      {"potential.lambda0", "0.5", "welsch ridge or cosine_well amplitude"},
      {"potential.sigma", "1", "welsch bandwidth"},
      {"potential.data_seed", "2024", "seed of the synthetic dataset"},
      {"potential.data_n", "20", "rows of the synthetic dataset"},
      {"potential.prior_precision", "1", "isotropic prior precision"},
      {"observable.name", "cos", "cos | sin | tanh | coord | constant | sigmoid_linear"},
      {"observable.coord", "0", "coordinate read by cos, sin, tanh and coord"},
      {"observable.value", "0", "value of the constant observable"},
      {"observable.direction", "", "comma list for sigmoid_linear; all ones if empty"},
      {"init.x0", "", "comma list start point; origin if empty"},
      {"path.h", "0.01", "step of mc paths"},
      {"path.T", "8", "horizon of mc paths"},
      {"mc.n", "10000", "paths for mc and endpoints for sample"},
      {"mlmc.h0", "0.1", "level-0 step"},
      {"mlmc.T", "4", "horizon; a multiple of mlmc.h0"},
      {"mlmc.L", "auto", "finest level; auto derives it from the fitted bias"},
      {"mlmc.alpha", "1", "decay rate of the level means used to pick L (weak order of Euler-Maruyama)"},
      {"mlmc.max_level", "10", "cap on the automatic finest level"},
      {"mlmc.n_pilot", "1000", "pilot draws per level"},
      {"mlmc.pilot_levels", "4", "pilot covers levels 0..pilot_levels"},
      {"mlmc.eps", "0.02", "target root mean squared error"},
      {"coupling.S", "auto", "spring coefficient; auto is max(lambda, 1)"},
      {"schedule.T0", "4", "horizon of level 0"},
      {"schedule.slope", "auto", "horizon increment per level; auto is 4 ln2 / osl_m"},
      {"schedule.h0", "0.05", "level-0 step of the time-shifted sampler"},
      {"debias.rho", "0.75", "accuracy decay exponent"},
      {"debias.M", "8", "accuracy divisor"},
      {"debias.sigma_tilde", "0.02", "target standard deviation of one estimate"},
      {"debias.j_cap", "64", "largest admissible geometric draw"},
      {"debias.n_pilot", "100", "pilot draws sizing the single-term average"},
      {"debias.n_draws", "2", "debiased draws averaged by the dissipative method (1 reports the declared variance bound)"},
      {"dissipative.T_base", "2", "horizon offset"},
      {"dissipative.c_T", "1", "horizon growth per unit of log(1/sigma)"},
      {"dissipative.h0", "0.1", "level-0 step"},
      {"dissipative.pilot_levels", "3", "pilot covers levels 0..pilot_levels"},
      {"dissipative.n_pilot", "200", "pilot draws per level"},
      {"dissipative.alpha", "1", "decay rate of the level means"},
      {"dissipative.max_level", "12", "cap on the finest level"},
      {"quantum.sigma_hat", "0.02", "target accuracy of the quantum-model estimator"},
      {"quantum.r", "1", "output dimension entering the query model"},
      {"transform.alpha", "0", "polynomial tail exponent"},
      {"transform.b", "1", "exponential tail coefficient"},
      {"transform.beta", "2", "exponential tail power in (1, 2]"},
      {"transform.R1", "1", "end of the identity region"},
      {"transform.R2", "2", "start of the pure tail"},
      {"transform.h", "0.005", "step of transformed chains"},
      {"transform.N", "4000", "steps of transformed chains"},
      {"transform.n_chains", "10000", "independent transformed chains"},
      {"transform.spring_S", "1", "spring coefficient of the transformed spring sampler"},
      {"transform.scan_r", "2.5,3,4,5,10", "tail radii of the assumption scan"},
      {"transform.scan_L", "none", "smoothness candidate for the scan"},
      {"transform.scan_A", "none", "dissipativity slope candidate"},
      {"transform.scan_B", "none", "dissipativity offset candidate"},
      {"transform.ks", "false", "also run the sampling KS check (one-dimensional student_t only)"},
  };
  return schema;
}

/// Flat key = value configuration with '#' comments.
class Config {
 public:
  Config() {
    for (const auto& k : config_schema()) values_[k.key] = k.default_value;
  }

  static Config parse(std::string_view text) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      return parse(ss.str());
    } catch (Error& e) {
      e.add_context(path);
      throw;
    }
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  bool is_auto(const std::string& key) const {
    const std::string& v = str(key);
    return v == "auto" || v == "none" || v.empty();
  }

  double real(const std::string& key) const { return to_real(key, str(key)); }

  std::int64_t integer(const std::string& key) const {
    const std::string& v = str(key);
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
  }

  std::uint64_t count(const std::string& key) const {
    const std::int64_t v = integer(key);
    if (v < 0) throw ConfigError(key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_real(key, item));
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  static double to_real(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size() || !std::isfinite(out))
      throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace umlmc
