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

// Command-line front end: run, rates, transform-check, sample.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "umlmc/config.hpp"
#include "umlmc/harness.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

umlmc::Config load(const Options& o) {
  umlmc::Config c = o.config_path.empty() ? umlmc::Config() : umlmc::Config::load(o.config_path);
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (o.out) c.set("output_path", *o.out);
  return c;
}

std::filesystem::path out_dir(const umlmc::Config& c) { return c.str("output_path"); }

int cmd_run(const Options& o) {
  const umlmc::Config c = load(o);
  const umlmc::RunOutput r = umlmc::run_experiment(c);
  umlmc::write_file(out_dir(c) / "report.csv", umlmc::to_csv(r.rows));
  const std::string summary = umlmc::to_text(r.summary);
  umlmc::write_file(out_dir(c) / "summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_rates(const Options& o) {
  const umlmc::Config c = load(o);
  const umlmc::RunOutput r = umlmc::run_rates(c);
  umlmc::write_file(out_dir(c) / "rates.csv", umlmc::to_csv(r.rows));
  const std::string summary = umlmc::to_text(r.summary);
  umlmc::write_file(out_dir(c) / "rates_summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_transform_check(const Options& o) {
  const umlmc::Config c = load(o);
  const umlmc::TransformCheckOutput r = umlmc::run_transform_check(c);
  const std::string text = umlmc::to_text(r);
  umlmc::write_file(out_dir(c) / "transform_check.txt", text);
  std::cout << text;
  for (const auto& ch : r.checks)
    if (!ch.pass) return 1;
  return 0;
}

int cmd_sample(const Options& o) {
  const umlmc::Config c = load(o);
  const auto xs = umlmc::run_sample(c);
  umlmc::write_file(out_dir(c) / "samples.csv", umlmc::points_to_csv(xs));
  std::cout << "wrote " << xs.size() << " samples to " << (out_dir(c) / "samples.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unbiased multilevel Langevin estimators of Gibbs expectations"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "override the output directory");
  };
  CLI::App* run = app.add_subcommand("run", "run the configured estimator");
  CLI::App* rates = app.add_subcommand("rates", "pilot levels and fit (alpha, beta, gamma)");
  CLI::App* tcheck = app.add_subcommand("transform-check", "heavy-tail transform diagnostics");
  CLI::App* sample = app.add_subcommand("sample", "dump raw endpoints");
  for (CLI::App* s : {run, rates, tcheck, sample}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (rates->parsed()) return cmd_rates(opt);
    if (tcheck->parsed()) return cmd_transform_check(opt);
    return cmd_sample(opt);
  } catch (const umlmc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return umlmc::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
