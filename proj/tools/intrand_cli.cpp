// Copyright 2026 The intrand Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// intrand: command-line front end. See README.md and docs/formats.md.
//
// Exit codes: 0 success / no evidence, 2 usage or input error, 3 reject,
// 4 contract violation.

#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "intrand/intrand.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace intrand;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;
constexpr int kExitContract = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// Command, parameters, seeds, version and input digests; reports are a pure
// function of these.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    j_["command"] = std::move(command);
    j_["version"] = INTRAND_VERSION;
    j_["parameters"] = json::object();
    j_["seeds"] = json::array();
    j_["inputs"] = json::array();
  }

  void capture(const CLI::App& sub) {
    for (const CLI::Option* opt : sub.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help") continue;
      json value;
      if (opt->count() > 0) {
        const auto& r = opt->results();
        value = r.size() == 1 ? json(r.front()) : json(r);
      } else if (!opt->get_default_str().empty()) {
        value = opt->get_default_str();
      }
      j_["parameters"][name] = value;
    }
  }

  void seed(std::uint64_t s) { j_["seeds"].push_back(s); }

  std::string input(const std::string& path) {
    std::string data = read_file(path);
    j_["inputs"].push_back({{"path", path}, {"sha256", sha256_hex(data)}});
    return data;
  }

  void output(const std::string& path, const std::string& data) {
    j_["outputs"].push_back({{"path", path}, {"sha256", sha256_hex(data)}});
  }

  const json& get() const { return j_; }

 private:
  json j_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

// --- Shared option groups ---------------------------------------------------

struct SystemArgs {
  std::string system;
  std::optional<double> lower, upper, p, q;

  void add(CLI::App* sub) {
    sub->add_option("--system", system,
                    "preset (stationary, vacuous, alternating-pq, near-half) or JSON file")
        ->required();
    sub->add_option("--lower", lower, "stationary lower forecast");
    sub->add_option("--upper", upper, "stationary upper forecast");
    sub->add_option("--p", p, "alternating-pq forecast on odd-length situations");
    sub->add_option("--q", q, "alternating-pq forecast on even-length situations");
  }

  ForecastingSystem build(Manifest& manifest) const {
    if (system == "stationary") {
      if (!lower || !upper) throw UsageError("stationary needs --lower and --upper");
      return ForecastingSystem::stationary(*lower, *upper);
    }
    if (system == "vacuous") return ForecastingSystem::vacuous();
    if (system == "near-half") return ForecastingSystem::near_half();
    if (system == "alternating-pq") {
      if (!p || !q) throw UsageError("alternating-pq needs --p and --q");
      return ForecastingSystem::alternating_pq(*p, *q);
    }
    if (!std::filesystem::exists(system)) {
      throw UsageError("unknown system preset or missing file: " + system);
    }
    return system_from_json(json::parse(manifest.input(system)));
  }
};

struct BitsInput {
  std::string path;
  std::optional<std::size_t> horizon;

  void add(CLI::App* sub) {
    sub->add_option("-i,--input", path, "bit file (ASCII 0/1, whitespace ignored)")
        ->required();
    sub->add_option("--horizon", horizon, "number of outcomes to use (default: all)");
  }

  std::pair<Path, std::size_t> load(Manifest& manifest) const {
    Path bits = parse_bits(manifest.input(path));
    const std::size_t n = horizon.value_or(bits.size());
    if (n > bits.size()) {
      throw UsageError("horizon " + std::to_string(n) + " exceeds the " +
                       std::to_string(bits.size()) + " outcomes in " + path);
    }
    if (n == 0) throw UsageError("empty horizon");
    return {std::move(bits), n};
  }
};

std::vector<CapitalProcess> load_battery(const std::string& source, int terms,
                                         const ForecastingSystem& system, Manifest& manifest) {
  if (source == "standard") return standard_battery(system, terms);
  return battery_from_json(json::parse(manifest.input(source)), system);
}

std::vector<SelectionProcess> parse_selections(const std::vector<std::string>& names) {
  std::vector<SelectionProcess> out;
  for (const auto& n : names) out.push_back(selection_from_preset(n));
  return out;
}

json wrap(const Manifest& manifest, json report) {
  return {{"manifest", manifest.get()}, {"report", std::move(report)}};
}

// --- Subcommands --------------------------------------------------------------

struct GenerateCmd {
  SystemArgs sys;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string policy = "fixed";
  std::string output;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "sample an outcome path from a forecasting system");
    sys.add(sub);
    sub->add_option("--seed", seed, "64-bit seed")->capture_default_str();
    sub->add_option("--n", n, "number of outcomes")->required()->check(CLI::PositiveNumber);
    sub->add_option("--policy", policy, "fixed, lower, upper, uniform or alternating")
        ->capture_default_str();
    sub->add_option("-o,--output", output, "bit file to write (default: stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    Manifest manifest("generate");
    manifest.capture(sub);
    manifest.seed(seed);
    const auto system = sys.build(manifest);
    const std::string bits = to_bits(sample_path(system, policy_from_name(policy), seed, n));
    if (output.empty()) {
      std::cout << bits << "\n";
      return;
    }
    write_file(output, bits);
    manifest.output(output, bits);
    std::cout << dump({{"manifest", manifest.get()}});
  }
};

struct AuditCmd {
  BitsInput in;
  SystemArgs sys;
  std::string battery = "standard";
  int terms = 20;
  double threshold = kDefaultVilleThreshold;
  std::vector<std::string> selections{"all", "even", "odd"};
  std::string report, trajectories;
  std::size_t stride = 1;
  int exit_code = kExitOk;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("audit", "run a strategy battery along a path");
    in.add(sub);
    sys.add(sub);
    sub->add_option("--battery", battery, "'standard' or a battery JSON file")
        ->capture_default_str();
    sub->add_option("--mixture-terms", terms, "calibration mixture terms R")
        ->capture_default_str()
        ->check(CLI::Range(1, 60));
    sub->add_option("--threshold", threshold, "Ville threshold K")->capture_default_str();
    sub->add_option("--selection", selections, "selection presets for frequency summaries")
        ->capture_default_str();
    sub->add_option("-o,--report", report, "JSON report (default: stdout)");
    sub->add_option("--trajectories", trajectories, "CSV of log-capital trajectories");
    sub->add_option("--stride", stride, "write every stride-th step to the CSV")
        ->capture_default_str();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    if (!(threshold > 1.0)) throw UsageError("--threshold must exceed 1");
    Manifest manifest("audit");
    manifest.capture(sub);
    const auto [path, n] = in.load(manifest);
    const auto system = sys.build(manifest);
    AuditConfig cfg;
    cfg.horizon = n;
    cfg.threshold = threshold;
    cfg.strategies = load_battery(battery, terms, system, manifest);
    cfg.selections = parse_selections(selections);
    cfg.keep_trajectories = !trajectories.empty();
    const auto result = audit(path, system, cfg);
    if (!trajectories.empty()) {
      std::ostringstream csv;
      write_trajectory_csv(csv, result, stride);
      write_file(trajectories, csv.str());
    }
    emit(report, dump(wrap(manifest, to_json(result))));
    for (const auto& s : result.strategies) {
      if (s.error) std::cerr << "contract violation: " << s.name << ": " << *s.error << "\n";
    }
    std::cerr << to_string(result.verdict) << "\n";
    exit_code = result.contract_violation                ? kExitContract
                : result.verdict == Verdict::reject ? kExitReject
                                                         : kExitOk;
  }
};

struct SweepCmd {
  BitsInput in;
  double grid = 0.05;
  double threshold = kDefaultVilleThreshold;
  std::vector<double> lambdas = default_lambdas();
  bool no_calibration = false;
  int terms = 20;
  std::size_t threads = 0;
  std::string report, csv;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("sweep", "test every stationary interval on a grid");
    in.add(sub);
    sub->add_option("--grid", grid, "grid step h in [0.01, 0.25], dividing 1")
        ->capture_default_str();
    sub->add_option("--threshold", threshold, "Ville threshold K")->capture_default_str();
    sub->add_option("--lambda", lambdas, "endpoint bet fractions in (0, 1]")
        ->capture_default_str();
    sub->add_flag("--no-calibration", no_calibration, "endpoint bets only");
    sub->add_option("--mixture-terms", terms, "calibration mixture terms R")
        ->capture_default_str()
        ->check(CLI::Range(1, 60));
    sub->add_option("--threads", threads, "worker threads (0: INTRAND_THREADS or all cores)")
        ->capture_default_str();
    sub->add_option("-o,--report", report, "JSON summary (default: stdout)");
    sub->add_option("--csv", csv, "CSV verdict matrix");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    if (!(threshold > 1.0)) throw UsageError("--threshold must exceed 1");
    Manifest manifest("sweep");
    manifest.capture(sub);
    grid_divisions(grid);
    for (double lam : lambdas) check_lambda(lam);
    const auto [path, n] = in.load(manifest);
    SweepConfig cfg;
    cfg.horizon = n;
    cfg.threshold = threshold;
    cfg.lambdas = lambdas;
    cfg.include_calibration = !no_calibration;
    cfg.mixture_terms = terms;
    cfg.threads = threads;
    const auto result = sweep_constant_intervals(path, grid, cfg);
    if (!csv.empty()) {
      std::ostringstream out;
      write_sweep_csv(out, result);
      write_file(csv, out.str());
    }
    emit(report, dump(wrap(manifest, to_json(result))));
  }
};

struct FrequencyCmd {
  BitsInput in;
  SystemArgs sys;
  std::vector<std::string> selections{"all", "even", "odd"};
  std::string report;
  int exit_code = kExitOk;

  void add(CLI::App& app) {
    auto* sub =
        app.add_subcommand("frequency", "selected relative frequencies against forecast bounds");
    in.add(sub);
    sys.add(sub);
    sub->add_option("--selection", selections, "selection presets")->capture_default_str();
    sub->add_option("-o,--report", report, "JSON report (default: stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    Manifest manifest("frequency");
    manifest.capture(sub);
    const auto [path, n] = in.load(manifest);
    const auto system = sys.build(manifest);
    json summaries = json::array();
    bool all_within = true;
    for (const auto& sel : parse_selections(selections)) {
      const auto s = frequency_summary(path, n, sel, system);
      if (s.within_bounds == false) all_within = false;
      summaries.push_back(to_json(s));
    }
    emit(report, dump(wrap(manifest, {{"horizon", n},
                                      {"within_bounds", all_within},
                                      {"selections", summaries}})));
    exit_code = all_within ? kExitOk : kExitReject;
  }
};

struct ExpectCmd {
  SystemArgs sys;
  std::string gamble_file;
  std::vector<double> values;
  std::string report;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "expect", "finite-horizon lower and upper expectation of a gamble on paths");
    sys.add(sub);
    auto* file = sub->add_option("--gamble", gamble_file,
                                 "JSON file {\"depth\": d, \"values\": [2^d numbers]}");
    auto* list = sub->add_option("--values", values, "2^d leaf values, first bit most significant")
                     ->delimiter(',');
    file->excludes(list);
    sub->add_option("-o,--report", report, "JSON report (default: stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    Manifest manifest("expect");
    manifest.capture(sub);
    const auto system = sys.build(manifest);
    FiniteGamble g;
    if (!gamble_file.empty()) {
      const json j = json::parse(manifest.input(gamble_file));
      g = FiniteGamble::make(j.at("depth").get<std::size_t>(),
                             j.at("values").get<std::vector<double>>());
    } else if (!values.empty()) {
      std::size_t depth = 0;
      while ((std::size_t{1} << depth) < values.size()) ++depth;
      g = FiniteGamble::make(depth, values);
    } else {
      throw UsageError("expect needs --gamble or --values");
    }
    emit(report, dump(wrap(manifest, {{"depth", g.depth},
                                      {"lower", finite_horizon_lower_expectation(system, g)},
                                      {"upper", finite_horizon_upper_expectation(system, g)}})));
  }
};

struct DemoNearHalfCmd {
  std::uint64_t seed = 0;
  std::size_t n = 100000;
  double threshold = kDefaultVilleThreshold;
  std::string report, trajectories;
  std::size_t stride = 100;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "demo-near-half",
        "fair-coin and near-half Hellinger strategies on a near-half path");
    sub->add_option("--seed", seed, "64-bit seed")->capture_default_str();
    sub->add_option("--n", n, "horizon")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--threshold", threshold, "Ville threshold K")->capture_default_str();
    sub->add_option("-o,--report", report, "JSON report (default: stdout)");
    sub->add_option("--trajectories", trajectories, "CSV of both log-capital trajectories");
    sub->add_option("--stride", stride, "write every stride-th step to the CSV")
        ->capture_default_str();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    if (!(threshold > 1.0)) throw UsageError("--threshold must exceed 1");
    Manifest manifest("demo-near-half");
    manifest.capture(sub);
    manifest.seed(seed);
    const Path path =
        sample_path(ForecastingSystem::near_half(), RealityPolicy::fixed_precise(), seed, n);
    const auto half = capital_from_multiplier(hellinger_half_strategy(), path, n);
    const auto near = capital_from_multiplier(hellinger_near_half_strategy(), path, n);
    double tail = 0.0, worst = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      tail += 1.0 / static_cast<double>(k + 1);
      worst = std::max(worst, std::abs(half.log_values[k] + near.log_values[k] - tail));
    }
    const auto vh = ville_threshold_verdict(half, threshold);
    const auto vn = ville_threshold_verdict(near, threshold);
    const double bound = tail - std::log(threshold);
    const auto describe = [](const VilleVerdict& v, const char* against) {
      return json{{"tested_against", against},
                  {"verdict", to_string(v.verdict)},
                  {"max_log_capital", log_json(v.max_log_capital)},
                  {"argmax_step", v.argmax_step},
                  {"crossing_step", optional_json(v.crossing_step)}};
    };
    json out{{"horizon", n},
             {"threshold", threshold},
             {"harmonic_tail", tail},
             {"log_sum_final", half.final_log() + near.final_log()},
             {"sum_check_max_error", worst},
             {"hellinger_half", describe(vh, "stationary [0.5, 0.5]")},
             {"hellinger_near_half", describe(vn, "near-half")},
             {"rejection_bound", bound},
             {"bound_applies", vn.verdict == Verdict::no_evidence},
             {"bound_holds", vn.verdict == Verdict::reject || vh.max_log_capital >= bound}};
    if (!trajectories.empty()) {
      std::ostringstream csv;
      csv << "step,strategy,log_capital\n";
      for (const auto& [name, t] : {std::pair{"hellinger-half", &half},
                                    std::pair{"hellinger-near-half", &near}}) {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k % std::max<std::size_t>(stride, 1) != 0 && k != n) continue;
          csv << k << ',' << name << ',' << format_double(t->log_values[k]) << '\n';
        }
      }
      write_file(trajectories, csv.str());
    }
    emit(report, dump(wrap(manifest, out)));
  }
};

struct SimulateCmd {
  SystemArgs sys;
  std::string policy = "fixed";
  std::size_t paths = 200;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  double threshold = kDefaultVilleThreshold;
  std::string battery = "standard";
  int terms = 20;
  std::size_t threads = 0;
  std::string report;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "simulate", "fraction of paths sampled from a system that its own battery rejects");
    sys.add(sub);
    sub->add_option("--policy", policy, "fixed, lower, upper, uniform or alternating")
        ->capture_default_str();
    sub->add_option("--paths", paths, "number of paths")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--n", n, "horizon")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed of path 0; path i uses seed + i")
        ->capture_default_str();
    sub->add_option("--threshold", threshold, "Ville threshold K")->capture_default_str();
    sub->add_option("--battery", battery, "'standard' or a battery JSON file")
        ->capture_default_str();
    sub->add_option("--mixture-terms", terms, "calibration mixture terms R")
        ->capture_default_str()
        ->check(CLI::Range(1, 60));
    sub->add_option("--threads", threads, "worker threads (0: INTRAND_THREADS or all cores)")
        ->capture_default_str();
    sub->add_option("-o,--report", report, "JSON report (default: stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) {
    if (!(threshold > 1.0)) throw UsageError("--threshold must exceed 1");
    Manifest manifest("simulate");
    manifest.capture(sub);
    for (std::size_t i = 0; i < paths; ++i) manifest.seed(seed + i);
    const auto system = sys.build(manifest);
    AuditConfig cfg;
    cfg.horizon = n;
    cfg.threshold = threshold;
    cfg.strategies = load_battery(battery, terms, system, manifest);
    const auto r =
        consistency_simulation(system, policy_from_name(policy), paths, cfg, seed, threads);
    emit(report, dump(wrap(manifest, to_json(r))));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intrand: randomness audits under interval forecasts"};
  app.set_version_flag("--version", INTRAND_VERSION);
  app.require_subcommand(1);

  GenerateCmd generate;
  AuditCmd audit_cmd;
  SweepCmd sweep;
  FrequencyCmd frequency;
  ExpectCmd expect;
  DemoNearHalfCmd demo;
  SimulateCmd simulate;
  generate.add(app);
  audit_cmd.add(app);
  sweep.add(app);
  frequency.add(app);
  expect.add(app);
  demo.add(app);
  simulate.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const StrategyContractError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "bad JSON input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitContract;
  }
  return std::max(audit_cmd.exit_code, frequency.exit_code);
}
