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

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intrand/forecast.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/outcome.hpp"
#include "json.hpp"

namespace intrand {

/// Raised when a strategy breaks its own contract, e.g. returns a negative
/// multiplier.
class StrategyContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A multiplier process: maps each situation to a non-negative gamble. The
/// capital it generates is the running product of the multipliers along a
/// path. Instances are immutable and cheap to copy.
class MultiplierStrategy {
 public:
  using Fn = std::function<Gamble(Situation)>;

  MultiplierStrategy(std::string name, nlohmann::json params, Fn fn)
      : name_(std::move(name)),
        params_(std::move(params)),
        fn_(std::make_shared<const Fn>(std::move(fn))) {}

  static MultiplierStrategy identity() {
    return {"identity", nlohmann::json::object(),
            [](Situation) { return Gamble::constant(1.0); }};
  }

  static MultiplierStrategy constant(Gamble g) {
    return {"constant", {{"f1", g.f1}, {"f0", g.f0}},
            [g](Situation) { return g; }};
  }

  Gamble operator()(Situation s) const { return (*fn_)(s); }

  const std::string& name() const noexcept { return name_; }
  const nlohmann::json& params() const noexcept { return params_; }

 private:
  std::string name_;
  nlohmann::json params_;
  std::shared_ptr<const Fn> fn_;
};

/// Log-capital along a path: entry k is log T(x_1..x_k), entry 0 is the root
/// (log 1 = 0). Exact zero capital is -infinity and absorbing.
struct LogTrajectory {
  std::vector<double> log_values;

  std::size_t steps() const noexcept {
    return log_values.empty() ? 0 : log_values.size() - 1;
  }
  double capital(std::size_t k) const { return std::exp(log_values.at(k)); }
  double final_log() const { return log_values.back(); }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Capital of `strategy` along the first `horizon` outcomes of `path`, with
/// T(root) = 1 and T(sx) = T(s) * D(s)(x).
inline LogTrajectory capital_from_multiplier(const MultiplierStrategy& strategy,
                                             Situation path,
                                             std::size_t horizon) {
  if (horizon > path.size()) {
    throw std::invalid_argument("capital_from_multiplier: horizon exceeds path");
  }
  LogTrajectory out;
  out.log_values.resize(horizon + 1);
  double log_capital = 0.0;
  out.log_values[0] = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const Gamble d = strategy(path.first(k));
    const double factor = d(path[k]);
    if (!(d.f1 >= 0.0 && d.f0 >= 0.0) || !d.finite()) {
      throw StrategyContractError("strategy '" + strategy.name() +
                                  "' returned an invalid multiplier at step " +
                                  std::to_string(k + 1));
    }
    if (log_capital != kNegInf) {
      log_capital = factor == 0.0 ? kNegInf : log_capital + std::log(factor);
    }
    out.log_values[k + 1] = log_capital;
  }
  return out;
}

struct Violation {
  Path situation;
  double excess;  // amount by which the bound is exceeded
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::size_t checked = 0;

  bool ok() const noexcept { return violations.empty(); }
  double max_excess() const noexcept {
    double m = 0.0;
    for (const auto& v : violations) m = std::max(m, v.excess);
    return m;
  }
};

/// Excess of the upper expectation of a multiplier over 1; positive means the
/// supermartingale-multiplier condition fails at this situation.
inline double multiplier_excess(const IntervalForecast& forecast, Gamble d) {
  if (!(d.f1 >= 0.0 && d.f0 >= 0.0) || !d.finite()) {
    return std::numeric_limits<double>::infinity();
  }
  return upper_expectation(forecast, d) - 1.0;
}

/// Checks that the upper expectation of D(s) under system(s) is at most
/// 1 + tol for every given situation. Violations are data.
template <typename SituationRange>
ValidationReport validate_multiplier(const MultiplierStrategy& strategy,
                                     const ForecastingSystem& system,
                                     const SituationRange& situations,
                                     double tol = 1e-9) {
  ValidationReport report;
  for (const auto& s : situations) {
    const Situation view(s);
    const double excess = multiplier_excess(system(view), strategy(view));
    ++report.checked;
    if (excess > tol) {
      report.violations.push_back({Path(view.begin(), view.end()), excess});
    }
  }
  return report;
}

/// Same check for every prefix of `path` of length < horizon.
inline std::optional<Violation> first_violation_along_path(
    const MultiplierStrategy& strategy, const ForecastingSystem& system,
    Situation path, std::size_t horizon, double tol = 1e-9) {
  for (std::size_t k = 0; k < horizon; ++k) {
    const Situation s = path.first(k);
    const double excess = multiplier_excess(system(s), strategy(s));
    if (excess > tol) return Violation{Path(s.begin(), s.end()), excess};
  }
  return std::nullopt;
}

/// A real process on the complete tree of situations of length <= depth.
/// levels[k][i] is the value at the length-k situation with index i (first
/// bit most significant).
class TreeProcess {
 public:
  static TreeProcess from_levels(std::vector<std::vector<double>> levels) {
    if (levels.empty()) {
      throw std::invalid_argument("tree process needs at least the root");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (levels[k].size() != (std::size_t{1} << k)) {
        throw std::invalid_argument("incomplete subtree at depth " +
                                    std::to_string(k));
      }
    }
    TreeProcess t;
    t.levels_ = std::move(levels);
    return t;
  }

  /// Values keyed by bit string ("" for the root); every situation of length
  /// <= depth must be present.
  static TreeProcess from_map(const std::map<std::string, double>& values,
                              std::size_t depth) {
    std::vector<std::vector<double>> levels(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) {
      levels[k].resize(std::size_t{1} << k);
      for (std::uint64_t i = 0; i < levels[k].size(); ++i) {
        const auto key = to_bits(situation_from_index(i, k));
        const auto it = values.find(key);
        if (it == values.end()) {
          throw std::invalid_argument("incomplete subtree: missing situation '" +
                                      key + "'");
        }
        levels[k][i] = it->second;
      }
    }
    return from_levels(std::move(levels));
  }

  template <typename Fn>
  static TreeProcess from_function(std::size_t depth, Fn&& fn) {
    std::vector<std::vector<double>> levels(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) {
      levels[k].resize(std::size_t{1} << k);
      for (std::uint64_t i = 0; i < levels[k].size(); ++i) {
        const Path s = situation_from_index(i, k);
        levels[k][i] = fn(Situation(s));
      }
    }
    return from_levels(std::move(levels));
  }

  std::size_t depth() const noexcept { return levels_.size() - 1; }
  double at(std::size_t length, std::uint64_t index) const {
    return levels_.at(length).at(index);
  }
  double at(Situation s) const { return at(s.size(), index_of(s)); }
  const std::vector<std::vector<double>>& levels() const noexcept {
    return levels_;
  }

 private:
  std::vector<std::vector<double>> levels_;
};

/// Checks that the process difference F(s.) - F(s) has upper expectation at
/// most tol under system(s) at every internal situation.
inline ValidationReport validate_supermartingale(const TreeProcess& process,
                                                 const ForecastingSystem& system,
                                                 double tol = 1e-9) {
  ValidationReport report;
  for (std::size_t k = 0; k < process.depth(); ++k) {
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
      const Path s = situation_from_index(i, k);
      const double here = process.at(k, i);
      const Gamble delta{process.at(k + 1, 2 * i + 1) - here,
                         process.at(k + 1, 2 * i) - here};
      const double excess = upper_expectation(system(s), delta);
      ++report.checked;
      if (excess > tol) report.violations.push_back({s, excess});
    }
  }
  return report;
}

/// A gamble on paths that depends only on the first `depth` outcomes. values
/// is indexed like TreeProcess leaves: first bit most significant.
struct FiniteGamble {
  std::size_t depth = 0;
  std::vector<double> values{0.0};

  static FiniteGamble make(std::size_t depth, std::vector<double> values) {
    if (depth > 62 || values.size() != (std::size_t{1} << depth)) {
      throw std::invalid_argument("finite gamble needs 2^depth values");
    }
    return {depth, std::move(values)};
  }

  template <typename Fn>
  static FiniteGamble from_function(std::size_t depth, Fn&& fn) {
    std::vector<double> values(std::size_t{1} << depth);
    for (std::uint64_t i = 0; i < values.size(); ++i) {
      const Path s = situation_from_index(i, depth);
      values[i] = fn(Situation(s));
    }
    return {depth, std::move(values)};
  }

  friend FiniteGamble operator-(FiniteGamble g) {
    for (double& v : g.values) v = -v;
    return g;
  }
};

inline constexpr std::size_t kMaxExpectationDepth = 20;

/// Lower expectation of a finite-horizon gamble by backward induction,
/// applying the local lower expectation of system(s) at each node.
inline double finite_horizon_lower_expectation(const ForecastingSystem& system,
                                               const FiniteGamble& g) {
  if (g.depth > kMaxExpectationDepth) {
    throw std::length_error("finite-horizon expectation: depth exceeds 20");
  }
  if (g.values.size() != (std::size_t{1} << g.depth)) {
    throw std::invalid_argument("finite gamble needs 2^depth values");
  }
  std::vector<double> level = g.values;
  for (std::size_t k = g.depth; k-- > 0;) {
    std::vector<double> parent(std::size_t{1} << k);
    for (std::uint64_t i = 0; i < parent.size(); ++i) {
      const Path s = situation_from_index(i, k);
      parent[i] = lower_expectation(system(s), Gamble{level[2 * i + 1], level[2 * i]});
    }
    level = std::move(parent);
  }
  return level[0];
}

inline double finite_horizon_upper_expectation(const ForecastingSystem& system,
                                               const FiniteGamble& g) {
  return -finite_horizon_lower_expectation(system, -g);
}

enum class Verdict { no_evidence, reject };

inline const char* to_string(Verdict v) noexcept {
  return v == Verdict::reject ? "REJECT" : "NO-EVIDENCE";
}

struct VilleVerdict {
  Verdict verdict = Verdict::no_evidence;
  double max_log_capital = 0.0;
  std::size_t argmax_step = 0;
  std::optional<std::size_t> crossing_step;  // first step with T >= K
};

/// Rejects when the capital ever reaches K. By Ville's inequality this has
/// probability at most 1/K under the forecasting system the capital is a test
/// supermartingale for. K may be +infinity.
inline VilleVerdict ville_threshold_verdict(const LogTrajectory& trajectory,
                                            double threshold) {
  if (!(threshold > 1.0)) {
    throw std::invalid_argument("Ville threshold must exceed 1");
  }
  const double log_threshold = std::log(threshold);
  VilleVerdict out;
  out.max_log_capital = kNegInf;
  for (std::size_t k = 0; k < trajectory.log_values.size(); ++k) {
    const double v = trajectory.log_values[k];
    if (v > out.max_log_capital) {
      out.max_log_capital = v;
      out.argmax_step = k;
    }
    if (!out.crossing_step && v >= log_threshold) out.crossing_step = k;
  }
  if (out.crossing_step) out.verdict = Verdict::reject;
  return out;
}

}  // namespace intrand
