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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intrand/capital_process.hpp"
#include "intrand/forecast.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/gen.hpp"
#include "intrand/parallel.hpp"
#include "intrand/selection.hpp"
#include "intrand/strategies.hpp"
#include "intrand/tree.hpp"

namespace intrand {

inline constexpr double kDefaultVilleThreshold = 100.0;

// ---------------------------------------------------------------------------
// Selected frequencies.

/// Average of the selected increments f(x_{k+1}) - lower_expectation(system(s), f)
/// over the first n steps; 0 when nothing is selected.
inline double selected_average(Situation path, std::size_t n,
                               const SelectionProcess& sel, Gamble f,
                               const ForecastingSystem& system) {
  if (n > path.size()) throw std::invalid_argument("selected_average: n exceeds path");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Situation s = path.first(k);
    if (!sel(s)) continue;
    sum += f(path[k]) - lower_expectation(system(s), f);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// 4 sqrt(ln(max(m, 2)) / m): finite-sample envelope for selected
/// frequencies over m selected steps.
inline double frequency_slack(std::size_t m) {
  if (m == 0) return std::numeric_limits<double>::infinity();
  const double dm = static_cast<double>(m);
  return 4.0 * std::sqrt(std::log(std::max(dm, 2.0)) / dm);
}

struct ChurchCheck {
  std::size_t selected = 0;
  std::optional<double> frequency;  // empty when nothing was selected
  std::optional<bool> within_bounds;
  double slack = std::numeric_limits<double>::infinity();
};

inline ChurchCheck church_check(Situation path, std::size_t n,
                                const SelectionProcess& sel,
                                const IntervalForecast& interval) {
  if (n > path.size()) throw std::invalid_argument("church_check: n exceeds path");
  ChurchCheck out;
  std::size_t ones = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!sel(path.first(k))) continue;
    ++out.selected;
    ones += static_cast<std::size_t>(bit(path[k]));
  }
  if (out.selected == 0) return out;
  const double freq = static_cast<double>(ones) / static_cast<double>(out.selected);
  out.frequency = freq;
  out.slack = frequency_slack(out.selected);
  out.within_bounds = freq >= interval.lower() - out.slack &&
                      freq <= interval.upper() + out.slack;
  return out;
}

/// Selected frequency checked against a general (non-stationary) system: the
/// selected averages of x - lower(s) and upper(s) - x must both be >= -slack.
struct FrequencySummary {
  std::string selection;
  std::size_t selected = 0;
  std::optional<double> frequency;
  double lower_margin = 0.0;  // selected average of x - lower forecast
  double upper_margin = 0.0;  // selected average of upper forecast - x
  double slack = std::numeric_limits<double>::infinity();
  std::optional<bool> within_bounds;
};

inline FrequencySummary frequency_summary(Situation path, std::size_t n,
                                          const SelectionProcess& sel,
                                          const ForecastingSystem& system) {
  FrequencySummary out;
  out.selection = sel.name();
  std::size_t ones = 0;
  double lower_sum = 0.0;
  double upper_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Situation s = path.first(k);
    if (!sel(s)) continue;
    const IntervalForecast i = system(s);
    const int x = bit(path[k]);
    ++out.selected;
    ones += static_cast<std::size_t>(x);
    lower_sum += x - i.lower();
    upper_sum += i.upper() - x;
  }
  if (out.selected == 0) return out;
  const double m = static_cast<double>(out.selected);
  out.frequency = static_cast<double>(ones) / m;
  out.lower_margin = lower_sum / m;
  out.upper_margin = upper_sum / m;
  out.slack = frequency_slack(out.selected);
  out.within_bounds = out.lower_margin >= -out.slack && out.upper_margin >= -out.slack;
  return out;
}

// ---------------------------------------------------------------------------
// Auditing.

struct AuditConfig {
  std::size_t horizon = 0;
  double threshold = kDefaultVilleThreshold;
  std::vector<CapitalProcess> strategies;
  double tolerance = 1e-9;
  std::vector<SelectionProcess> selections;
  bool keep_trajectories = false;
};

struct StrategyResult {
  std::string name;
  nlohmann::json params;
  Verdict verdict = Verdict::no_evidence;
  double max_log_capital = 0.0;
  std::size_t argmax_step = 0;
  double final_log_capital = 0.0;
  std::optional<std::size_t> crossing_step;
  std::optional<std::string> error;  // contract violation, excluded from verdict
  LogTrajectory trajectory;  // only filled when requested
};

struct AuditReport {
  std::size_t horizon = 0;
  double threshold = kDefaultVilleThreshold;
  std::vector<StrategyResult> strategies;
  std::vector<FrequencySummary> frequencies;
  Verdict verdict = Verdict::no_evidence;
  bool contract_violation = false;
};

inline StrategyResult run_strategy(const CapitalProcess& process, Situation path,
                                   const ForecastingSystem& system,
                                   const AuditConfig& cfg) {
  StrategyResult r;
  r.name = process.name();
  r.params = process.params();
  try {
    if (auto v = process.check(system, path, cfg.horizon, cfg.tolerance)) {
      r.error = "'" + v->component + "' is not a supermartingale multiplier at situation '" +
                to_bits(v->where.situation) + "' (excess " +
                std::to_string(v->where.excess) + ")";
    }
    auto t = process.trajectory(path, cfg.horizon);
    const auto verdict = ville_threshold_verdict(t, cfg.threshold);
    r.max_log_capital = verdict.max_log_capital;
    r.argmax_step = verdict.argmax_step;
    r.final_log_capital = t.final_log();
    r.crossing_step = verdict.crossing_step;
    r.verdict = verdict.verdict;
    if (cfg.keep_trajectories) r.trajectory = std::move(t);
  } catch (const StrategyContractError& e) {
    r.error = e.what();
  }
  return r;
}

/// Runs every strategy of the battery along the path. Overall REJECT iff some
/// strategy without a contract violation reaches the threshold.
inline AuditReport audit(Situation path, const ForecastingSystem& system,
                         const AuditConfig& cfg) {
  if (cfg.horizon > path.size()) throw std::invalid_argument("audit: horizon exceeds path");
  if (!(cfg.threshold > 1.0)) throw std::invalid_argument("audit: threshold must exceed 1");
  AuditReport report;
  report.horizon = cfg.horizon;
  report.threshold = cfg.threshold;
  for (const auto& process : cfg.strategies) {
    auto r = run_strategy(process, path, system, cfg);
    if (r.error) {
      report.contract_violation = true;
    } else if (r.verdict == Verdict::reject) {
      report.verdict = Verdict::reject;
    }
    report.strategies.push_back(std::move(r));
  }
  for (const auto& sel : cfg.selections) {
    report.frequencies.push_back(frequency_summary(path, cfg.horizon, sel, system));
  }
  return report;
}

inline const std::vector<double>& default_lambdas() {
  static const std::vector<double> kLambdas{1.0, 0.5, 0.25, 0.125};
  return kLambdas;
}

inline std::vector<SelectionProcess> default_selections() {
  return {SelectionProcess::all(), SelectionProcess::even(), SelectionProcess::odd()};
}

/// Two test supermartingales for `system`: the equal-weight mixture of the
/// system-relative endpoint bets (both directions, lambda in {1, 1/2, 1/4,
/// 1/8}), and the equal-weight mixture of calibration mixtures for x and -x
/// under the all/even/odd selections. Mixing keeps the family-wise false
/// rejection rate at most 2/K.
inline std::vector<CapitalProcess> standard_battery(const ForecastingSystem& system,
                                                   int mixture_terms = 20) {
  std::vector<CapitalProcess> endpoints;
  for (Direction dir : {Direction::high, Direction::low}) {
    for (double lam : default_lambdas()) {
      endpoints.push_back(CapitalProcess::from_multiplier(endpoint_bet(system, lam, dir)));
    }
  }
  std::vector<CapitalProcess> calibration;
  for (Gamble f : {Gamble::indicator(), -Gamble::indicator()}) {
    for (const auto& sel : default_selections()) {
      calibration.push_back(mixture_calibration(system, f, sel, mixture_terms));
    }
  }
  return {uniform_mixture("endpoint-mixture", endpoints),
          uniform_mixture("calibration-mixture-battery", calibration)};
}

// ---------------------------------------------------------------------------
// Stationary-interval sweep.

struct SweepConfig {
  std::size_t horizon = 0;
  double threshold = kDefaultVilleThreshold;
  std::vector<double> lambdas = default_lambdas();
  bool include_calibration = true;
  std::vector<SelectionProcess> selections = default_selections();
  int mixture_terms = 20;
  std::size_t threads = 0;
};

struct SweepCell {
  double lower;
  double upper;
  Verdict verdict;
  Verdict raw_verdict;  // before propagating rejections to subsets
  double max_log_capital;
};

struct SweepReport {
  double grid_step = 0.0;
  std::size_t grid_points = 0;  // values i / (grid_points - 1)
  std::size_t horizon = 0;
  double threshold = kDefaultVilleThreshold;
  std::vector<SweepCell> cells;  // l <= u, ordered by (l, u)
  std::vector<IntervalForecast> minimal_surviving;
  std::optional<double> lambda_hat;
  std::optional<double> upsilon_hat;
  std::size_t closure_changes = 0;

  const SweepCell& cell(std::size_t i, std::size_t j) const {
    return cells.at(cell_index(i, j));
  }
  std::size_t cell_index(std::size_t i, std::size_t j) const {
    // row i holds cells (i, i..m)
    const std::size_t m = grid_points;
    return i * m - i * (i - 1) / 2 + (j - i);
  }
  bool survives(std::size_t i, std::size_t j) const {
    return cell(i, j).verdict == Verdict::no_evidence;
  }

  /// True iff every grid superset of a surviving interval survives.
  bool upward_closed(bool raw = false) const {
    const std::size_t m = grid_points;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        const auto v = raw ? cell(i, j).raw_verdict : cell(i, j).verdict;
        if (v != Verdict::no_evidence) continue;
        if (i > 0) {
          const auto w = raw ? cell(i - 1, j).raw_verdict : cell(i - 1, j).verdict;
          if (w != Verdict::no_evidence) return false;
        }
        if (j + 1 < m) {
          const auto w = raw ? cell(i, j + 1).raw_verdict : cell(i, j + 1).verdict;
          if (w != Verdict::no_evidence) return false;
        }
      }
    }
    return true;
  }
};

/// Number of grid intervals for step h; h must be in [0.01, 0.25] and divide 1.
inline std::size_t grid_divisions(double h) {
  if (!(h >= 0.01 - 1e-12 && h <= 0.25 + 1e-12)) {
    throw std::invalid_argument("grid step must lie in [0.01, 0.25]");
  }
  const double m = std::round(1.0 / h);
  if (std::abs(m * h - 1.0) > 1e-9) {
    throw std::invalid_argument("grid step must divide 1");
  }
  return static_cast<std::size_t>(m);
}

namespace detail {

struct SideResult {
  double max_log = kNegInf;
  bool reject = false;
};

inline SideResult run_side(const std::vector<CapitalProcess>& battery, Situation path,
                           const SweepConfig& cfg) {
  SideResult out;
  for (const auto& process : battery) {
    const auto t = process.trajectory(path, cfg.horizon);
    const auto v = ville_threshold_verdict(t, cfg.threshold);
    out.max_log = std::max(out.max_log, v.max_log_capital);
    out.reject = out.reject || v.verdict == Verdict::reject;
  }
  return out;
}

}  // namespace detail

/// Strategies valid for every stationary interval with the given upper
/// endpoint (high side) or lower endpoint (low side). Every strategy in the
/// battery for [l, u] belongs to exactly one side.
inline std::vector<CapitalProcess> sweep_side_battery(double endpoint, Direction side,
                                                      const SweepConfig& cfg) {
  const IntervalForecast interval = side == Direction::high
                                        ? IntervalForecast(0.0, endpoint)
                                        : IntervalForecast(endpoint, 1.0);
  const auto system = ForecastingSystem::stationary(interval);
  std::vector<CapitalProcess> out;
  for (double lam : cfg.lambdas) {
    out.push_back(CapitalProcess::from_multiplier(endpoint_bet(interval, lam, side)));
  }
  if (cfg.include_calibration) {
    // x - l detects frequencies below l; u - x detects frequencies above u.
    const Gamble f = side == Direction::low ? Gamble::indicator() : -Gamble::indicator();
    for (const auto& sel : cfg.selections) {
      out.push_back(mixture_calibration(system, f, sel, cfg.mixture_terms));
    }
  }
  return out;
}

/// Tests every stationary interval [l, u] on the grid {0, h, ..., 1}. An
/// interval is rejected when some strategy valid for it, or for a grid
/// superset of it, reaches the threshold; the surviving set is therefore
/// upward closed under inclusion.
inline SweepReport sweep_constant_intervals(Situation path, double grid_step,
                                            const SweepConfig& cfg) {
  const std::size_t divisions = grid_divisions(grid_step);
  if (cfg.horizon > path.size()) throw std::invalid_argument("sweep: horizon exceeds path");
  if (!(cfg.threshold > 1.0)) throw std::invalid_argument("sweep: threshold must exceed 1");
  const std::size_t m = divisions + 1;
  std::vector<double> grid(m);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(divisions);
  }

  std::vector<detail::SideResult> low(m), high(m);
  parallel_for(
      2 * m,
      [&](std::size_t unit) {
        const std::size_t i = unit % m;
        const Direction side = unit < m ? Direction::low : Direction::high;
        const auto battery = sweep_side_battery(grid[i], side, cfg);
        (side == Direction::low ? low : high)[i] = detail::run_side(battery, path, cfg);
      },
      cfg.threads);

  SweepReport report;
  report.grid_step = grid_step;
  report.grid_points = m;
  report.horizon = cfg.horizon;
  report.threshold = cfg.threshold;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const bool raw = low[i].reject || high[j].reject;
      const Verdict v = raw ? Verdict::reject : Verdict::no_evidence;
      report.cells.push_back({grid[i], grid[j], v, v,
                              std::max(low[i].max_log, high[j].max_log)});
    }
  }
  // Supersets of (i, j) are (i', j') with i' <= i, j' >= j; sweep so that
  // (i - 1, j) and (i, j + 1) are final before (i, j).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = m; j-- > i;) {
      auto& c = report.cells[report.cell_index(i, j)];
      const bool inherited =
          (i > 0 && report.cell(i - 1, j).verdict == Verdict::reject) ||
          (j + 1 < m && report.cell(i, j + 1).verdict == Verdict::reject);
      if (inherited && c.verdict != Verdict::reject) {
        c.verdict = Verdict::reject;
        ++report.closure_changes;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      if (!report.survives(i, j)) continue;
      const bool smaller_survives =
          i < j && (report.survives(i + 1, j) || report.survives(i, j - 1));
      if (smaller_survives) continue;
      report.minimal_surviving.emplace_back(grid[i], grid[j]);
    }
  }
  for (const auto& i : report.minimal_surviving) {
    report.lambda_hat = std::max(report.lambda_hat.value_or(0.0), i.lower());
    report.upsilon_hat = std::min(report.upsilon_hat.value_or(1.0), i.upper());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Consistency simulation.

struct ConsistencyResult {
  std::size_t paths = 0;
  std::size_t rejections = 0;
  double reject_fraction = 0.0;
  double threshold = kDefaultVilleThreshold;
  double bound = 0.0;  // 1/K + 3 sqrt((1/K)(1 - 1/K)/paths)
};

inline double consistency_bound(double threshold, std::size_t paths) {
  const double level = 1.0 / threshold;
  return level + 3.0 * std::sqrt(level * (1.0 - level) / static_cast<double>(paths));
}

/// Samples `paths` paths from `system` (path i uses seed + i), audits each
/// against `system` itself and reports the fraction rejected.
inline ConsistencyResult consistency_simulation(const ForecastingSystem& system,
                                                const RealityPolicy& policy,
                                                std::size_t paths, AuditConfig cfg,
                                                std::uint64_t seed,
                                                std::size_t threads = 0) {
  if (paths == 0) throw std::invalid_argument("consistency_simulation needs paths >= 1");
  cfg.keep_trajectories = false;
  cfg.selections.clear();
  std::vector<char> rejected(paths, 0);
  parallel_for(
      paths,
      [&](std::size_t i) {
        const Path path = sample_path(system, policy, seed + i, cfg.horizon);
        const auto report = audit(path, system, cfg);
        if (report.contract_violation) {
          throw StrategyContractError("battery is not valid for the simulated system");
        }
        rejected[i] = report.verdict == Verdict::reject ? 1 : 0;
      },
      threads);
  ConsistencyResult out;
  out.paths = paths;
  out.threshold = cfg.threshold;
  for (char r : rejected) out.rejections += static_cast<std::size_t>(r);
  out.reject_fraction = static_cast<double>(out.rejections) / static_cast<double>(paths);
  out.bound = consistency_bound(cfg.threshold, paths);
  return out;
}

}  // namespace intrand
