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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intrand/capital_process.hpp"
#include "intrand/forecast.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/selection.hpp"
#include "intrand/tree.hpp"
#include "json.hpp"

namespace intrand {

/// 1-based index of the outcome produced from situation s.
inline std::int64_t step_index(Situation s) noexcept {
  return static_cast<std::int64_t>(s.size()) + 1;
}

// ---------------------------------------------------------------------------
// Hellinger-type multipliers against the near-half system.

/// x -> e^{1/(2(n+1))} sqrt(2 p~_n(x)), with p~_n(1) = p_n, p~_n(0) = 1 - p_n.
/// Its expectation under the precise forecast 1/2 is 1.
inline Gamble hellinger_half(std::int64_t n) {
  const double p = near_half_probability(n);
  const double scale = std::exp(0.5 / static_cast<double>(n + 1));
  return {scale * std::sqrt(2.0 * p), scale * std::sqrt(2.0 * (1.0 - p))};
}

/// x -> e^{1/(2(n+1))} / sqrt(2 p~_n(x)). Its expectation under p_n is 1.
inline Gamble hellinger_near_half(std::int64_t n) {
  const double p = near_half_probability(n);
  const double scale = std::exp(0.5 / static_cast<double>(n + 1));
  return {scale / std::sqrt(2.0 * p), scale / std::sqrt(2.0 * (1.0 - p))};
}

inline MultiplierStrategy hellinger_half_strategy() {
  return {"hellinger-half", nlohmann::json::object(),
          [](Situation s) { return hellinger_half(step_index(s)); }};
}

inline MultiplierStrategy hellinger_near_half_strategy() {
  return {"hellinger-near-half", nlohmann::json::object(),
          [](Situation s) { return hellinger_near_half(step_index(s)); }};
}

// ---------------------------------------------------------------------------
// Strategy transformers.

enum class Parity { odd, even };

inline const char* to_string(Parity p) noexcept {
  return p == Parity::odd ? "odd" : "even";
}

/// D(s) on steps whose 1-based index n has the kept parity, (1, 1) elsewhere.
inline MultiplierStrategy parity_masked(MultiplierStrategy base, Parity keep) {
  nlohmann::json params{{"base", {{"name", base.name()}, {"params", base.params()}}},
                        {"keep", to_string(keep)}};
  const std::int64_t want = keep == Parity::odd ? 1 : 0;
  return {base.name() + "/masked-" + to_string(keep), std::move(params),
          [base = std::move(base), want](Situation s) {
            return step_index(s) % 2 == want ? base(s) : Gamble::constant(1.0);
          }};
}

/// (1, 1) before step n_start, D from step n_start on.
inline MultiplierStrategy tail_switch(MultiplierStrategy base, std::int64_t n_start) {
  if (n_start < 1) throw std::invalid_argument("tail_switch needs n_start >= 1");
  nlohmann::json params{{"base", {{"name", base.name()}, {"params", base.params()}}},
                        {"n_start", n_start}};
  return {base.name() + "/from-" + std::to_string(n_start), std::move(params),
          [base = std::move(base), n_start](Situation s) {
            return step_index(s) < n_start ? Gamble::constant(1.0) : base(s);
          }};
}

/// Smallest n with delta_n <= alpha, from the closed form
/// ceil(-1 / ln((1 + sqrt(1 - 4 alpha^2)) / 2) - 1).
inline std::int64_t n_alpha_closed_form(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::domain_error("n_alpha needs 0 < alpha < 1/2");
  }
  const double c = 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * alpha * alpha));
  const double n = std::ceil(-1.0 / std::log(c) - 1.0);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

/// Same quantity by scanning delta_n.
inline std::int64_t n_alpha_scan(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::domain_error("n_alpha needs 0 < alpha < 1/2");
  }
  std::int64_t n = 1;
  while (delta_n(n) > alpha) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Calibration (law-of-large-numbers) strategies.

/// The submartingale S with S(root) = 0 and increments
/// dS(s) = f - lower_expectation(system(s), f).
struct SubmartingaleS {
  Gamble f;
  ForecastingSystem system;

  Gamble delta(Situation s) const { return f - lower_expectation(system(s), f); }
  /// Bound on |dS|: max{1, |f(1) - f(0)|}.
  double bound() const { return std::max(1.0, f.range()); }
};

struct CalibrationParams {
  double epsilon;
  double xi;
  double bound;

  /// xi = epsilon / (2 B^2) with B = max{1, |f(1) - f(0)|}.
  static CalibrationParams for_epsilon(Gamble f, double epsilon) {
    const double b = std::max(1.0, f.range());
    if (!(epsilon > 0.0 && epsilon < b)) {
      throw std::invalid_argument("calibration epsilon must lie in (0, B)");
    }
    return {epsilon, epsilon / (2.0 * b * b), b};
  }
};

/// D(s) = 1 - xi sel(s) dS(s). Every value is at least 1 - xi B > 0, and the
/// upper expectation equals 1 - xi sel(s) E(dS(s)) = 1.
inline MultiplierStrategy calibration_strategy(const SubmartingaleS& s,
                                               const SelectionProcess& sel,
                                               const CalibrationParams& params) {
  if (!(params.xi > 0.0 && params.xi * params.bound < 1.0)) {
    throw std::invalid_argument("calibration strategy needs 0 < xi < 1/B");
  }
  if (params.bound < s.bound()) {
    throw std::invalid_argument("calibration bound B is smaller than max{1, |f|}");
  }
  nlohmann::json j{{"f1", s.f.f1},        {"f0", s.f.f0},
                   {"selection", sel.name()}, {"epsilon", params.epsilon},
                   {"xi", params.xi},     {"B", params.bound},
                   {"system", to_json(s.system)}};
  return {"calibration", std::move(j), [s, sel, xi = params.xi](Situation sit) {
            if (!sel(sit)) return Gamble::constant(1.0);
            const Gamble d = s.delta(sit);
            return Gamble{1.0 - xi * d.f1, 1.0 - xi * d.f0};
          }};
}

namespace detail {

/// sum_{r=1}^R 2^-r P^(r) + 2^-R where P^(r) is the calibration strategy with
/// xi_r = 1 / (2^{r+1} B^2). All components share dS, so they are advanced
/// together.
class CalibrationMixture final : public CapitalProcess::Impl {
 public:
  CalibrationMixture(SubmartingaleS s, SelectionProcess sel, int terms)
      : s_(std::move(s)), sel_(std::move(sel)), terms_(terms) {
    const double b = s_.bound();
    for (int r = 1; r <= terms_; ++r) {
      xi_.push_back(1.0 / (std::ldexp(1.0, r + 1) * b * b));
    }
  }

  LogTrajectory trajectory(Situation path, std::size_t horizon) const override {
    std::vector<double> logs(xi_.size(), 0.0);
    LogTrajectory out;
    out.log_values.resize(horizon + 1);
    out.log_values[0] = 0.0;
    const double log_rest = -terms_ * std::log(2.0);
    for (std::size_t k = 0; k < horizon; ++k) {
      const Situation s = path.first(k);
      if (sel_(s)) {
        const double d = s_.delta(s)(path[k]);
        for (std::size_t r = 0; r < xi_.size(); ++r) {
          logs[r] += std::log1p(-xi_[r] * d);
        }
      }
      double total = log_rest;
      for (std::size_t r = 0; r < xi_.size(); ++r) {
        total = log_add(total, -static_cast<double>(r + 1) * std::log(2.0) + logs[r]);
      }
      out.log_values[k + 1] = total;
    }
    return out;
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol) const override {
    for (std::size_t k = 0; k < horizon; ++k) {
      const Situation s = path.first(k);
      if (!sel_(s)) continue;
      const Gamble d = s_.delta(s);
      const Gamble m{1.0 - xi_[0] * d.f1, 1.0 - xi_[0] * d.f0};
      const double excess = multiplier_excess(system(s), m);
      if (excess > tol) {
        return ContractViolation{"calibration-mixture",
                                 {Path(s.begin(), s.end()), excess}};
      }
    }
    return std::nullopt;
  }

 private:
  SubmartingaleS s_;
  SelectionProcess sel_;
  int terms_;
  std::vector<double> xi_;
};

}  // namespace detail

/// The individual calibration strategies P^(r), r = 1..terms, with
/// epsilon_r = 2^-r.
inline std::vector<MultiplierStrategy> mixture_calibration_components(
    const ForecastingSystem& system, Gamble f, const SelectionProcess& sel,
    int terms) {
  std::vector<MultiplierStrategy> out;
  const SubmartingaleS s{f, system};
  for (int r = 1; r <= terms; ++r) {
    out.push_back(calibration_strategy(
        s, sel, CalibrationParams::for_epsilon(f, std::ldexp(1.0, -r))));
  }
  return out;
}

/// Truncated mixture of calibration strategies with weights 2^-r and the
/// residual weight 2^-terms kept as a constant, so the weights sum to 1.
inline CapitalProcess mixture_calibration(const ForecastingSystem& system, Gamble f,
                                          const SelectionProcess& sel, int terms = 20) {
  if (terms < 1) throw std::invalid_argument("mixture_calibration needs R >= 1");
  nlohmann::json params{{"f1", f.f1},
                        {"f0", f.f0},
                        {"selection", sel.name()},
                        {"R", terms},
                        {"system", to_json(system)}};
  return CapitalProcess(
      "calibration-mixture", std::move(params),
      std::make_shared<detail::CalibrationMixture>(SubmartingaleS{f, system}, sel,
                                                   terms));
}

// ---------------------------------------------------------------------------
// Splitting a multiplier into a below-1-on-one and a below-1-on-zero part.

struct SplitMultiplier {
  MultiplierStrategy inner;  // D_I: (min{D(1), 1}, max{D(0), 1})
  MultiplierStrategy outer;  // D_J: (max{D(1), 1}, min{D(0), 1})

  /// At most one of D(1) > 1, D(0) > 1. This is what a supermartingale
  /// multiplier for a nondegenerate interval satisfies, and what makes both
  /// halves inherit validity.
  static bool one_sided(Gamble d) noexcept { return !(d.f1 > 1.0 && d.f0 > 1.0); }

  /// D_I(s) * D_J(s) == D(s).
  static bool product_matches(Gamble d, Gamble inner, Gamble outer) noexcept {
    return inner * outer == d;
  }
};

inline Gamble split_inner(Gamble d) noexcept {
  return {std::min(d.f1, 1.0), std::max(d.f0, 1.0)};
}

inline Gamble split_outer(Gamble d) noexcept {
  return {std::max(d.f1, 1.0), std::min(d.f0, 1.0)};
}

inline SplitMultiplier split_multiplier(const MultiplierStrategy& d) {
  nlohmann::json base{{"name", d.name()}, {"params", d.params()}};
  return {
      MultiplierStrategy(d.name() + "/inner", {{"base", base}},
                         [d](Situation s) { return split_inner(d(s)); }),
      MultiplierStrategy(d.name() + "/outer", {{"base", base}},
                         [d](Situation s) { return split_outer(d(s)); }),
  };
}

// ---------------------------------------------------------------------------
// Endpoint bets: the sweep workhorse.

enum class Direction { high, low };

inline const char* to_string(Direction d) noexcept {
  return d == Direction::high ? "high" : "low";
}

/// high: (1 + lam (1 - u), 1 - lam u), expectation 1 + lam (p - u).
/// low:  (1 - lam (1 - l), 1 + lam l), expectation 1 + lam (l - p).
inline Gamble endpoint_gamble(const IntervalForecast& i, double lam, Direction dir) {
  if (dir == Direction::high) {
    return {1.0 + lam * (1.0 - i.upper()), 1.0 - lam * i.upper()};
  }
  return {1.0 - lam * (1.0 - i.lower()), 1.0 + lam * i.lower()};
}

inline void check_lambda(double lam) {
  if (!(lam > 0.0 && lam <= 1.0)) {
    throw std::invalid_argument("endpoint bet needs lambda in (0, 1]");
  }
}

inline MultiplierStrategy endpoint_bet(const IntervalForecast& i, double lam,
                                       Direction dir) {
  check_lambda(lam);
  const Gamble g = endpoint_gamble(i, lam, dir);
  return {std::string("endpoint-") + to_string(dir),
          {{"lower", i.lower()}, {"upper", i.upper()}, {"lambda", lam},
           {"direction", to_string(dir)}},
          [g](Situation) { return g; }};
}

/// Endpoint bet against the forecast the system issues at each situation.
inline MultiplierStrategy endpoint_bet(const ForecastingSystem& system, double lam,
                                       Direction dir) {
  check_lambda(lam);
  return {std::string("endpoint-") + to_string(dir),
          {{"system", to_json(system)}, {"lambda", lam}, {"direction", to_string(dir)}},
          [system, lam, dir](Situation s) { return endpoint_gamble(system(s), lam, dir); }};
}

}  // namespace intrand
