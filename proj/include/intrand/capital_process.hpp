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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intrand/forecasting_system.hpp"
#include "intrand/outcome.hpp"
#include "intrand/tree.hpp"
#include "json.hpp"

namespace intrand {

/// A contract violation found while checking a capital process against a
/// forecasting system along a path.
struct ContractViolation {
  std::string component;
  Violation where;
};

/// A non-negative real process with value 1 at the root, evaluated along a
/// path in log-domain. Wraps either a multiplier strategy or a combination of
/// other capital processes (mixtures, level caps).
class CapitalProcess {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual LogTrajectory trajectory(Situation path, std::size_t horizon) const = 0;
    /// First situation along the path where some underlying multiplier fails
    /// to be a supermartingale multiplier for `system`.
    virtual std::optional<ContractViolation> check(const ForecastingSystem& system,
                                                   Situation path,
                                                   std::size_t horizon,
                                                   double tol) const = 0;
  };

  CapitalProcess(std::string name, nlohmann::json params,
                 std::shared_ptr<const Impl> impl)
      : name_(std::move(name)), params_(std::move(params)), impl_(std::move(impl)) {}

  static CapitalProcess from_multiplier(MultiplierStrategy strategy);

  LogTrajectory trajectory(Situation path, std::size_t horizon) const {
    if (horizon > path.size()) {
      throw std::invalid_argument("capital process: horizon exceeds path");
    }
    return impl_->trajectory(path, horizon);
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol = 1e-9) const {
    return impl_->check(system, path, horizon, tol);
  }

  /// Values on the complete tree of depth `depth`, in linear scale.
  TreeProcess tree(std::size_t depth) const {
    std::vector<std::vector<double>> levels(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) levels[k].resize(std::size_t{1} << k);
    for (std::uint64_t leaf = 0; leaf < (std::uint64_t{1} << depth); ++leaf) {
      const Path p = situation_from_index(leaf, depth);
      const auto t = trajectory(p, depth);
      for (std::size_t k = 0; k <= depth; ++k) {
        levels[k][leaf >> (depth - k)] = std::exp(t.log_values[k]);
      }
    }
    return TreeProcess::from_levels(std::move(levels));
  }

  const std::string& name() const noexcept { return name_; }
  const nlohmann::json& params() const noexcept { return params_; }
  nlohmann::json describe() const { return {{"name", name_}, {"params", params_}}; }

 private:
  std::string name_;
  nlohmann::json params_;
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

class MultiplierCapital final : public CapitalProcess::Impl {
 public:
  explicit MultiplierCapital(MultiplierStrategy s) : strategy_(std::move(s)) {}

  LogTrajectory trajectory(Situation path, std::size_t horizon) const override {
    return capital_from_multiplier(strategy_, path, horizon);
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol) const override {
    if (auto v = first_violation_along_path(strategy_, system, path, horizon, tol)) {
      return ContractViolation{strategy_.name(), std::move(*v)};
    }
    return std::nullopt;
  }

 private:
  MultiplierStrategy strategy_;
};

/// log(exp(a) + exp(b)) with -inf handled.
inline double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

class MixtureCapital final : public CapitalProcess::Impl {
 public:
  MixtureCapital(std::vector<std::pair<double, CapitalProcess>> components,
                 double constant_weight)
      : components_(std::move(components)), constant_weight_(constant_weight) {}

  LogTrajectory trajectory(Situation path, std::size_t horizon) const override {
    std::vector<std::pair<double, LogTrajectory>> parts;
    for (const auto& [weight, process] : components_) {
      if (weight > 0.0) parts.emplace_back(weight, process.trajectory(path, horizon));
    }
    LogTrajectory out;
    out.log_values.assign(horizon + 1, kNegInf);
    for (std::size_t k = 0; k <= horizon; ++k) {
      double hi = constant_weight_ > 0.0 ? 0.0 : kNegInf;
      for (const auto& [w, t] : parts) hi = std::max(hi, t.log_values[k]);
      if (hi == kNegInf) continue;
      double sum = constant_weight_ * std::exp(-hi);
      for (const auto& [w, t] : parts) sum += w * std::exp(t.log_values[k] - hi);
      out.log_values[k] = hi + std::log(sum);
    }
    return out;
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol) const override {
    for (const auto& [weight, process] : components_) {
      if (auto v = process.check(system, path, horizon, tol)) return v;
    }
    return std::nullopt;
  }

 private:
  std::vector<std::pair<double, CapitalProcess>> components_;
  double constant_weight_;
};

/// Equal to the base process until it first reaches 2^level, then frozen at
/// exactly 2^level.
class CappedCapital final : public CapitalProcess::Impl {
 public:
  CappedCapital(CapitalProcess base, int level)
      : base_(std::move(base)), level_(level) {}

  static void cap_in_place(std::vector<double>& log_values, int level) {
    const double log_cap = level * std::log(2.0);
    bool frozen = false;
    for (double& v : log_values) {
      if (!frozen && v >= log_cap) frozen = true;
      if (frozen) v = log_cap;
    }
  }

  LogTrajectory trajectory(Situation path, std::size_t horizon) const override {
    auto t = base_.trajectory(path, horizon);
    cap_in_place(t.log_values, level_);
    return t;
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol) const override {
    return base_.check(system, path, horizon, tol);
  }

 private:
  CapitalProcess base_;
  int level_;
};

class CapAndMixCapital final : public CapitalProcess::Impl {
 public:
  CapAndMixCapital(CapitalProcess base, int levels)
      : base_(std::move(base)), levels_(levels) {}

  LogTrajectory trajectory(Situation path, std::size_t horizon) const override {
    const auto base = base_.trajectory(path, horizon);
    LogTrajectory out;
    out.log_values.assign(horizon + 1, -levels_ * std::log(2.0));
    for (int n = 1; n <= levels_; ++n) {
      auto capped = base.log_values;
      CappedCapital::cap_in_place(capped, n);
      const double log_weight = -n * std::log(2.0);
      for (std::size_t k = 0; k <= horizon; ++k) {
        out.log_values[k] = log_add(out.log_values[k], log_weight + capped[k]);
      }
    }
    return out;
  }

  std::optional<ContractViolation> check(const ForecastingSystem& system,
                                         Situation path, std::size_t horizon,
                                         double tol) const override {
    return base_.check(system, path, horizon, tol);
  }

 private:
  CapitalProcess base_;
  int levels_;
};

}  // namespace detail

inline CapitalProcess CapitalProcess::from_multiplier(MultiplierStrategy strategy) {
  auto name = strategy.name();
  auto params = strategy.params();
  return CapitalProcess(std::move(name), std::move(params),
                        std::make_shared<detail::MultiplierCapital>(std::move(strategy)));
}

/// Sum of weight_i * T_i plus a constant. Weights must be non-negative and sum
/// (with the constant) to 1 so the result is again a test supermartingale.
inline CapitalProcess mixture(std::string name,
                              std::vector<std::pair<double, CapitalProcess>> components,
                              double constant_weight = 0.0) {
  double total = constant_weight;
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& [weight, process] : components) {
    if (!(weight >= 0.0)) throw std::invalid_argument("mixture weight must be >= 0");
    total += weight;
    parts.push_back({{"weight", weight}, {"component", process.describe()}});
  }
  if (!(constant_weight >= 0.0) || std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  nlohmann::json params{{"components", parts}, {"constant_weight", constant_weight}};
  return CapitalProcess(std::move(name), std::move(params),
                        std::make_shared<detail::MixtureCapital>(std::move(components),
                                                                 constant_weight));
}

/// Equal-weight mixture.
inline CapitalProcess uniform_mixture(std::string name,
                                      const std::vector<CapitalProcess>& components) {
  if (components.empty()) throw std::invalid_argument("empty mixture");
  std::vector<std::pair<double, CapitalProcess>> weighted;
  const double w = 1.0 / static_cast<double>(components.size());
  for (const auto& c : components) weighted.emplace_back(w, c);
  // Rounding can leave the weights a few ulps off 1; the constant absorbs it.
  double sum = 0.0;
  for (const auto& [weight, c] : weighted) sum += weight;
  return mixture(std::move(name), std::move(weighted), std::max(0.0, 1.0 - sum));
}

/// T^(level): freezes at 2^level once T has reached it.
inline CapitalProcess capped(CapitalProcess base, int level) {
  nlohmann::json params{{"base", base.describe()}, {"level", level}};
  return CapitalProcess("capped", std::move(params),
                        std::make_shared<detail::CappedCapital>(std::move(base), level));
}

/// T' = sum_{n=1}^{levels} 2^-n T^(n) + 2^-levels. After T reaches 2^k, T' is
/// at least k.
inline CapitalProcess cap_and_mix(CapitalProcess base, int levels = 40) {
  if (levels < 1) throw std::invalid_argument("cap_and_mix needs levels >= 1");
  nlohmann::json params{{"base", base.describe()}, {"levels", levels}};
  return CapitalProcess("cap-and-mix", std::move(params),
                        std::make_shared<detail::CapAndMixCapital>(std::move(base), levels));
}

}  // namespace intrand
