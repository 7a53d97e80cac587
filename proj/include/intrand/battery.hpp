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

#include <stdexcept>
#include <string>
#include <vector>

#include "intrand/audit.hpp"
#include "intrand/capital_process.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/selection.hpp"
#include "intrand/strategies.hpp"
#include "json.hpp"

namespace intrand {

// Strategy battery documents: {"strategies": [descriptor, ...]}. Endpoint and
// calibration descriptors without explicit forecasts are taken relative to
// the forecasting system under audit. See docs/formats.md.

inline Gamble gamble_from_json(const nlohmann::json& j, Gamble fallback) {
  return {j.value("f1", fallback.f1), j.value("f0", fallback.f0)};
}

inline Direction direction_from_json(const nlohmann::json& j) {
  const auto d = j.at("direction").get<std::string>();
  if (d == "high") return Direction::high;
  if (d == "low") return Direction::low;
  throw std::invalid_argument("direction must be 'high' or 'low'");
}

inline CapitalProcess strategy_from_json(const nlohmann::json& j,
                                         const ForecastingSystem& system) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity") {
    return CapitalProcess::from_multiplier(MultiplierStrategy::identity());
  }
  if (kind == "endpoint") {
    const double lam = j.value("lambda", 1.0);
    const Direction dir = direction_from_json(j);
    if (j.contains("lower") || j.contains("upper")) {
      const IntervalForecast i(j.value("lower", 0.0), j.value("upper", 1.0));
      return CapitalProcess::from_multiplier(endpoint_bet(i, lam, dir));
    }
    return CapitalProcess::from_multiplier(endpoint_bet(system, lam, dir));
  }
  if (kind == "hellinger-half" || kind == "hellinger-near-half") {
    auto s = kind == "hellinger-half" ? hellinger_half_strategy()
                                      : hellinger_near_half_strategy();
    if (j.contains("mask")) {
      const auto mask = j.at("mask").get<std::string>();
      if (mask != "odd" && mask != "even") {
        throw std::invalid_argument("mask must be 'odd' or 'even'");
      }
      s = parity_masked(std::move(s), mask == "odd" ? Parity::odd : Parity::even);
    }
    if (j.contains("from")) s = tail_switch(std::move(s), j.at("from").get<std::int64_t>());
    return CapitalProcess::from_multiplier(std::move(s));
  }
  if (kind == "calibration") {
    const Gamble f = gamble_from_json(j, Gamble::indicator());
    const auto sel = selection_from_json(j.value("selection", nlohmann::json("all")));
    const auto params = CalibrationParams::for_epsilon(f, j.at("epsilon").get<double>());
    return CapitalProcess::from_multiplier(
        calibration_strategy(SubmartingaleS{f, system}, sel, params));
  }
  if (kind == "calibration-mixture") {
    const Gamble f = gamble_from_json(j, Gamble::indicator());
    const auto sel = selection_from_json(j.value("selection", nlohmann::json("all")));
    return mixture_calibration(system, f, sel, j.value("R", 20));
  }
  if (kind == "mixture") {
    std::vector<CapitalProcess> parts;
    for (const auto& c : j.at("components")) parts.push_back(strategy_from_json(c, system));
    return uniform_mixture(j.value("name", std::string("mixture")), parts);
  }
  if (kind == "cap-and-mix") {
    return cap_and_mix(strategy_from_json(j.at("base"), system), j.value("levels", 40));
  }
  throw std::invalid_argument("unknown strategy kind: " + kind);
}

/// Accepts {"strategies": [...]} or a bare array. The descriptor
/// {"kind": "standard"} expands to standard_battery(system).
inline std::vector<CapitalProcess> battery_from_json(const nlohmann::json& j,
                                                     const ForecastingSystem& system) {
  const nlohmann::json& list = j.is_array() ? j : j.at("strategies");
  std::vector<CapitalProcess> out;
  for (const auto& d : list) {
    if (d.at("kind").get<std::string>() == "standard") {
      for (auto& p : standard_battery(system, d.value("R", 20))) out.push_back(std::move(p));
    } else {
      out.push_back(strategy_from_json(d, system));
    }
  }
  if (out.empty()) throw std::invalid_argument("strategy battery is empty");
  return out;
}

}  // namespace intrand
