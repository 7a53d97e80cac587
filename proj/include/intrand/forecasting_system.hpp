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
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "intrand/forecast.hpp"
#include "intrand/outcome.hpp"
#include "json.hpp"

namespace intrand {

/// Half-width of the n-th forecast of the near-half system,
/// e^{-1/(n+1)} * sqrt(e^{1/(n+1)} - 1). Lies in (0, 1/2) and decreases to 0.
inline double delta_n(std::int64_t n) {
  if (n < 1) throw std::domain_error("delta_n requires n >= 1");
  const double t = 1.0 / static_cast<double>(n + 1);
  return std::exp(-t) * std::sqrt(std::expm1(t));
}

/// p_n = 1/2 + (-1)^n delta_n.
inline double near_half_probability(std::int64_t n) {
  const double d = delta_n(n);
  return (n % 2 == 0) ? 0.5 + d : 0.5 - d;
}

/// A total map from situations to interval forecasts.
class ForecastingSystem {
 public:
  struct Stationary {
    IntervalForecast interval;
  };
  struct Vacuous {};
  /// [p, p] after situations of odd length, [q, q] after even length
  /// (including the root).
  struct AlternatingPQ {
    double p;
    double q;
  };
  /// Precise p_n for the n-th outcome, n = length(s) + 1.
  struct NearHalf {};
  struct Table {
    std::map<std::string, IntervalForecast> entries;  // keyed by bit string
    IntervalForecast fallback;
  };
  struct DepthPeriodic {
    std::vector<IntervalForecast> cycle;
  };

  using Variant = std::variant<Stationary, Vacuous, AlternatingPQ, NearHalf,
                               Table, DepthPeriodic>;

  ForecastingSystem() : variant_(Vacuous{}) {}
  explicit ForecastingSystem(Variant v) : variant_(std::move(v)) { check(); }

  static ForecastingSystem stationary(IntervalForecast i) {
    return ForecastingSystem(Stationary{i});
  }
  static ForecastingSystem stationary(double lower, double upper) {
    return stationary(IntervalForecast(lower, upper));
  }
  static ForecastingSystem vacuous() { return ForecastingSystem(Vacuous{}); }
  static ForecastingSystem alternating_pq(double p, double q) {
    return ForecastingSystem(AlternatingPQ{p, q});
  }
  static ForecastingSystem near_half() { return ForecastingSystem(NearHalf{}); }
  static ForecastingSystem table(std::map<std::string, IntervalForecast> entries,
                                 IntervalForecast fallback) {
    return ForecastingSystem(Table{std::move(entries), fallback});
  }
  static ForecastingSystem depth_periodic(std::vector<IntervalForecast> cycle) {
    return ForecastingSystem(DepthPeriodic{std::move(cycle)});
  }

  const Variant& variant() const noexcept { return variant_; }

  IntervalForecast operator()(Situation s) const {
    return std::visit([&](const auto& v) { return forecast(v, s); }, variant_);
  }

  /// The forecast only depends on the length of the situation.
  bool depth_only() const noexcept {
    return !std::holds_alternative<Table>(variant_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& v) -> std::string {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Stationary>) return "stationary";
          else if constexpr (std::is_same_v<T, Vacuous>) return "vacuous";
          else if constexpr (std::is_same_v<T, AlternatingPQ>) return "alternating-pq";
          else if constexpr (std::is_same_v<T, NearHalf>) return "near-half";
          else if constexpr (std::is_same_v<T, Table>) return "table";
          else return "depth-periodic";
        },
        variant_);
  }

 private:
  void check() {
    if (const auto* a = std::get_if<AlternatingPQ>(&variant_)) {
      if (!(0.0 <= a->p && a->p <= a->q && a->q <= 1.0)) {
        throw std::domain_error("alternating-pq requires 0 <= p <= q <= 1");
      }
    } else if (const auto* t = std::get_if<Table>(&variant_)) {
      for (const auto& [key, value] : t->entries) {
        for (char c : key) {
          if (c != '0' && c != '1') {
            throw std::domain_error("table key is not a bit string: " + key);
          }
        }
        table_max_key_ = std::max(table_max_key_, key.size());
      }
    } else if (const auto* d = std::get_if<DepthPeriodic>(&variant_)) {
      if (d->cycle.empty()) {
        throw std::domain_error("depth-periodic system needs a nonempty cycle");
      }
    }
  }

  static IntervalForecast forecast(const Stationary& v, Situation) {
    return v.interval;
  }
  static IntervalForecast forecast(const Vacuous&, Situation) {
    return IntervalForecast::vacuous();
  }
  static IntervalForecast forecast(const AlternatingPQ& v, Situation s) {
    return IntervalForecast::precise(s.size() % 2 == 1 ? v.p : v.q);
  }
  static IntervalForecast forecast(const NearHalf&, Situation s) {
    return IntervalForecast::precise(
        near_half_probability(static_cast<std::int64_t>(s.size()) + 1));
  }
  IntervalForecast forecast(const Table& v, Situation s) const {
    if (s.size() > table_max_key_) return v.fallback;
    const auto it = v.entries.find(to_bits(s));
    return it == v.entries.end() ? v.fallback : it->second;
  }
  static IntervalForecast forecast(const DepthPeriodic& v, Situation s) {
    return v.cycle[s.size() % v.cycle.size()];
  }

  Variant variant_;
  std::size_t table_max_key_ = 0;
};

/// True iff first(s) is a subset of second(s) for every situation of length
/// less than `depth`.
inline bool is_refinement(const ForecastingSystem& first,
                          const ForecastingSystem& second, std::size_t depth) {
  constexpr std::size_t kMaxDepth = 20;
  if (depth > kMaxDepth) {
    throw std::length_error("is_refinement: depth exceeds 20");
  }
  const bool by_depth = first.depth_only() && second.depth_only();
  for (std::size_t len = 0; len < depth; ++len) {
    const std::uint64_t count = by_depth ? 1 : (std::uint64_t{1} << len);
    for (std::uint64_t i = 0; i < count; ++i) {
      const Path s = situation_from_index(i, len);
      if (!first(s).subset_of(second(s))) return false;
    }
  }
  return true;
}

// JSON encoding: {"variant": "stationary", "lower": .., "upper": ..} and
// friends; see docs/formats.md.

inline nlohmann::json interval_to_json(const IntervalForecast& i) {
  return {{"lower", i.lower()}, {"upper", i.upper()}};
}

inline IntervalForecast interval_from_json(const nlohmann::json& j) {
  return IntervalForecast(j.at("lower").get<double>(),
                          j.at("upper").get<double>());
}

inline nlohmann::json to_json(const ForecastingSystem& system) {
  nlohmann::json j;
  j["variant"] = system.name();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ForecastingSystem::Stationary>) {
          j["lower"] = v.interval.lower();
          j["upper"] = v.interval.upper();
        } else if constexpr (std::is_same_v<T, ForecastingSystem::AlternatingPQ>) {
          j["p"] = v.p;
          j["q"] = v.q;
        } else if constexpr (std::is_same_v<T, ForecastingSystem::Table>) {
          j["default"] = interval_to_json(v.fallback);
          nlohmann::json entries = nlohmann::json::object();
          for (const auto& [key, value] : v.entries) {
            entries[key] = interval_to_json(value);
          }
          j["entries"] = std::move(entries);
        } else if constexpr (std::is_same_v<T, ForecastingSystem::DepthPeriodic>) {
          nlohmann::json cycle = nlohmann::json::array();
          for (const auto& i : v.cycle) cycle.push_back(interval_to_json(i));
          j["cycle"] = std::move(cycle);
        }
      },
      system.variant());
  return j;
}

inline ForecastingSystem system_from_json(const nlohmann::json& j) {
  const auto variant = j.at("variant").get<std::string>();
  if (variant == "stationary") {
    return ForecastingSystem::stationary(j.at("lower").get<double>(),
                                         j.at("upper").get<double>());
  }
  if (variant == "vacuous") return ForecastingSystem::vacuous();
  if (variant == "alternating-pq") {
    return ForecastingSystem::alternating_pq(j.at("p").get<double>(),
                                             j.at("q").get<double>());
  }
  if (variant == "near-half") return ForecastingSystem::near_half();
  if (variant == "table") {
    std::map<std::string, IntervalForecast> entries;
    if (j.contains("entries")) {
      for (const auto& [key, value] : j.at("entries").items()) {
        entries.emplace(key, interval_from_json(value));
      }
    }
    return ForecastingSystem::table(std::move(entries),
                                    interval_from_json(j.at("default")));
  }
  if (variant == "depth-periodic") {
    std::vector<IntervalForecast> cycle;
    for (const auto& value : j.at("cycle")) {
      cycle.push_back(interval_from_json(value));
    }
    return ForecastingSystem::depth_periodic(std::move(cycle));
  }
  throw std::domain_error("unknown forecasting system variant: " + variant);
}

}  // namespace intrand
