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

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "intrand/forecast.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/outcome.hpp"

namespace intrand {

/// Philox4x32-10 counter-based generator: a keyed bijection of a 128-bit
/// counter. Output depends only on (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Two uniforms in [0, 1) with 53-bit resolution for (seed, step).
inline std::pair<double, double> uniform_pair(std::uint64_t seed,
                                              std::uint64_t step) noexcept {
  const auto out = Philox4x32::generate(
      {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), 0u, 0u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  };
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

/// How Reality picks a precise probability inside each forecast interval.
struct RealityPolicy {
  enum class Kind {
    fixed_precise,       // chooser(s, I), midpoint by default
    lower_endpoint,
    upper_endpoint,
    uniform_in_interval,  // p drawn uniformly from I, then the Bernoulli draw
    alternating_endpoints,  // lower on odd steps, upper on even steps
  };

  Kind kind = Kind::fixed_precise;
  std::function<double(Situation, const IntervalForecast&)> chooser;

  static RealityPolicy fixed_precise() { return {}; }
  static RealityPolicy lower_endpoint() { return {Kind::lower_endpoint, {}}; }
  static RealityPolicy upper_endpoint() { return {Kind::upper_endpoint, {}}; }
  static RealityPolicy uniform_in_interval() { return {Kind::uniform_in_interval, {}}; }
  static RealityPolicy alternating_endpoints() {
    return {Kind::alternating_endpoints, {}};
  }

  std::string name() const {
    switch (kind) {
      case Kind::fixed_precise: return "fixed";
      case Kind::lower_endpoint: return "lower";
      case Kind::upper_endpoint: return "upper";
      case Kind::uniform_in_interval: return "uniform";
      case Kind::alternating_endpoints: return "alternating";
    }
    return "fixed";
  }

  double choose(Situation s, const IntervalForecast& i, double uniform) const {
    switch (kind) {
      case Kind::fixed_precise: return chooser ? chooser(s, i) : i.midpoint();
      case Kind::lower_endpoint: return i.lower();
      case Kind::upper_endpoint: return i.upper();
      case Kind::uniform_in_interval: {
        const double p = i.lower() + uniform * i.width();
        return p > i.upper() ? i.upper() : p;
      }
      case Kind::alternating_endpoints:
        return s.size() % 2 == 0 ? i.lower() : i.upper();
    }
    return i.midpoint();
  }
};

inline RealityPolicy policy_from_name(std::string_view name) {
  if (name == "fixed" || name == "midpoint") return RealityPolicy::fixed_precise();
  if (name == "lower") return RealityPolicy::lower_endpoint();
  if (name == "upper") return RealityPolicy::upper_endpoint();
  if (name == "uniform") return RealityPolicy::uniform_in_interval();
  if (name == "alternating") return RealityPolicy::alternating_endpoints();
  throw std::invalid_argument("unknown reality policy: " + std::string(name));
}

/// Samples x_1..x_N where x_k ~ Bernoulli(p_k) and p_k = policy(system(x_1..x_{k-1})).
/// The draw for step k depends only on (seed, k).
inline Path sample_path(const ForecastingSystem& system, const RealityPolicy& policy,
                        std::uint64_t seed, std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("sample_path needs N >= 1");
  Path path;
  path.reserve(horizon);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const Situation s(path);
    const IntervalForecast forecast = system(s);
    const auto [u_outcome, u_choice] = uniform_pair(seed, k);
    const double p = policy.choose(s, forecast, u_choice);
    if (!forecast.contains(p)) {
      throw std::logic_error("reality policy left the forecast interval at step " +
                             std::to_string(k));
    }
    path.push_back(outcome_of(u_outcome < p));
  }
  return path;
}

}  // namespace intrand
