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
#include <stdexcept>
#include <string>

#include "intrand/outcome.hpp"

namespace intrand {

/// A gamble on a binary outcome, written as the pair (f(1), f(0)).
struct Gamble {
  double f1 = 0.0;
  double f0 = 0.0;

  static constexpr Gamble constant(double c) noexcept { return {c, c}; }
  /// The gamble x -> x.
  static constexpr Gamble indicator() noexcept { return {1.0, 0.0}; }

  constexpr double operator()(Outcome x) const noexcept {
    return x == Outcome::one ? f1 : f0;
  }
  constexpr double min() const noexcept { return f1 < f0 ? f1 : f0; }
  constexpr double max() const noexcept { return f1 < f0 ? f0 : f1; }
  double range() const noexcept { return std::abs(f1 - f0); }
  bool finite() const noexcept { return std::isfinite(f1) && std::isfinite(f0); }

  friend constexpr Gamble operator-(Gamble g) noexcept { return {-g.f1, -g.f0}; }
  friend constexpr Gamble operator+(Gamble a, Gamble b) noexcept {
    return {a.f1 + b.f1, a.f0 + b.f0};
  }
  friend constexpr Gamble operator-(Gamble a, Gamble b) noexcept {
    return {a.f1 - b.f1, a.f0 - b.f0};
  }
  friend constexpr Gamble operator+(Gamble a, double c) noexcept {
    return {a.f1 + c, a.f0 + c};
  }
  friend constexpr Gamble operator-(Gamble a, double c) noexcept {
    return {a.f1 - c, a.f0 - c};
  }
  friend constexpr Gamble operator*(double c, Gamble a) noexcept {
    return {c * a.f1, c * a.f0};
  }
  friend constexpr Gamble operator*(Gamble a, Gamble b) noexcept {
    return {a.f1 * b.f1, a.f0 * b.f0};
  }
  friend constexpr bool operator==(Gamble, Gamble) = default;
};

/// A closed interval [lower, upper] inside [0, 1] of probabilities for the
/// outcome 1. Degenerate intervals are precise forecasts.
class IntervalForecast {
 public:
  constexpr IntervalForecast() = default;  // vacuous

  IntervalForecast(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower >= 0.0 && lower <= upper && upper <= 1.0)) {
      throw std::domain_error("invalid interval forecast [" +
                              std::to_string(lower) + ", " +
                              std::to_string(upper) + "]");
    }
  }

  static IntervalForecast precise(double p) { return {p, p}; }
  static constexpr IntervalForecast vacuous() noexcept { return {}; }

  constexpr double lower() const noexcept { return lower_; }
  constexpr double upper() const noexcept { return upper_; }
  constexpr double midpoint() const noexcept { return 0.5 * (lower_ + upper_); }
  constexpr double width() const noexcept { return upper_ - lower_; }
  constexpr bool is_precise() const noexcept { return lower_ == upper_; }

  constexpr bool contains(double p) const noexcept {
    return lower_ <= p && p <= upper_;
  }
  /// True iff *this is a subset of `other`.
  constexpr bool subset_of(const IntervalForecast& other) const noexcept {
    return other.lower_ <= lower_ && upper_ <= other.upper_;
  }

  friend constexpr bool operator==(const IntervalForecast&,
                                   const IntervalForecast&) = default;

 private:
  double lower_ = 0.0;
  double upper_ = 1.0;
};

/// Expectation of `f` under the precise forecast p.
constexpr double precise_expectation(double p, Gamble f) noexcept {
  return p * f.f1 + (1.0 - p) * f.f0;
}

/// Lower expectation: the smaller of the two endpoint expectations. The
/// expectation is linear in p, so the endpoints attain the minimum.
constexpr double lower_expectation(const IntervalForecast& forecast,
                                   Gamble f) noexcept {
  const double at_lower = precise_expectation(forecast.lower(), f);
  const double at_upper = precise_expectation(forecast.upper(), f);
  return at_lower < at_upper ? at_lower : at_upper;
}

/// Upper expectation via conjugacy.
constexpr double upper_expectation(const IntervalForecast& forecast,
                                   Gamble f) noexcept {
  return -lower_expectation(forecast, -f);
}

}  // namespace intrand
