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

#include "intrand/strategies.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "intrand/audit.hpp"
#include "intrand/capital_process.hpp"
#include "test_support.hpp"

namespace intrand {
namespace {

using testing::all_situations;
using testing::random_interval;
using testing::random_path;
using testing::random_valid_strategy;

std::vector<Path> random_situations(std::mt19937_64& rng, std::size_t count,
                                    std::size_t max_len) {
  std::vector<Path> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_path(rng, rng() % (max_len + 1)));
  return out;
}

// --- Hellinger multipliers -------------------------------------------------

TEST(Hellinger, HalfHasUnitExpectationUnderFairCoin) {
  for (std::int64_t n = 1; n <= 10000; ++n) {
    const Gamble g = hellinger_half(n);
    ASSERT_NEAR(precise_expectation(0.5, g), 1.0, 1e-12) << n;
    ASSERT_NE(g.f1, g.f0);
  }
}

TEST(Hellinger, NearHalfHasUnitExpectationUnderPn) {
  for (std::int64_t n = 1; n <= 10000; ++n) {
    const Gamble h = hellinger_near_half(n);
    ASSERT_NEAR(precise_expectation(near_half_probability(n), h), 1.0, 1e-12) << n;
    ASSERT_GT(h.f1, 0.0);
    ASSERT_GT(h.f0, 0.0);
  }
}

TEST(Hellinger, ProductIsDeterministic) {
  for (std::int64_t n = 1; n <= 10000; ++n) {
    const Gamble prod = hellinger_half(n) * hellinger_near_half(n);
    const double expected = std::exp(1.0 / static_cast<double>(n + 1));
    ASSERT_NEAR(prod.f1, expected, 1e-12);
    ASSERT_NEAR(prod.f0, expected, 1e-12);
  }
}

TEST(Hellinger, JointLogCapitalIsHarmonicTail) {
  std::mt19937_64 rng(101);
  for (double p : {0.5, 0.1, 0.9}) {
    const Path path = random_path(rng, 20000, p);
    const auto a = capital_from_multiplier(hellinger_half_strategy(), path, path.size());
    const auto b = capital_from_multiplier(hellinger_near_half_strategy(), path, path.size());
    double tail = 0.0;
    for (std::size_t n = 1; n <= path.size(); ++n) {
      tail += 1.0 / static_cast<double>(n + 1);
      ASSERT_NEAR(a.log_values[n] + b.log_values[n], tail, 1e-9);
    }
  }
}

TEST(Hellinger, StrategiesValidateAgainstTheirSystems) {
  std::mt19937_64 rng(103);
  const auto situations = random_situations(rng, 1000, 3000);
  EXPECT_TRUE(validate_multiplier(hellinger_half_strategy(),
                                  ForecastingSystem::stationary(0.5, 0.5), situations, 1e-12)
                  .ok());
  EXPECT_TRUE(validate_multiplier(hellinger_near_half_strategy(), ForecastingSystem::near_half(),
                                  situations, 1e-12)
                  .ok());
  // Swapped, they are not supermartingale multipliers.
  EXPECT_FALSE(validate_multiplier(hellinger_near_half_strategy(),
                                   ForecastingSystem::stationary(0.5, 0.5), situations, 1e-12)
                   .ok());
}

// --- Transformers -------------------------------------------------------------

TEST(ParityMasked, EvenMaskedProductIsOddHarmonicTail) {
  std::mt19937_64 rng(107);
  const Path path = random_path(rng, 5001);
  const auto a = capital_from_multiplier(parity_masked(hellinger_half_strategy(), Parity::even),
                                         path, path.size());
  const auto b = capital_from_multiplier(
      parity_masked(hellinger_near_half_strategy(), Parity::even), path, path.size());
  for (std::size_t n = 1; n <= path.size(); ++n) {
    double expected = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) expected += 1.0 / static_cast<double>(2 * k + 1);
    ASSERT_NEAR(a.log_values[n] + b.log_values[n], expected, 1e-9) << n;
  }
}

TEST(ParityMasked, IdentityStaysIdentity) {
  const auto m = parity_masked(MultiplierStrategy::identity(), Parity::odd);
  for (const auto& s : all_situations(5)) EXPECT_EQ(m(s), Gamble::constant(1.0));
}

TEST(ParityMasked, ValidityOnMaskedAndUnmaskedSteps) {
  std::mt19937_64 rng(109);
  const auto situations = random_situations(rng, 1000, 2000);
  const auto masked = parity_masked(hellinger_half_strategy(), Parity::even);
  // On even steps p_n > 1/2, so only the upper half [1/2 - eps, 1/2] is beaten.
  for (double eps : {0.01, 0.1, 0.5}) {
    EXPECT_TRUE(validate_multiplier(masked, ForecastingSystem::stationary(0.5 - eps, 0.5),
                                    situations, 1e-12)
                    .ok())
        << eps;
  }
  EXPECT_FALSE(validate_multiplier(masked, ForecastingSystem::stationary(0.5, 0.6), situations,
                                   1e-12)
                   .ok());
  EXPECT_TRUE(validate_multiplier(parity_masked(hellinger_near_half_strategy(), Parity::even),
                                  ForecastingSystem::near_half(), situations, 1e-12)
                  .ok());
  // Masked steps return (1, 1), which every system accepts.
  std::vector<Path> odd_steps;
  for (const auto& s : situations) {
    if (s.size() % 2 == 0) odd_steps.push_back(s);
  }
  EXPECT_TRUE(validate_multiplier(masked, ForecastingSystem::vacuous(), odd_steps, 0.0).ok());
}

TEST(TailSwitch, StartAtOneIsUnchanged) {
  std::mt19937_64 rng(113);
  const auto base = random_valid_strategy(ForecastingSystem::vacuous(), 9);
  const auto same = tail_switch(base, 1);
  for (const auto& s : random_situations(rng, 200, 50)) EXPECT_EQ(same(s), base(s));
  EXPECT_THROW(tail_switch(base, 0), std::invalid_argument);
}

TEST(TailSwitch, CapitalIsOneBeforeStart) {
  const auto doubling = MultiplierStrategy::constant({2.0, 0.0});
  const Path ones(30, Outcome::one);
  const auto t = capital_from_multiplier(tail_switch(doubling, 11), ones, 30);
  for (std::size_t n = 0; n <= 10; ++n) EXPECT_EQ(t.log_values[n], 0.0);
  EXPECT_NEAR(t.log_values[30], 20 * std::log(2.0), 1e-12);
}

TEST(TailSwitch, ClosedFormThresholdMatchesScan) {
  EXPECT_EQ(n_alpha_scan(0.1), 98);
  EXPECT_EQ(n_alpha_closed_form(0.1), 98);
  for (int i = 1; i < 490; ++i) {
    const double alpha = i / 1000.0;
    ASSERT_EQ(n_alpha_closed_form(alpha), n_alpha_scan(alpha)) << alpha;
  }
  EXPECT_THROW(n_alpha_closed_form(0.0), std::domain_error);
}

TEST(TailSwitch, MakesIntervalStrategyValidForNearHalf) {
  // A strategy valid for [1/2 - eps1, 1/2 + eps2] becomes valid for the
  // near-half system once switched on at n_alpha.
  const double eps1 = 0.1, eps2 = 0.15;
  const IntervalForecast interval(0.5 - eps1, 0.5 + eps2);
  const auto base = random_valid_strategy(ForecastingSystem::stationary(interval), 77);
  const auto n_alpha = n_alpha_closed_form(std::min(eps1, eps2));
  std::mt19937_64 rng(127);
  const auto situations = random_situations(rng, 1000, 400);
  EXPECT_TRUE(validate_multiplier(tail_switch(base, n_alpha), ForecastingSystem::near_half(),
                                  situations, 1e-12)
                  .ok());
  EXPECT_FALSE(validate_multiplier(base, ForecastingSystem::near_half(), all_situations(4), 1e-12)
                   .ok());
}

// --- Calibration strategies ---------------------------------------------------

TEST(Calibration, NoSelectionIsIdentity) {
  const SubmartingaleS s{Gamble::indicator(), ForecastingSystem::stationary(0.3, 0.6)};
  const auto d = calibration_strategy(s, SelectionProcess::none(),
                                      CalibrationParams::for_epsilon(s.f, 0.5));
  std::mt19937_64 rng(131);
  const Path path = random_path(rng, 500);
  const auto t = capital_from_multiplier(d, path, path.size());
  for (double v : t.log_values) EXPECT_EQ(v, 0.0);
}

TEST(Calibration, ParameterChecks) {
  EXPECT_THROW(CalibrationParams::for_epsilon(Gamble::indicator(), 1.0), std::invalid_argument);
  EXPECT_THROW(CalibrationParams::for_epsilon(Gamble::indicator(), 0.0), std::invalid_argument);
  const auto p = CalibrationParams::for_epsilon({3.0, 0.0}, 0.6);
  EXPECT_DOUBLE_EQ(p.bound, 3.0);
  EXPECT_DOUBLE_EQ(p.xi, 0.6 / 18.0);
  const SubmartingaleS s{Gamble::indicator(), ForecastingSystem::vacuous()};
  EXPECT_THROW(calibration_strategy(s, SelectionProcess::all(), {0.5, 1.0, 1.0}),
               std::invalid_argument);
}

TEST(Calibration, IncrementsHaveZeroLowerExpectation) {
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto system = ForecastingSystem::stationary(random_interval(rng));
    const SubmartingaleS s{{u(rng), u(rng)}, system};
    const Gamble d = s.delta({});
    ASSERT_NEAR(lower_expectation(system({}), d), 0.0, 1e-12);
    ASSERT_LE(std::abs(d.f1), s.bound() + 1e-12);
    ASSERT_LE(std::abs(d.f0), s.bound() + 1e-12);
  }
}

TEST(Calibration, ValidAndBounded) {
  std::mt19937_64 rng(139);
  std::uniform_real_distribution<double> u(-3.0, 3.0), e(0.01, 0.99);
  const SelectionProcess sels[] = {SelectionProcess::all(), SelectionProcess::odd(),
                                   SelectionProcess::after_ones(2)};
  for (int trial = 0; trial < 50; ++trial) {
    const auto system = testing::random_table_system(rng, 6);
    const SubmartingaleS s{{u(rng), u(rng)}, system};
    const auto params = CalibrationParams::for_epsilon(s.f, e(rng) * s.bound());
    const auto d = calibration_strategy(s, sels[trial % 3], params);
    const auto situations = random_situations(rng, 100, 10);
    ASSERT_TRUE(validate_multiplier(d, system, situations, 1e-12).ok());
    for (const auto& sit : situations) {
      const Gamble m = d(sit);
      ASSERT_GE(m.min(), 1.0 - params.xi * params.bound - 1e-15);
      ASSERT_LE(m.max(), 1.0 + params.xi * params.bound + 1e-15);
      ASSERT_GT(m.min(), 0.0);
    }
  }
}

TEST(Calibration, GrowthBoundWhenSelectedAverageIsLow) {
  std::mt19937_64 rng(149);
  std::uniform_real_distribution<double> u(-2.0, 2.0), e(0.05, 0.95), bias(0.0, 1.0);
  std::size_t triggered = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto system = ForecastingSystem::stationary(random_interval(rng));
    const SubmartingaleS s{{u(rng), u(rng)}, system};
    const auto params = CalibrationParams::for_epsilon(s.f, e(rng) * s.bound());
    const auto sel = trial % 2 ? SelectionProcess::all() : SelectionProcess::even();
    const auto d = calibration_strategy(s, sel, params);
    const Path path = random_path(rng, 300, bias(rng));
    const auto t = capital_from_multiplier(d, path, path.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n <= path.size(); ++n) {
      const double avg = count ? sum / static_cast<double>(count) : 0.0;
      if (avg <= -params.epsilon) {
        ++triggered;
        const double bound = params.epsilon * params.epsilon /
                             (4.0 * params.bound * params.bound) * static_cast<double>(count);
        ASSERT_GE(t.log_values[n], bound - 1e-9);
      }
      if (n == path.size()) break;
      const Situation sit = Situation(path).first(n);
      if (sel(sit)) {
        sum += s.delta(sit)(path[n]);
        ++count;
      }
    }
  }
  EXPECT_GT(triggered, 1000u);
}

TEST(MixtureCalibration, NoSelectionKeepsCapitalAtOne) {
  const auto t = mixture_calibration(ForecastingSystem::stationary(0.2, 0.4), Gamble::indicator(),
                                     SelectionProcess::none())
                     .trajectory(parse_bits("0101110"), 7);
  for (double v : t.log_values) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(MixtureCalibration, MatchesGenericMixtureOfComponents) {
  std::mt19937_64 rng(151);
  const auto system = ForecastingSystem::alternating_pq(0.3, 0.7);
  const Gamble f{1.0, -0.5};
  const auto sel = SelectionProcess::odd();
  const int terms = 12;
  std::vector<std::pair<double, CapitalProcess>> parts;
  int r = 1;
  for (auto& c : mixture_calibration_components(system, f, sel, terms)) {
    parts.emplace_back(std::ldexp(1.0, -r++), CapitalProcess::from_multiplier(std::move(c)));
  }
  const auto generic = mixture("generic", std::move(parts), std::ldexp(1.0, -terms));
  const auto dedicated = mixture_calibration(system, f, sel, terms);
  const Path path = random_path(rng, 3000, 0.2);
  const auto a = generic.trajectory(path, path.size());
  const auto b = dedicated.trajectory(path, path.size());
  for (std::size_t k = 0; k <= path.size(); ++k) {
    ASSERT_NEAR(a.log_values[k], b.log_values[k], 1e-9);
  }
}

TEST(MixtureCalibration, CapitalBoundedByThreeHalvesPower) {
  std::mt19937_64 rng(157);
  for (int trial = 0; trial < 20; ++trial) {
    const auto system = ForecastingSystem::stationary(random_interval(rng));
    const Gamble f = trial % 2 ? Gamble::indicator() : -Gamble::indicator();
    const auto tree = mixture_calibration(system, f, SelectionProcess::all()).tree(10);
    for (std::size_t k = 0; k <= 10; ++k) {
      for (double v : tree.levels()[k]) ASSERT_LE(v, std::pow(1.5, k) + 1e-12);
    }
  }
}

TEST(MixtureCalibration, SupermartingaleOnRandomTrees) {
  std::mt19937_64 rng(163);
  for (int trial = 0; trial < 30; ++trial) {
    const auto system = testing::random_table_system(rng, 8);
    const Gamble f{std::uniform_real_distribution<double>(-2, 2)(rng), 0.5};
    const auto tree = mixture_calibration(system, f, SelectionProcess::every_k(3), 20).tree(8);
    ASSERT_TRUE(validate_supermartingale(tree, system, 1e-9).ok());
  }
}

TEST(MixtureCalibration, GrowsLikeItsComponentOnViolatingSequence) {
  // Frequency 0 against lower forecast 0.5: selected average of x - 0.5 is
  // -0.5 <= -2^-r for every r, so component r alone gives the calibration growth bound.
  const auto system = ForecastingSystem::stationary(0.5, 0.6);
  const Path zeros(400, Outcome::zero);
  const auto t = mixture_calibration(system, Gamble::indicator(), SelectionProcess::all())
                     .trajectory(zeros, zeros.size());
  for (int r = 1; r <= 3; ++r) {
    const double eps = std::ldexp(1.0, -r);
    for (std::size_t n = 1; n <= zeros.size(); n += 37) {
      const double component_bound = eps * eps / 4.0 * static_cast<double>(n);
      ASSERT_GE(t.log_values[n], -r * std::log(2.0) + component_bound - 1e-9);
    }
  }
}

// --- Cap and mix --------------------------------------------------------------

TEST(CapAndMix, IdentityStaysAtOne) {
  const auto t = cap_and_mix(CapitalProcess::from_multiplier(MultiplierStrategy::identity()))
                     .trajectory(parse_bits("0110101"), 7);
  for (double v : t.log_values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(CapAndMix, ReachingLevelKGivesAtLeastK) {
  // Doubling on the all-ones path reaches 2^k at step k, then halves back.
  Path path(20, Outcome::one);
  for (int i = 0; i < 15; ++i) path.push_back(Outcome::zero);
  const auto base = CapitalProcess::from_multiplier(MultiplierStrategy::constant({2.0, 0.5}));
  const auto t = cap_and_mix(base, 40).trajectory(path, path.size());
  for (std::size_t n = 1; n <= path.size(); ++n) {
    const std::size_t reached = std::min<std::size_t>(n, 20);
    ASSERT_GE(std::exp(t.log_values[n]), static_cast<double>(reached) - 1e-9) << n;
  }
}

TEST(CapAndMix, SupermartingaleOnRandomTrees) {
  std::mt19937_64 rng(167);
  for (int trial = 0; trial < 30; ++trial) {
    const auto system = testing::random_table_system(rng, 8);
    const auto base = CapitalProcess::from_multiplier(random_valid_strategy(system, rng()));
    const auto tree = cap_and_mix(base, 3).tree(8);
    ASSERT_NEAR(tree.at(0, 0), 1.0, 1e-12);
    ASSERT_TRUE(validate_supermartingale(tree, system, 1e-9).ok());
  }
}

// --- Split --------------------------------------------------------------------

TEST(Split, IdentitySplitsIntoIdentities) {
  const auto split = split_multiplier(MultiplierStrategy::identity());
  EXPECT_EQ(split.inner({}), Gamble::constant(1.0));
  EXPECT_EQ(split.outer({}), Gamble::constant(1.0));
}

TEST(Split, HandExample) {
  const Gamble d{0.5, 1.4};
  EXPECT_EQ(split_inner(d), (Gamble{0.5, 1.4}));
  EXPECT_EQ(split_outer(d), (Gamble{1.0, 1.0}));
  EXPECT_TRUE(SplitMultiplier::product_matches(d, split_inner(d), split_outer(d)));
  EXPECT_TRUE(SplitMultiplier::one_sided(d));
  EXPECT_FALSE(SplitMultiplier::one_sided({1.2, 1.1}));
}

TEST(Split, ProductAlwaysRecoversMultiplier) {
  std::mt19937_64 rng(173);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const Gamble d{u(rng), u(rng)};
    ASSERT_TRUE(SplitMultiplier::product_matches(d, split_inner(d), split_outer(d)));
  }
}

TEST(Split, ValidityTransfersToBothIntervals) {
  std::mt19937_64 rng(179);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double v[4] = {u(rng), u(rng), u(rng), u(rng)};
    std::sort(v, v + 4);
    if (v[0] == v[1] || v[2] == v[3]) continue;
    const IntervalForecast i(v[1], v[3]), j(v[0], v[2]), k(v[1], v[2]);
    const auto d = random_valid_strategy(ForecastingSystem::stationary(k), rng());
    const auto split = split_multiplier(d);
    const auto situations = all_situations(7);
    for (const auto& s : situations) ASSERT_TRUE(SplitMultiplier::one_sided(d(s)));
    ASSERT_TRUE(validate_multiplier(split.inner, ForecastingSystem::stationary(i), situations,
                                    1e-9)
                    .ok());
    ASSERT_TRUE(validate_multiplier(split.outer, ForecastingSystem::stationary(j), situations,
                                    1e-9)
                    .ok());
  }
}

// --- Endpoint bets ------------------------------------------------------------

TEST(EndpointBet, VacuousIntervalNeverGrows) {
  const Path ones(50, Outcome::one), zeros(50, Outcome::zero);
  for (double lam : {1.0, 0.25}) {
    const auto high = endpoint_bet(IntervalForecast::vacuous(), lam, Direction::high);
    EXPECT_EQ(high({}), (Gamble{1.0, 1.0 - lam}));
    EXPECT_EQ(capital_from_multiplier(high, ones, 50).final_log(), 0.0);
    const auto low = endpoint_bet(IntervalForecast::vacuous(), lam, Direction::low);
    EXPECT_EQ(capital_from_multiplier(low, zeros, 50).final_log(), 0.0);
  }
}

TEST(EndpointBet, FairCoinDoubling) {
  const auto d = endpoint_bet(IntervalForecast::precise(0.5), 1.0, Direction::high);
  EXPECT_EQ(d({}), (Gamble{1.5, 0.5}));
  const Path ones(40, Outcome::one);
  EXPECT_NEAR(capital_from_multiplier(d, ones, 40).final_log(), 40 * std::log(1.5), 1e-12);
}

TEST(EndpointBet, ValidForItsInterval) {
  std::mt19937_64 rng(181);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<Path> root{Path{}};
  for (int i = 0; i < 10000; ++i) {
    const auto interval = random_interval(rng);
    const double lam = 1.0 - u(rng);
    for (Direction dir : {Direction::high, Direction::low}) {
      ASSERT_TRUE(validate_multiplier(endpoint_bet(interval, lam, dir),
                                      ForecastingSystem::stationary(interval), root, 1e-12)
                      .ok());
    }
  }
  EXPECT_THROW(endpoint_bet(IntervalForecast(), 0.0, Direction::high), std::invalid_argument);
  EXPECT_THROW(endpoint_bet(IntervalForecast(), 1.5, Direction::low), std::invalid_argument);
}

TEST(EndpointBet, SystemRelativeVersionValidates) {
  std::mt19937_64 rng(191);
  const auto system = testing::random_table_system(rng, 6);
  for (Direction dir : {Direction::high, Direction::low}) {
    EXPECT_TRUE(
        validate_multiplier(endpoint_bet(system, 0.5, dir), system, all_situations(8), 1e-12)
            .ok());
  }
}

}  // namespace
}  // namespace intrand
