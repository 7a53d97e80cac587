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

#include "intrand/battery.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gtest/gtest.h"
#include "intrand/report_io.hpp"
#include "json.hpp"

namespace intrand {
namespace {

using nlohmann::json;

double final_log(const CapitalProcess& p, const Path& path) {
  return p.trajectory(path, path.size()).final_log();
}

TEST(Battery, EndpointDescriptors) {
  const auto system = ForecastingSystem::stationary(0.5, 0.5);
  const Path ones(10, Outcome::one);
  const auto rel = strategy_from_json(json::parse(R"({"kind":"endpoint","direction":"high"})"),
                                      system);
  EXPECT_NEAR(final_log(rel, ones), 10 * std::log(1.5), 1e-12);
  const auto fixed = strategy_from_json(
      json::parse(R"({"kind":"endpoint","direction":"low","lambda":0.5,"lower":0.2})"), system);
  // low bet against [0.2, 1]: 1 - 0.5 * 0.8 on ones.
  EXPECT_NEAR(final_log(fixed, ones), 10 * std::log(0.6), 1e-12);
  EXPECT_THROW(strategy_from_json(json::parse(R"({"kind":"endpoint","direction":"up"})"), system),
               std::invalid_argument);
  EXPECT_THROW(strategy_from_json(json::parse(R"({"kind":"endpoint"})"), system), json::exception);
}

TEST(Battery, HellingerDescriptors) {
  const auto system = ForecastingSystem::stationary(0.5, 0.5);
  const Path p = parse_bits("0110100110010110");
  const auto plain = strategy_from_json(json::parse(R"({"kind":"hellinger-half"})"), system);
  EXPECT_NEAR(final_log(plain, p),
              capital_from_multiplier(hellinger_half_strategy(), p, p.size()).final_log(), 0.0);
  const auto masked = strategy_from_json(
      json::parse(R"({"kind":"hellinger-near-half","mask":"even","from":5})"), system);
  EXPECT_EQ(final_log(masked, p),
            capital_from_multiplier(
                tail_switch(parity_masked(hellinger_near_half_strategy(), Parity::even), 5), p,
                p.size())
                .final_log());
  EXPECT_THROW(
      strategy_from_json(json::parse(R"({"kind":"hellinger-half","mask":"all"})"), system),
      std::invalid_argument);
}

TEST(Battery, CalibrationDescriptors) {
  const auto system = ForecastingSystem::stationary(0.3, 0.6);
  const Path zeros(200, Outcome::zero);
  const auto single = strategy_from_json(
      json::parse(R"({"kind":"calibration","selection":"odd","epsilon":0.25})"), system);
  const SubmartingaleS s{Gamble::indicator(), system};
  EXPECT_EQ(final_log(single, zeros),
            capital_from_multiplier(calibration_strategy(s, SelectionProcess::odd(),
                                                         CalibrationParams::for_epsilon(s.f, 0.25)),
                                    zeros, zeros.size())
                .final_log());
  const auto mix = strategy_from_json(
      json::parse(R"({"kind":"calibration-mixture","f1":-1,"f0":0,"selection":"every-k:3","R":8})"),
      system);
  EXPECT_EQ(mix.name(), "calibration-mixture");
  EXPECT_EQ(final_log(mix, zeros),
            final_log(mixture_calibration(system, -Gamble::indicator(),
                                          SelectionProcess::every_k(3), 8),
                      zeros));
  EXPECT_THROW(strategy_from_json(json::parse(R"({"kind":"calibration","epsilon":2})"), system),
               std::invalid_argument);
}

TEST(Battery, CompositeDescriptors) {
  const auto system = ForecastingSystem::stationary(0.5, 0.5);
  const json doc = json::parse(R"({"strategies":[
      {"kind":"identity"},
      {"kind":"mixture","name":"m","components":[
          {"kind":"endpoint","direction":"high"},{"kind":"endpoint","direction":"low"}]},
      {"kind":"cap-and-mix","levels":5,"base":{"kind":"endpoint","direction":"high"}},
      {"kind":"standard","R":10}]})");
  const auto battery = battery_from_json(doc, system);
  ASSERT_EQ(battery.size(), 5u);
  EXPECT_EQ(battery[1].name(), "m");
  EXPECT_EQ(battery[3].name(), "endpoint-mixture");
  EXPECT_EQ(battery[4].name(), "calibration-mixture-battery");
  const Path ones(20, Outcome::one);
  // Mixture of 1.5^n and 0.5^n.
  EXPECT_NEAR(final_log(battery[1], ones),
              std::log(0.5 * std::pow(1.5, 20) + 0.5 * std::pow(0.5, 20)), 1e-12);
  for (const auto& p : battery) ASSERT_TRUE(validate_supermartingale(p.tree(6), system, 1e-9).ok());

  EXPECT_EQ(battery_from_json(json::parse(R"([{"kind":"identity"}])"), system).size(), 1u);
  EXPECT_THROW(battery_from_json(json::parse(R"({"strategies":[]})"), system),
               std::invalid_argument);
  EXPECT_THROW(battery_from_json(json::parse(R"([{"kind":"martingale-of-doom"}])"), system),
               std::invalid_argument);
}

// --- Report serialization -----------------------------------------------------

TEST(ReportIo, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  for (double v : {1.0 / 3.0, 6.484985943775338, 1e-300}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(ReportIo, AuditReportJsonAndCsv) {
  const auto system = ForecastingSystem::stationary(0.5, 0.5);
  AuditConfig cfg;
  cfg.horizon = 4;
  cfg.keep_trajectories = true;
  cfg.selections = {SelectionProcess::all()};
  cfg.strategies = {CapitalProcess::from_multiplier(endpoint_bet(system, 1.0, Direction::high)),
                    CapitalProcess::from_multiplier(MultiplierStrategy::constant({0.0, 2.5}))};
  const auto report = audit(parse_bits("1101"), system, cfg);
  const json j = to_json(report);
  EXPECT_EQ(j["horizon"], 4);
  EXPECT_EQ(j["verdict"], "NO-EVIDENCE");
  EXPECT_EQ(j["contract_violation"], true);
  ASSERT_EQ(j["strategies"].size(), 2u);
  EXPECT_EQ(j["strategies"][0]["name"], report.strategies[0].name);
  EXPECT_TRUE(j["strategies"][0]["error"].is_null());
  EXPECT_TRUE(j["strategies"][0]["crossing_step"].is_null());
  EXPECT_TRUE(j["strategies"][1]["error"].is_string());
  EXPECT_EQ(j["frequencies"][0]["selection"], "all");
  EXPECT_DOUBLE_EQ(j["frequencies"][0]["frequency"].get<double>(), 0.75);

  std::ostringstream csv;
  write_trajectory_csv(csv, report);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "step,strategy,log_capital");
  std::getline(lines, line);
  EXPECT_EQ(line, "0," + report.strategies[0].name + ",0");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 9u);  // 5 steps per strategy, one already read

  std::ostringstream strided;
  write_trajectory_csv(strided, report, 3);
  const std::string strided_text = strided.str();
  EXPECT_EQ(std::count(strided_text.begin(), strided_text.end(), '\n'), 1 + 2 * 3);
}

TEST(ReportIo, SweepReportJsonAndCsv) {
  SweepConfig cfg;
  cfg.horizon = 100;
  cfg.include_calibration = false;
  const auto report = sweep_constant_intervals(Path(100, Outcome::one), 0.25, cfg);
  const json j = to_json(report);
  EXPECT_EQ(j["intervals"], 15);
  EXPECT_EQ(j["surviving"], 5);
  EXPECT_EQ(j["lambda_hat"], 1.0);
  EXPECT_EQ(j["upward_closed"], true);
  ASSERT_EQ(j["minimal_surviving"].size(), 1u);
  EXPECT_EQ(j["minimal_surviving"][0]["lower"], 1.0);

  std::ostringstream csv;
  write_sweep_csv(csv, report);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "l,u,verdict,max_log_capital");
  EXPECT_NE(text.find("\n1,1,NO-EVIDENCE,"), std::string::npos);
  EXPECT_NE(text.find("\n0,0.25,REJECT,"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 16);
}

TEST(ReportIo, ConsistencyJson) {
  ConsistencyResult r;
  r.paths = 200;
  r.rejections = 3;
  r.reject_fraction = 0.015;
  r.threshold = std::numeric_limits<double>::infinity();
  r.bound = 0.0;
  const json j = to_json(r);
  EXPECT_TRUE(j["threshold"].is_null());
  EXPECT_EQ(j["within_bound"], false);
}

}  // namespace
}  // namespace intrand
