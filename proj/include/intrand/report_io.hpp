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

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "intrand/audit.hpp"
#include "intrand/tree.hpp"
#include "json.hpp"

namespace intrand {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for the
/// non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Log values in JSON: -inf (zero capital) is written as null.
inline nlohmann::json log_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const FrequencySummary& f) {
  return {{"selection", f.selection},
          {"selected", f.selected},
          {"frequency", optional_json(f.frequency)},
          {"lower_margin", f.lower_margin},
          {"upper_margin", f.upper_margin},
          {"slack", log_json(f.slack)},
          {"within_bounds", optional_json(f.within_bounds)}};
}

inline nlohmann::json to_json(const StrategyResult& r) {
  return {{"name", r.name},
          {"params", r.params},
          {"verdict", to_string(r.verdict)},
          {"max_log_capital", log_json(r.max_log_capital)},
          {"argmax_step", r.argmax_step},
          {"final_log_capital", log_json(r.final_log_capital)},
          {"crossing_step", optional_json(r.crossing_step)},
          {"error", optional_json(r.error)}};
}

inline nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : r.strategies) strategies.push_back(to_json(s));
  nlohmann::json frequencies = nlohmann::json::array();
  for (const auto& f : r.frequencies) frequencies.push_back(to_json(f));
  return {{"horizon", r.horizon},
          {"threshold", r.threshold},
          {"verdict", to_string(r.verdict)},
          {"contract_violation", r.contract_violation},
          {"strategies", strategies},
          {"frequencies", frequencies}};
}

inline nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json minimal = nlohmann::json::array();
  for (const auto& i : r.minimal_surviving) {
    minimal.push_back({{"lower", i.lower()}, {"upper", i.upper()}});
  }
  std::size_t surviving = 0;
  for (const auto& c : r.cells) surviving += c.verdict == Verdict::no_evidence ? 1 : 0;
  return {{"grid_step", r.grid_step},
          {"grid_points", r.grid_points},
          {"horizon", r.horizon},
          {"threshold", r.threshold},
          {"intervals", r.cells.size()},
          {"surviving", surviving},
          {"minimal_surviving", minimal},
          {"lambda_hat", optional_json(r.lambda_hat)},
          {"upsilon_hat", optional_json(r.upsilon_hat)},
          {"closure_changes", r.closure_changes},
          {"upward_closed", r.upward_closed()}};
}

inline nlohmann::json to_json(const ConsistencyResult& r) {
  return {{"paths", r.paths},
          {"rejections", r.rejections},
          {"reject_fraction", r.reject_fraction},
          {"threshold", log_json(r.threshold)},
          {"bound", r.bound},
          {"within_bound", r.reject_fraction <= r.bound}};
}

/// CSV columns: step,strategy,log_capital. Every `stride`-th step is written,
/// plus the last one.
inline void write_trajectory_csv(std::ostream& out, const AuditReport& r,
                                 std::size_t stride = 1) {
  if (stride == 0) stride = 1;
  out << "step,strategy,log_capital\n";
  for (const auto& s : r.strategies) {
    const auto& values = s.trajectory.log_values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k % stride != 0 && k + 1 != values.size()) continue;
      out << k << ',' << s.name << ',' << format_double(values[k]) << '\n';
    }
  }
}

/// CSV columns: l,u,verdict,max_log_capital.
inline void write_sweep_csv(std::ostream& out, const SweepReport& r) {
  out << "l,u,verdict,max_log_capital\n";
  for (const auto& c : r.cells) {
    out << format_double(c.lower) << ',' << format_double(c.upper) << ','
        << to_string(c.verdict) << ',' << format_double(c.max_log_capital) << '\n';
  }
}

}  // namespace intrand
