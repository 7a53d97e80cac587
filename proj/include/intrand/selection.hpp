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
#include <charconv>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "intrand/outcome.hpp"
#include "json.hpp"

namespace intrand {

/// A 0/1-valued process deciding which steps enter a relative frequency.
/// Parities refer to the length of the situation, so EvenSteps selects the
/// outcomes x_1, x_3, ... and OddSteps selects x_2, x_4, ....
class SelectionProcess {
 public:
  struct All {};
  struct EvenSteps {};
  struct OddSteps {};
  /// Situations whose length is a multiple of k.
  struct EveryK {
    std::size_t k;
  };
  /// Situations whose last m outcomes are all ones.
  struct AfterOnes {
    std::size_t m;
  };
  struct Table {
    std::map<std::string, bool> entries;
    bool fallback = false;
  };
  struct None {};

  using Variant =
      std::variant<All, EvenSteps, OddSteps, EveryK, AfterOnes, Table, None>;

  SelectionProcess() : variant_(All{}) {}
  explicit SelectionProcess(Variant v) : variant_(std::move(v)) {
    if (const auto* e = std::get_if<EveryK>(&variant_); e && e->k == 0) {
      throw std::domain_error("every-k selection needs k >= 1");
    }
    if (const auto* a = std::get_if<AfterOnes>(&variant_); a && a->m == 0) {
      throw std::domain_error("after-ones selection needs m >= 1");
    }
    if (const auto* t = std::get_if<Table>(&variant_)) {
      for (const auto& [key, value] : t->entries) {
        max_key_ = std::max(max_key_, key.size());
      }
    }
  }

  static SelectionProcess all() { return SelectionProcess(All{}); }
  static SelectionProcess even() { return SelectionProcess(EvenSteps{}); }
  static SelectionProcess odd() { return SelectionProcess(OddSteps{}); }
  static SelectionProcess none() { return SelectionProcess(None{}); }
  static SelectionProcess every_k(std::size_t k) {
    return SelectionProcess(EveryK{k});
  }
  static SelectionProcess after_ones(std::size_t m) {
    return SelectionProcess(AfterOnes{m});
  }

  bool operator()(Situation s) const {
    return std::visit(
        [&](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, All>) return true;
          else if constexpr (std::is_same_v<T, None>) return false;
          else if constexpr (std::is_same_v<T, EvenSteps>) return s.size() % 2 == 0;
          else if constexpr (std::is_same_v<T, OddSteps>) return s.size() % 2 == 1;
          else if constexpr (std::is_same_v<T, EveryK>) return s.size() % v.k == 0;
          else if constexpr (std::is_same_v<T, AfterOnes>) {
            if (s.size() < v.m) return false;
            return std::all_of(s.end() - static_cast<std::ptrdiff_t>(v.m),
                               s.end(),
                               [](Outcome x) { return x == Outcome::one; });
          } else {
            if (s.size() > max_key_) return v.fallback;
            const auto it = v.entries.find(to_bits(s));
            return it == v.entries.end() ? v.fallback : it->second;
          }
        },
        variant_);
  }

  int value(Situation s) const { return (*this)(s) ? 1 : 0; }

  const Variant& variant() const noexcept { return variant_; }

  /// Preset name: all, even, odd, none, every-k:K, after-ones:M, table.
  std::string name() const {
    return std::visit(
        [](const auto& v) -> std::string {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, All>) return "all";
          else if constexpr (std::is_same_v<T, None>) return "none";
          else if constexpr (std::is_same_v<T, EvenSteps>) return "even";
          else if constexpr (std::is_same_v<T, OddSteps>) return "odd";
          else if constexpr (std::is_same_v<T, EveryK>) return "every-k:" + std::to_string(v.k);
          else if constexpr (std::is_same_v<T, AfterOnes>) return "after-ones:" + std::to_string(v.m);
          else return "table";
        },
        variant_);
  }

 private:
  Variant variant_;
  std::size_t max_key_ = 0;
};

namespace detail {
inline std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad count in selection preset " +
                                std::string(what));
  }
  return value;
}
}  // namespace detail

inline SelectionProcess selection_from_preset(std::string_view preset) {
  if (preset == "all") return SelectionProcess::all();
  if (preset == "even") return SelectionProcess::even();
  if (preset == "odd") return SelectionProcess::odd();
  if (preset == "none") return SelectionProcess::none();
  const auto colon = preset.find(':');
  if (colon != std::string_view::npos) {
    const auto head = preset.substr(0, colon);
    const auto tail = preset.substr(colon + 1);
    if (head == "every-k") {
      return SelectionProcess::every_k(detail::parse_count(tail, preset));
    }
    if (head == "after-ones") {
      return SelectionProcess::after_ones(detail::parse_count(tail, preset));
    }
  }
  throw std::invalid_argument("unknown selection preset: " + std::string(preset));
}

inline nlohmann::json to_json(const SelectionProcess& sel) {
  if (const auto* t = std::get_if<SelectionProcess::Table>(&sel.variant())) {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [key, value] : t->entries) entries[key] = value ? 1 : 0;
    return {{"variant", "table"}, {"default", t->fallback ? 1 : 0},
            {"entries", entries}};
  }
  return sel.name();
}

/// Accepts a preset string or {"variant": "table", ...}.
inline SelectionProcess selection_from_json(const nlohmann::json& j) {
  if (j.is_string()) return selection_from_preset(j.get<std::string>());
  if (j.at("variant").get<std::string>() != "table") {
    return selection_from_preset(j.at("variant").get<std::string>());
  }
  SelectionProcess::Table table;
  table.fallback = j.value("default", 0) != 0;
  if (j.contains("entries")) {
    for (const auto& [key, value] : j.at("entries").items()) {
      for (char c : key) {
        if (c != '0' && c != '1') {
          throw std::domain_error("selection table key is not a bit string: " + key);
        }
      }
      table.entries.emplace(key, value.get<int>() != 0);
    }
  }
  return SelectionProcess(std::move(table));
}

}  // namespace intrand
