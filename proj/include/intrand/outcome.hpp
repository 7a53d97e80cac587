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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace intrand {

/// A binary outcome x in {0, 1}.
enum class Outcome : std::uint8_t { zero = 0, one = 1 };

/// An outcome sequence x_1, x_2, ... stored in order.
using Path = std::vector<Outcome>;

/// A situation (x_1, ..., x_k): a finite prefix of a path. The empty span is
/// the root. The forecast consumed to produce x_{k+1} is indexed by the
/// situation of length k.
using Situation = std::span<const Outcome>;

inline constexpr int bit(Outcome x) noexcept { return static_cast<int>(x); }

inline constexpr Outcome outcome_of(bool b) noexcept {
  return b ? Outcome::one : Outcome::zero;
}

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses an ASCII bit stream. Whitespace is ignored; any other byte that is
/// not '0' or '1' is a format error.
inline Path parse_bits(std::string_view text) {
  Path out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    switch (c) {
      case '0': out.push_back(Outcome::zero); break;
      case '1': out.push_back(Outcome::one); break;
      case ' ': case '\t': case '\n': case '\r': case '\v': case '\f': break;
      default:
        throw FormatError("invalid byte in bit stream at offset " +
                          std::to_string(i));
    }
  }
  return out;
}

inline std::string to_bits(Situation s) {
  std::string out;
  out.reserve(s.size());
  for (Outcome x : s) out.push_back(x == Outcome::one ? '1' : '0');
  return out;
}

/// Situation of length `depth` whose bits spell `index`, first bit most
/// significant. Used to enumerate complete trees.
inline Path situation_from_index(std::uint64_t index, std::size_t depth) {
  Path out(depth);
  for (std::size_t k = 0; k < depth; ++k) {
    out[k] = outcome_of((index >> (depth - 1 - k)) & 1u);
  }
  return out;
}

inline std::uint64_t index_of(Situation s) noexcept {
  std::uint64_t index = 0;
  for (Outcome x : s) index = (index << 1) | static_cast<std::uint64_t>(bit(x));
  return index;
}

}  // namespace intrand
