// Copyright 2026 The floorcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "floorcert/money.hpp"

#include <cctype>
#include <charconv>
#include <limits>

#include "floorcert/error.hpp"

namespace floorcert {

double micro_to_double(MicroMoney m) {
  return static_cast<double>(m) / static_cast<double>(kMicroScale);
}

MicroMoney parse_micro(const std::string& text) {
  const auto bad = [&](const char* why) -> MicroMoney {
    throw Error(ErrorKind::kConfig,
                "invalid money literal '" + text + "': " + why);
  };
  if (text.empty()) return bad("empty");

  std::size_t dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  const std::string frac =
      dot == std::string::npos ? "" : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return bad("no digits");
  if (frac.size() > 6) return bad("more than six fractional digits");
  for (char c : whole)
    if (!std::isdigit(static_cast<unsigned char>(c))) return bad("not a nonnegative decimal");
  for (char c : frac)
    if (!std::isdigit(static_cast<unsigned char>(c))) return bad("not a nonnegative decimal");

  std::int64_t whole_v = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), whole_v);
    if (ec != std::errc() || p != whole.data() + whole.size()) return bad("overflow");
  }
  std::int64_t frac_v = 0;
  std::int64_t scale = kMicroScale;
  for (char c : frac) {
    scale /= 10;
    frac_v += (c - '0') * scale;
  }
  if (whole_v > std::numeric_limits<std::int64_t>::max() / kMicroScale - 1)
    return bad("overflow");
  return whole_v * kMicroScale + frac_v;
}

std::string format_micro(MicroMoney m) {
  const bool neg = m < 0;
  const std::uint64_t abs = neg ? static_cast<std::uint64_t>(-(m + 1)) + 1
                                : static_cast<std::uint64_t>(m);
  std::string out = neg ? "-" : "";
  out += std::to_string(abs / kMicroScale);
  std::uint64_t frac = abs % kMicroScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

}  // namespace floorcert
