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

#ifndef FLOORCERT_MONEY_HPP_
#define FLOORCERT_MONEY_HPP_

#include <cstdint>
#include <string>

namespace floorcert {

// Logged prices are integer minor units (the raw price scale of the log).
// Derived prices — candidate floors, quantile anchors, window widths,
// boundary distances — carry six extra decimal digits ("micro units") so
// that every retention comparison b >= f^pi is an exact integer compare.
// Ties at the boundary decide retention, so no floating point is allowed
// anywhere a price meets a price.
using Money = std::int64_t;       // minor units
using MicroMoney = std::int64_t;  // minor units * 1e6

inline constexpr std::int64_t kMicroScale = 1'000'000;

// Largest logged price accepted at ingestion. Keeps f * multiplier and the
// micro-unit representation inside int64.
inline constexpr Money kMaxLoggedMoney = 4'000'000'000'000;

constexpr MicroMoney to_micro(Money m) { return m * kMicroScale; }

// Candidate floors saturate here: one unit above any representable bid, so
// a saturated candidate can never be cleared and never repriced against.
inline constexpr MicroMoney kCandidateCap =
    kMaxLoggedMoney * kMicroScale + kMicroScale;

constexpr MicroMoney saturate_candidate(__int128 c) {
  return c > static_cast<__int128>(kCandidateCap) ? kCandidateCap
                                                  : static_cast<MicroMoney>(c);
}

// Micro units as a double amount of minor units. Statistics only.
double micro_to_double(MicroMoney m);

// Parses a nonnegative decimal literal ("12", "1.05", "7.5") into micro
// units. Rejects more than six fractional digits, signs, and magnitudes
// that do not fit. Throws Error{kConfig}.
MicroMoney parse_micro(const std::string& text);

// Canonical decimal rendering, trailing zeros trimmed ("7.5", not "7.500000").
std::string format_micro(MicroMoney m);

}  // namespace floorcert

#endif  // FLOORCERT_MONEY_HPP_
