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

#ifndef FLOORCERT_POLICY_CATALOG_HPP_
#define FLOORCERT_POLICY_CATALOG_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/money.hpp"

namespace floorcert {

// Quantile anchors of the positive logged floors, fit once on the
// development panel and frozen for every later evaluation (including
// out-of-time transfer). Estimator: linear interpolation between order
// statistics at index q*(k-1); recorded in the run manifest.
struct QuantileSet {
  MicroMoney q25 = 0;
  MicroMoney q50 = 0;
  MicroMoney q75 = 0;
  std::string source_panel_id;
  bool frozen = false;

  MicroMoney anchor_value(int which) const;  // which in {25, 50, 75}
};

QuantileSet fit_quantiles(const Panel& panel, std::string source_panel_id = "");

enum class PolicyFamily {
  kBaseline,
  kUniformPercent,         // f = multiplier * f0
  kAbsoluteIncrement,      // f = f0 + increment
  kPositiveFloorQuantile,  // f0 > 0 and f0 < q: raise to q; zero floors stay zero
  kAllFloorQuantile,       // f0 < q: raise to q (zero floors included)
  kMarginGatedIncrement,   // gap >= threshold: f0 + increment, else f0
  kHybridQuantileMargin,   // gap >= threshold: max(f0, q), else f0
};

const char* policy_family_name(PolicyFamily f);
PolicyFamily policy_family_from_name(const std::string& name);

struct Policy {
  std::string id;
  std::string name;
  PolicyFamily family = PolicyFamily::kBaseline;
  std::int64_t multiplier_micro = kMicroScale;  // >= 1 (floors never decrease)
  MicroMoney increment = 0;                     // >= 0
  int quantile = 25;                            // 25, 50 or 75
  MicroMoney gap_threshold = 0;                 // >= 0, tested against b - f0

  bool is_baseline() const { return family == PolicyFamily::kBaseline; }
  bool uses_quantiles() const {
    return family == PolicyFamily::kPositiveFloorQuantile ||
           family == PolicyFamily::kAllFloorQuantile ||
           family == PolicyFamily::kHybridQuantileMargin;
  }
};

// Counterfactual floor f^pi in micro units; always >= f0.
MicroMoney candidate_floor(const Policy& policy, Money floor, Money bid,
                           const QuantileSet& quantiles);
MicroMoney candidate_floor(const Policy& policy, const AuctionRow& row,
                           const QuantileSet& quantiles);

// Ordered finite catalog, baseline first.
struct Catalog {
  std::vector<Policy> policies;
  QuantileSet quantiles;

  int non_baseline_count() const {
    return static_cast<int>(policies.size()) - 1;
  }
  bool needs_quantiles() const;
  const Policy* find(const std::string& id) const;
};

// Parsed but not yet validated catalog description. The text form is one
// [section] per policy:
//   [P1]
//   name = Uniform +5%
//   family = uniform-percent
//   multiplier = 1.05
struct CatalogSpecEntry {
  std::string id;
  std::string name;
  std::string family;
  std::optional<std::string> multiplier;
  std::optional<std::string> increment;
  std::optional<std::string> quantile;
  std::optional<std::string> gap_threshold;
};

std::vector<CatalogSpecEntry> parse_catalog_spec(std::istream& in);
std::vector<CatalogSpecEntry> parse_catalog_spec_file(const std::string& path);

// The 19-policy catalog used throughout: baseline, uniform percentage
// raises, absolute increments, quantile floors, margin-gated rules.
std::vector<CatalogSpecEntry> paper19_spec();

Catalog build_catalog(const std::vector<CatalogSpecEntry>& spec,
                      const QuantileSet& quantiles);

}  // namespace floorcert

#endif  // FLOORCERT_POLICY_CATALOG_HPP_
