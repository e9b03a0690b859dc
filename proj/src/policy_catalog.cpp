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

#include "floorcert/policy_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "floorcert/error.hpp"

namespace floorcert {

MicroMoney QuantileSet::anchor_value(int which) const {
  switch (which) {
    case 25: return q25;
    case 50: return q50;
    case 75: return q75;
  }
  throw Error(ErrorKind::kContract, "quantile anchor must be 25, 50 or 75");
}

QuantileSet fit_quantiles(const Panel& panel, std::string source_panel_id) {
  std::vector<Money> positive;
  positive.reserve(panel.size());
  for (Money f : panel.floors())
    if (f > 0) positive.push_back(f);
  if (positive.empty())
    throw Error(ErrorKind::kDomain, "no positive floors to fit quantiles from");
  std::sort(positive.begin(), positive.end());

  // Order-statistic interpolation at index q*(k-1). For quartiles the index
  // is a multiple of 1/4, so the interpolated value is exact in micro units.
  const auto at = [&](int quarters) -> MicroMoney {
    const std::int64_t k = static_cast<std::int64_t>(positive.size());
    const std::int64_t scaled = quarters * (k - 1);  // index * 4
    const std::int64_t lo = scaled / 4;
    const std::int64_t rem = scaled % 4;
    MicroMoney value = to_micro(positive[lo]);
    if (rem != 0)
      value += rem * (positive[lo + 1] - positive[lo]) * (kMicroScale / 4);
    return value;
  };

  QuantileSet q;
  q.q25 = at(1);
  q.q50 = at(2);
  q.q75 = at(3);
  q.source_panel_id = std::move(source_panel_id);
  q.frozen = true;
  return q;
}

const char* policy_family_name(PolicyFamily f) {
  switch (f) {
    case PolicyFamily::kBaseline: return "baseline";
    case PolicyFamily::kUniformPercent: return "uniform-percent";
    case PolicyFamily::kAbsoluteIncrement: return "absolute-increment";
    case PolicyFamily::kPositiveFloorQuantile: return "positive-floor-quantile";
    case PolicyFamily::kAllFloorQuantile: return "all-floor-quantile";
    case PolicyFamily::kMarginGatedIncrement: return "margin-gated-increment";
    case PolicyFamily::kHybridQuantileMargin: return "hybrid-quantile-margin";
  }
  return "unknown";
}

PolicyFamily policy_family_from_name(const std::string& name) {
  if (name == "baseline") return PolicyFamily::kBaseline;
  if (name == "uniform-percent") return PolicyFamily::kUniformPercent;
  if (name == "absolute-increment") return PolicyFamily::kAbsoluteIncrement;
  if (name == "positive-floor-quantile") return PolicyFamily::kPositiveFloorQuantile;
  if (name == "all-floor-quantile") return PolicyFamily::kAllFloorQuantile;
  if (name == "margin-gated-increment") return PolicyFamily::kMarginGatedIncrement;
  if (name == "hybrid-quantile-margin") return PolicyFamily::kHybridQuantileMargin;
  throw Error(ErrorKind::kConfig, "unknown policy family '" + name + "'");
}

MicroMoney candidate_floor(const Policy& policy, Money floor, Money bid,
                           const QuantileSet& quantiles) {
  const MicroMoney f0 = to_micro(floor);
  switch (policy.family) {
    case PolicyFamily::kBaseline:
      return f0;
    case PolicyFamily::kUniformPercent:
      // f0 minor units times a micro-scaled multiplier lands in micro units.
      return saturate_candidate(static_cast<__int128>(floor) *
                                policy.multiplier_micro);
    case PolicyFamily::kAbsoluteIncrement:
      return saturate_candidate(static_cast<__int128>(f0) + policy.increment);
    case PolicyFamily::kPositiveFloorQuantile: {
      const MicroMoney q = quantiles.anchor_value(policy.quantile);
      return (floor > 0 && f0 < q) ? q : f0;
    }
    case PolicyFamily::kAllFloorQuantile: {
      const MicroMoney q = quantiles.anchor_value(policy.quantile);
      return f0 < q ? q : f0;
    }
    case PolicyFamily::kMarginGatedIncrement:
      return to_micro(bid - floor) >= policy.gap_threshold
                 ? saturate_candidate(static_cast<__int128>(f0) + policy.increment)
                 : f0;
    case PolicyFamily::kHybridQuantileMargin: {
      if (to_micro(bid - floor) < policy.gap_threshold) return f0;
      const MicroMoney q = quantiles.anchor_value(policy.quantile);
      return std::max(f0, q);
    }
  }
  throw Error(ErrorKind::kContract, "unhandled policy family");
}

MicroMoney candidate_floor(const Policy& policy, const AuctionRow& row,
                           const QuantileSet& quantiles) {
  return candidate_floor(policy, row.floor, row.bid, quantiles);
}

bool Catalog::needs_quantiles() const {
  return std::any_of(policies.begin(), policies.end(),
                     [](const Policy& p) { return p.uses_quantiles(); });
}

const Policy* Catalog::find(const std::string& id) const {
  for (const Policy& p : policies)
    if (p.id == id) return &p;
  return nullptr;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<CatalogSpecEntry> parse_catalog_spec(std::istream& in) {
  std::vector<CatalogSpecEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw Error(ErrorKind::kConfig, "catalog line " + std::to_string(line_no) +
                                            ": unterminated section header");
      entries.emplace_back();
      entries.back().id = trim(t.substr(1, t.size() - 2));
      if (entries.back().id.empty())
        throw Error(ErrorKind::kConfig, "catalog line " + std::to_string(line_no) +
                                            ": empty policy id");
      continue;
    }
    if (entries.empty())
      throw Error(ErrorKind::kConfig, "catalog line " + std::to_string(line_no) +
                                          ": key before any [policy] section");
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::kConfig, "catalog line " + std::to_string(line_no) +
                                          ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    CatalogSpecEntry& e = entries.back();
    if (key == "name") e.name = value;
    else if (key == "family") e.family = value;
    else if (key == "multiplier") e.multiplier = value;
    else if (key == "increment") e.increment = value;
    else if (key == "quantile") e.quantile = value;
    else if (key == "gap_threshold") e.gap_threshold = value;
    else
      throw Error(ErrorKind::kConfig, "catalog line " + std::to_string(line_no) +
                                          ": unknown key '" + key + "'");
  }
  return entries;
}

std::vector<CatalogSpecEntry> parse_catalog_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::kIo, "cannot open catalog file '" + path + "'");
  return parse_catalog_spec(in);
}

std::vector<CatalogSpecEntry> paper19_spec() {
  const auto entry = [](const char* id, const char* name, const char* family,
                        const char* mult, const char* inc, const char* quant,
                        const char* gap) {
    CatalogSpecEntry e;
    e.id = id;
    e.name = name;
    e.family = family;
    if (mult) e.multiplier = mult;
    if (inc) e.increment = inc;
    if (quant) e.quantile = quant;
    if (gap) e.gap_threshold = gap;
    return e;
  };
  return {
      entry("P0", "Logged Status Quo", "baseline", nullptr, nullptr, nullptr, nullptr),
      entry("P1", "Uniform +5%", "uniform-percent", "1.05", nullptr, nullptr, nullptr),
      entry("P2", "Uniform +10%", "uniform-percent", "1.10", nullptr, nullptr, nullptr),
      entry("P3", "Uniform +15%", "uniform-percent", "1.15", nullptr, nullptr, nullptr),
      entry("P4", "Uniform +20%", "uniform-percent", "1.20", nullptr, nullptr, nullptr),
      entry("P5", "Uniform +30%", "uniform-percent", "1.30", nullptr, nullptr, nullptr),
      entry("P6", "Add 5 To All Floors", "absolute-increment", nullptr, "5", nullptr, nullptr),
      entry("P7", "Add 10 To All Floors", "absolute-increment", nullptr, "10", nullptr, nullptr),
      entry("P8", "Add 20 To All Floors", "absolute-increment", nullptr, "20", nullptr, nullptr),
      entry("P9", "Positive Floors To Q25", "positive-floor-quantile", nullptr, nullptr, "25", nullptr),
      entry("P10", "Positive Floors To Q50", "positive-floor-quantile", nullptr, nullptr, "50", nullptr),
      entry("P11", "Positive Floors To Q75", "positive-floor-quantile", nullptr, nullptr, "75", nullptr),
      entry("P12", "All Low Floors To Q25", "all-floor-quantile", nullptr, nullptr, "25", nullptr),
      entry("P13", "All Low Floors To Q50", "all-floor-quantile", nullptr, nullptr, "50", nullptr),
      entry("P14", "Gap 25 Add 5", "margin-gated-increment", nullptr, "5", nullptr, "25"),
      entry("P15", "Gap 50 Add 10", "margin-gated-increment", nullptr, "10", nullptr, "50"),
      entry("P16", "Gap 100 Add 20", "margin-gated-increment", nullptr, "20", nullptr, "100"),
      entry("P17", "Q50 Margin-Gated Floor", "hybrid-quantile-margin", nullptr, nullptr, "50", "50"),
      entry("P18", "Q75 Margin-Gated Floor", "hybrid-quantile-margin", nullptr, nullptr, "75", "100"),
  };
}

Catalog build_catalog(const std::vector<CatalogSpecEntry>& spec,
                      const QuantileSet& quantiles) {
  if (spec.empty())
    throw Error(ErrorKind::kConfig, "catalog spec is empty");

  Catalog catalog;
  catalog.quantiles = quantiles;
  std::set<std::string> ids;
  int baselines = 0;

  for (const CatalogSpecEntry& e : spec) {
    if (!ids.insert(e.id).second)
      throw Error(ErrorKind::kConfig, "duplicate policy id '" + e.id + "'");

    Policy p;
    p.id = e.id;
    p.name = e.name.empty() ? e.id : e.name;
    p.family = policy_family_from_name(e.family);

    const auto require = [&](const std::optional<std::string>& v,
                             const char* key) -> const std::string& {
      if (!v)
        throw Error(ErrorKind::kConfig,
                    "policy '" + e.id + "' is missing " + key);
      return *v;
    };

    switch (p.family) {
      case PolicyFamily::kBaseline:
        ++baselines;
        break;
      case PolicyFamily::kUniformPercent:
        p.multiplier_micro = parse_micro(require(e.multiplier, "multiplier"));
        if (p.multiplier_micro < kMicroScale)
          throw Error(ErrorKind::kConfig,
                      "policy '" + e.id +
                          "' has multiplier < 1; candidate floors never decrease");
        break;
      case PolicyFamily::kAbsoluteIncrement:
        p.increment = parse_micro(require(e.increment, "increment"));
        break;
      case PolicyFamily::kPositiveFloorQuantile:
      case PolicyFamily::kAllFloorQuantile:
        p.quantile = std::stoi(require(e.quantile, "quantile"));
        break;
      case PolicyFamily::kMarginGatedIncrement:
        p.increment = parse_micro(require(e.increment, "increment"));
        p.gap_threshold = parse_micro(require(e.gap_threshold, "gap_threshold"));
        break;
      case PolicyFamily::kHybridQuantileMargin:
        p.quantile = std::stoi(require(e.quantile, "quantile"));
        p.gap_threshold = parse_micro(require(e.gap_threshold, "gap_threshold"));
        break;
    }
    if (p.uses_quantiles() && p.quantile != 25 && p.quantile != 50 &&
        p.quantile != 75)
      throw Error(ErrorKind::kConfig,
                  "policy '" + e.id + "' quantile must be 25, 50 or 75");
    catalog.policies.push_back(std::move(p));
  }

  if (baselines != 1)
    throw Error(ErrorKind::kConfig, "catalog must contain exactly one baseline, got " +
                                        std::to_string(baselines));
  if (!catalog.policies.front().is_baseline())
    throw Error(ErrorKind::kConfig, "the first catalog entry must be the baseline");
  if (catalog.policies.size() < 2)
    throw Error(ErrorKind::kConfig, "catalog needs at least one non-baseline policy");
  if (catalog.needs_quantiles() && !quantiles.frozen)
    throw Error(ErrorKind::kContract,
                "catalog uses quantile anchors but the quantile set is not frozen");
  return catalog;
}

}  // namespace floorcert
