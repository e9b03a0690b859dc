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

#ifndef FLOORCERT_REPLAY_ENGINE_HPP_
#define FLOORCERT_REPLAY_ENGINE_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"

namespace floorcert {

struct ReplayOptions {
  // Daily lifts normalize by the same day's baseline yield by default;
  // the global alternative divides each day's mean contrast by the
  // panel-wide baseline mean instead.
  enum class DailyBaseline { kDayLocal, kGlobal };
  DailyBaseline daily_baseline = DailyBaseline::kDayLocal;
};

struct SegmentReplay {
  double lift = 0;
  std::map<std::string, double> daily_lifts;
  std::int64_t n = 0;
};

struct ReplaySummary {
  std::string policy_id;
  double mean_yield = 0;      // minor units per opportunity
  double lift = 0;            // (mean_yield - baseline) / baseline
  double retained_share = 0;  // retained rows / logged fills
  std::map<std::string, double> daily_lifts;  // day label -> lift
  std::map<SegmentKey, SegmentReplay> segment_lifts;  // empty unless requested
};

// Replay outcome of one row: max(payment, candidate) when the row was
// logged filled and its bid clears the candidate floor, zero otherwise.
// Requires candidate >= row.floor (Assumption: floors never decrease).
MicroMoney replay_row(const AuctionRow& row, MicroMoney candidate);

ReplaySummary replay_policy(const Panel& panel, const Policy& policy,
                            const QuantileSet& quantiles,
                            const SegmentMap* segments = nullptr,
                            const ReplayOptions& options = {});

// One summary per catalog policy, baseline first. Row-parallel over
// fixed-size chunks; all money totals accumulate as exact integers, so the
// output is bit-identical for any worker count and any row partitioning.
std::vector<ReplaySummary> replay_catalog(const Panel& panel,
                                          const Catalog& catalog,
                                          const SegmentMap* segments = nullptr,
                                          const ReplayOptions& options = {});

namespace detail {

// Exact per-day replay totals for one policy over a row subset.
struct DayTotals {
  std::int64_t rows = 0;
  std::int64_t base_fills = 0;
  std::int64_t retained = 0;
  __int128 base_yield = 0;    // micro units
  __int128 policy_yield = 0;  // micro units
};

struct ReplayTotals {
  std::vector<DayTotals> by_day;
  std::int64_t rows = 0;
  std::int64_t base_fills = 0;
  std::int64_t retained = 0;
  __int128 base_yield = 0;
  __int128 policy_yield = 0;
};

// The parallel kernel. `subset` empty means all rows.
ReplayTotals replay_totals(const Panel& panel, const Policy& policy,
                           const QuantileSet& quantiles,
                           std::span<const std::int64_t> subset = {});

// Serial twin of replay_totals with identical output, kept for the
// benchmark comparison and for tests pinning the parallel kernel.
ReplayTotals replay_totals_serial(const Panel& panel, const Policy& policy,
                                  const QuantileSet& quantiles,
                                  std::span<const std::int64_t> subset = {});

}  // namespace detail

}  // namespace floorcert

#endif  // FLOORCERT_REPLAY_ENGINE_HPP_
