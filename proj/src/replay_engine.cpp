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

#include "floorcert/replay_engine.hpp"

#include <omp.h>

#include <algorithm>

#include "floorcert/error.hpp"

namespace floorcert {

MicroMoney replay_row(const AuctionRow& row, MicroMoney candidate) {
  if (candidate < to_micro(row.floor))
    throw Error(ErrorKind::kContract, "candidate floor below the logged floor");
  if (!row.filled || to_micro(row.bid) < candidate) return 0;
  return std::max(to_micro(row.payment), candidate);
}

namespace detail {

namespace {

// Rows per parallel work unit. Fixed independently of the thread count;
// integer accumulation makes the reduction order irrelevant anyway.
constexpr std::int64_t kChunkRows = 1 << 14;

void merge(ReplayTotals& into, const ReplayTotals& part) {
  for (std::size_t d = 0; d < into.by_day.size(); ++d) {
    DayTotals& a = into.by_day[d];
    const DayTotals& b = part.by_day[d];
    a.rows += b.rows;
    a.base_fills += b.base_fills;
    a.retained += b.retained;
    a.base_yield += b.base_yield;
    a.policy_yield += b.policy_yield;
  }
}

template <typename RowIndex>
void accumulate_range(const Panel& panel, const Policy& policy,
                      const QuantileSet& quantiles, RowIndex row_of,
                      std::int64_t begin, std::int64_t end, ReplayTotals& acc) {
  const auto& floors = panel.floors();
  const auto& bids = panel.bids();
  const auto& payments = panel.payments();
  const auto& filled = panel.filled();
  const auto& day_idx = panel.day_index();

  for (std::int64_t k = begin; k < end; ++k) {
    const std::int64_t i = row_of(k);
    DayTotals& day = acc.by_day[day_idx[i]];
    ++day.rows;
    if (!filled[i]) continue;
    ++day.base_fills;
    const MicroMoney bid = to_micro(bids[i]);
    const MicroMoney paid = to_micro(payments[i]);
    // Baseline always retains a logged fill (bid >= floor by invariant).
    day.base_yield += std::max(paid, to_micro(floors[i]));
    const MicroMoney cand = candidate_floor(policy, floors[i], bids[i], quantiles);
    if (bid >= cand) {
      ++day.retained;
      day.policy_yield += std::max(paid, cand);
    }
  }
}

void finish_totals(ReplayTotals& t) {
  for (const DayTotals& d : t.by_day) {
    t.rows += d.rows;
    t.base_fills += d.base_fills;
    t.retained += d.retained;
    t.base_yield += d.base_yield;
    t.policy_yield += d.policy_yield;
  }
}

}  // namespace

ReplayTotals replay_totals(const Panel& panel, const Policy& policy,
                           const QuantileSet& quantiles,
                           std::span<const std::int64_t> subset) {
  const std::int64_t n =
      subset.empty() ? panel.size() : static_cast<std::int64_t>(subset.size());
  const std::size_t n_days = panel.days().size();
  const std::int64_t n_chunks = (n + kChunkRows - 1) / kChunkRows;

  ReplayTotals total;
  total.by_day.assign(n_days, DayTotals{});

#pragma omp parallel
  {
    ReplayTotals local;
    local.by_day.assign(n_days, DayTotals{});
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      const std::int64_t begin = c * kChunkRows;
      const std::int64_t end = std::min(begin + kChunkRows, n);
      if (subset.empty()) {
        accumulate_range(panel, policy, quantiles,
                         [](std::int64_t k) { return k; }, begin, end, local);
      } else {
        accumulate_range(panel, policy, quantiles,
                         [&](std::int64_t k) { return subset[k]; }, begin, end,
                         local);
      }
    }
#pragma omp critical
    merge(total, local);
  }

  finish_totals(total);
  return total;
}

ReplayTotals replay_totals_serial(const Panel& panel, const Policy& policy,
                                  const QuantileSet& quantiles,
                                  std::span<const std::int64_t> subset) {
  const std::int64_t n =
      subset.empty() ? panel.size() : static_cast<std::int64_t>(subset.size());
  ReplayTotals total;
  total.by_day.assign(panel.days().size(), DayTotals{});
  if (subset.empty()) {
    accumulate_range(panel, policy, quantiles,
                     [](std::int64_t k) { return k; }, 0, n, total);
  } else {
    accumulate_range(panel, policy, quantiles,
                     [&](std::int64_t k) { return subset[k]; }, 0, n, total);
  }
  finish_totals(total);
  return total;
}

}  // namespace detail

namespace {

double lift_from(__int128 policy_sum, __int128 base_sum) {
  return static_cast<double>(policy_sum - base_sum) / static_cast<double>(base_sum);
}

// Daily lifts from exact per-day totals. Days whose baseline yield is zero
// have no defined day-local lift and are omitted.
std::map<std::string, double> daily_lifts_from(
    const Panel& panel, const detail::ReplayTotals& t, __int128 global_base,
    std::int64_t global_rows, ReplayOptions::DailyBaseline mode) {
  std::map<std::string, double> out;
  for (std::size_t d = 0; d < t.by_day.size(); ++d) {
    const auto& day = t.by_day[d];
    if (day.rows == 0) continue;
    const __int128 contrast = day.policy_yield - day.base_yield;
    if (mode == ReplayOptions::DailyBaseline::kDayLocal) {
      if (day.base_yield <= 0) continue;
      out[panel.days()[d]] =
          static_cast<double>(contrast) / static_cast<double>(day.base_yield);
    } else {
      // mean contrast per opportunity on the day over the global mean yield
      out[panel.days()[d]] =
          (static_cast<double>(contrast) / static_cast<double>(day.rows)) /
          (static_cast<double>(global_base) / static_cast<double>(global_rows));
    }
  }
  return out;
}

ReplaySummary summarize(const Panel& panel, const Policy& policy,
                        const detail::ReplayTotals& t, const SegmentMap* segments,
                        const QuantileSet& quantiles, const ReplayOptions& options) {
  if (t.base_yield <= 0)
    throw Error(ErrorKind::kDomain,
                "baseline mean yield is zero; replay lift is undefined");
  ReplaySummary s;
  s.policy_id = policy.id;
  s.mean_yield = static_cast<double>(t.policy_yield) /
                 (static_cast<double>(kMicroScale) * static_cast<double>(t.rows));
  s.lift = lift_from(t.policy_yield, t.base_yield);
  s.retained_share =
      static_cast<double>(t.retained) / static_cast<double>(t.base_fills);
  s.daily_lifts =
      daily_lifts_from(panel, t, t.base_yield, t.rows, options.daily_baseline);

  if (segments != nullptr) {
    for (const SegmentGroup& g : segments->covered) {
      const auto st = detail::replay_totals(panel, policy, quantiles, g.rows);
      if (st.base_yield <= 0) continue;  // no baseline revenue in segment
      SegmentReplay sr;
      sr.n = st.rows;
      sr.lift = lift_from(st.policy_yield, st.base_yield);
      sr.daily_lifts = daily_lifts_from(panel, st, st.base_yield, st.rows,
                                        options.daily_baseline);
      s.segment_lifts.emplace(g.key, std::move(sr));
    }
  }
  return s;
}

}  // namespace

ReplaySummary replay_policy(const Panel& panel, const Policy& policy,
                            const QuantileSet& quantiles,
                            const SegmentMap* segments,
                            const ReplayOptions& options) {
  const auto totals = detail::replay_totals(panel, policy, quantiles);
  return summarize(panel, policy, totals, segments, quantiles, options);
}

std::vector<ReplaySummary> replay_catalog(const Panel& panel,
                                          const Catalog& catalog,
                                          const SegmentMap* segments,
                                          const ReplayOptions& options) {
  std::vector<ReplaySummary> out;
  out.reserve(catalog.policies.size());
  for (const Policy& p : catalog.policies)
    out.push_back(replay_policy(panel, p, catalog.quantiles, segments, options));
  return out;
}

}  // namespace floorcert
