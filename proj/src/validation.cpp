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

#include "floorcert/validation.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "floorcert/error.hpp"
#include "floorcert/rng.hpp"
#include "floorcert/uncertainty_decision.hpp"

namespace floorcert {

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kContract, "spearman inputs must have equal length");
  if (a.size() < 2)
    throw Error(ErrorKind::kContract, "spearman needs at least two values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double mean_a = 0, mean_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - mean_a) * (rb[i] - mean_b);
    va += (ra[i] - mean_a) * (ra[i] - mean_a);
    vb += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (va == 0 || vb == 0)
    throw Error(ErrorKind::kDomain, "spearman is undefined for constant rankings");
  return cov / std::sqrt(va * vb);
}

namespace {

std::vector<std::size_t> topk_indices(std::span<const double> values, int k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

}  // namespace

int topk_overlap(std::span<const double> lifts_a, std::span<const double> lifts_b,
                 int k) {
  if (lifts_a.size() != lifts_b.size())
    throw Error(ErrorKind::kContract, "top-k inputs must have equal length");
  if (k < 0 || static_cast<std::size_t>(k) > lifts_a.size())
    throw Error(ErrorKind::kConfig, "k exceeds the number of policies");
  auto ta = topk_indices(lifts_a, k);
  auto tb = topk_indices(lifts_b, k);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::back_inserter(common));
  return static_cast<int>(common.size());
}

TransferReport frozen_transfer(const Catalog& catalog, const Panel& holdout,
                               const std::vector<ReplaySummary>& dev_summaries,
                               int k, const ReplayOptions& options) {
  if (catalog.needs_quantiles() && !catalog.quantiles.frozen)
    throw Error(ErrorKind::kContract,
                "transfer requires frozen quantile anchors; refit is not allowed");

  const auto holdout_summaries = replay_catalog(holdout, catalog, nullptr, options);

  TransferReport report;
  for (std::size_t i = 1; i < catalog.policies.size(); ++i) {
    const std::string& id = catalog.policies[i].id;
    const auto dev_it =
        std::find_if(dev_summaries.begin(), dev_summaries.end(),
                     [&](const ReplaySummary& s) { return s.policy_id == id; });
    if (dev_it == dev_summaries.end())
      throw Error(ErrorKind::kContract,
                  "development summaries are missing policy '" + id + "'");
    report.policy_ids.push_back(id);
    report.dev_lifts.push_back(dev_it->lift);
    report.holdout_lifts.push_back(holdout_summaries[i].lift);
    report.holdout_retained.push_back(holdout_summaries[i].retained_share);
  }

  // Rank correlation needs at least two candidates; a single-policy
  // catalog still gets the transfer table and leader.
  report.spearman = report.policy_ids.size() >= 2
                        ? spearman(report.dev_lifts, report.holdout_lifts)
                        : std::numeric_limits<double>::quiet_NaN();
  report.k = std::min<int>(k, static_cast<int>(report.policy_ids.size()));
  report.topk_overlap =
      topk_overlap(report.dev_lifts, report.holdout_lifts, report.k);

  std::size_t best = 0;
  for (std::size_t i = 1; i < report.holdout_lifts.size(); ++i)
    if (report.holdout_lifts[i] > report.holdout_lifts[best]) best = i;
  report.holdout_leader = report.policy_ids[best];
  return report;
}

namespace {

struct PolicyDayTotals {
  std::vector<__int128> policy_yield;  // by day
  std::vector<__int128> base_yield;
};

double sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

BootstrapResult day_bootstrap(const Panel& panel, const Catalog& catalog,
                              int draws, std::uint64_t seed,
                              BootstrapRanking ranking, BootstrapUnit unit,
                              double alpha) {
  if (panel.days().size() < 2)
    throw Error(ErrorKind::kDomain, "bootstrap needs at least two panel days");
  if (draws < 1)
    throw Error(ErrorKind::kConfig, "bootstrap draws must be at least 1");
  if (unit == BootstrapUnit::kRow && ranking == BootstrapRanking::kLcb)
    throw Error(ErrorKind::kConfig,
                "row bootstrap supports only the full-replay ranking");

  const std::size_t n_days = panel.days().size();
  const std::size_t n_policies = catalog.policies.size();  // baseline first
  const double z =
      ranking == BootstrapRanking::kLcb
          ? normal_quantile(1.0 - alpha / (2.0 * static_cast<double>(n_policies)))
          : 0.0;

  // Per-policy exact day totals; also the per-row yields for the row unit.
  std::vector<PolicyDayTotals> day_totals(n_policies);
  std::vector<std::vector<MicroMoney>> row_yields;  // [policy][row]
  std::vector<MicroMoney> row_base;
  for (std::size_t p = 0; p < n_policies; ++p) {
    const auto t =
        detail::replay_totals(panel, catalog.policies[p], catalog.quantiles);
    day_totals[p].policy_yield.resize(n_days);
    day_totals[p].base_yield.resize(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
      day_totals[p].policy_yield[d] = t.by_day[d].policy_yield;
      day_totals[p].base_yield[d] = t.by_day[d].base_yield;
    }
  }
  if (unit == BootstrapUnit::kRow) {
    const std::int64_t n = panel.size();
    row_base.resize(n);
    row_yields.assign(n_policies, std::vector<MicroMoney>(n));
    const auto& floors = panel.floors();
    const auto& bids = panel.bids();
    const auto& payments = panel.payments();
    const auto& filled = panel.filled();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < n_policies; ++p) {
        const MicroMoney cand = candidate_floor(catalog.policies[p], floors[i],
                                                bids[i], catalog.quantiles);
        MicroMoney y = 0;
        if (filled[i] && to_micro(bids[i]) >= cand)
          y = std::max(to_micro(payments[i]), cand);
        row_yields[p][i] = y;
      }
      row_base[i] = row_yields[0][i];
    }
  }

  std::vector<std::int64_t> wins(n_policies, 0);
  std::int64_t counted = 0;

#pragma omp parallel
  {
    std::vector<std::int64_t> local_wins(n_policies, 0);
    std::int64_t local_counted = 0;
#pragma omp for schedule(static)
    for (int t = 0; t < draws; ++t) {
      SplitMix64 rng(seed, 0xb007 + static_cast<std::uint64_t>(t));
      int best = -1;
      double best_stat = 0;

      if (unit == BootstrapUnit::kDay) {
        std::vector<std::int64_t> mult(n_days, 0);
        for (std::size_t d = 0; d < n_days; ++d) ++mult[rng.next_below(n_days)];
        for (std::size_t p = 1; p < n_policies; ++p) {
          __int128 s_pi = 0, s_0 = 0;
          for (std::size_t d = 0; d < n_days; ++d) {
            s_pi += static_cast<__int128>(mult[d]) * day_totals[p].policy_yield[d];
            s_0 += static_cast<__int128>(mult[d]) * day_totals[p].base_yield[d];
          }
          if (s_0 <= 0) continue;
          const double lift =
              static_cast<double>(s_pi - s_0) / static_cast<double>(s_0);
          double stat = lift;
          if (ranking == BootstrapRanking::kLcb) {
            std::vector<double> daily;
            for (std::size_t d = 0; d < n_days; ++d) {
              if (day_totals[p].base_yield[d] <= 0) continue;
              const double day_lift =
                  static_cast<double>(day_totals[p].policy_yield[d] -
                                      day_totals[p].base_yield[d]) /
                  static_cast<double>(day_totals[p].base_yield[d]);
              for (std::int64_t r = 0; r < mult[d]; ++r) daily.push_back(day_lift);
            }
            if (daily.size() < 2) continue;
            stat = lift - z * sd(daily) / std::sqrt(static_cast<double>(daily.size()));
          }
          if (best < 0 || stat > best_stat) {
            best = static_cast<int>(p);
            best_stat = stat;
          }
        }
      } else {
        const std::int64_t n = panel.size();
        std::vector<__int128> sums(n_policies, 0);
        __int128 s_0 = 0;
        for (std::int64_t r = 0; r < n; ++r) {
          const std::int64_t i =
              static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
          for (std::size_t p = 1; p < n_policies; ++p) sums[p] += row_yields[p][i];
          s_0 += row_base[i];
        }
        if (s_0 > 0) {
          for (std::size_t p = 1; p < n_policies; ++p) {
            const double lift =
                static_cast<double>(sums[p] - s_0) / static_cast<double>(s_0);
            if (best < 0 || lift > best_stat) {
              best = static_cast<int>(p);
              best_stat = lift;
            }
          }
        }
      }

      if (best >= 0) {
        ++local_wins[best];
        ++local_counted;
      }
    }
#pragma omp critical
    {
      for (std::size_t p = 0; p < n_policies; ++p) wins[p] += local_wins[p];
      counted += local_counted;
    }
  }

  if (counted == 0)
    throw Error(ErrorKind::kDomain, "every bootstrap draw was degenerate");

  BootstrapResult result;
  result.draws = draws;
  result.ranking = ranking;
  result.unit = unit;
  for (std::size_t p = 1; p < n_policies; ++p)
    result.winner_frequency[catalog.policies[p].id] =
        static_cast<double>(wins[p]) / static_cast<double>(counted);
  return result;
}

ResponseGapAssessment response_gap_threshold(double leader_lift,
                                             double runner_up_lift) {
  if (leader_lift < runner_up_lift)
    throw Error(ErrorKind::kContract,
                "leader lift must be at least the runner-up lift");
  ResponseGapAssessment a;
  a.margin = leader_lift - runner_up_lift;
  a.threshold = a.margin / 2.0;
  a.interpretation =
      "ranking preserved while the pairwise response gap stays below the "
      "threshold (symmetric split of the replay margin; planning diagnostic)";
  return a;
}

}  // namespace floorcert
