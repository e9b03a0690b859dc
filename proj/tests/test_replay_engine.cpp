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

#include <omp.h>

#include <cmath>

#include "doctest.h"
#include "floorcert/error.hpp"
#include "floorcert/reference_replay.hpp"
#include "floorcert/replay_engine.hpp"
#include "floorcert/synth.hpp"
#include "test_util.hpp"

using namespace floorcert;
using testutil::add_increment_policy;
using testutil::baseline_policy;
using testutil::make_row;

namespace {

// The worked 3-row panel: baseline mean yield 3, "add 2" drops one row.
Panel three_row_panel() {
  return Panel::from_rows({
      make_row("d1", 2, 10, 4, true),
      make_row("d1", 5, 5, 5, true),
      make_row("d1", 1, 8, 0, false),
  });
}

}  // namespace

TEST_CASE("replay_row retains and reprices filled rows") {
  CHECK(replay_row(make_row("d", 2, 10, 4, true), to_micro(4)) == to_micro(4));
  CHECK(replay_row(make_row("d", 5, 5, 5, true), to_micro(7)) == 0);
  CHECK(replay_row(make_row("d", 1, 8, 0, false), to_micro(3)) == 0);
}

TEST_CASE("replay_row enforces the monotone-candidate contract") {
  CHECK_THROWS_AS(replay_row(make_row("d", 5, 10, 6, true), to_micro(4)), Error);
}

TEST_CASE("replay_policy reproduces the hand-computed 3-row example") {
  const Panel p = three_row_panel();
  const ReplaySummary s =
      replay_policy(p, add_increment_policy("A2", "2"), QuantileSet{});
  CHECK(s.mean_yield == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(s.lift == doctest::Approx(-5.0 / 9.0).epsilon(1e-12));
  CHECK(s.retained_share == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("baseline policy replays to zero lift and full retention") {
  const Panel p = three_row_panel();
  const ReplaySummary s = replay_policy(p, baseline_policy(), QuantileSet{});
  CHECK(s.lift == 0.0);
  CHECK(s.retained_share == 1.0);
}

TEST_CASE("replay is the identity away from the boundary") {
  // Every bid clears the candidate and every payment exceeds it.
  const Panel p = Panel::from_rows({
      make_row("d1", 1, 100, 90, true),
      make_row("d2", 2, 200, 150, true),
  });
  const ReplaySummary s =
      replay_policy(p, add_increment_policy("A1", "1"), QuantileSet{});
  CHECK(s.lift == 0.0);
  CHECK(s.retained_share == 1.0);
}

TEST_CASE("undefined lift when the baseline never fills") {
  const Panel p = Panel::from_rows({make_row("d1", 1, 8, 0, false)});
  CHECK_THROWS_AS(replay_policy(p, add_increment_policy("A2", "2"), QuantileSet{}),
                  Error);
}

TEST_CASE("daily lifts use day-local baselines by default") {
  const Panel p = Panel::from_rows({
      make_row("d1", 0, 10, 10, true),   // day 1 baseline 10
      make_row("d2", 0, 4, 4, true),     // day 2 baseline 4, candidate 5 drops it
  });
  const ReplaySummary s =
      replay_policy(p, add_increment_policy("A5", "5"), QuantileSet{});
  REQUIRE(s.daily_lifts.size() == 2);
  CHECK(s.daily_lifts.at("d1") == doctest::Approx(0.0));
  CHECK(s.daily_lifts.at("d2") == doctest::Approx(-1.0));

  ReplayOptions global;
  global.daily_baseline = ReplayOptions::DailyBaseline::kGlobal;
  const ReplaySummary g =
      replay_policy(p, add_increment_policy("A5", "5"), QuantileSet{}, nullptr, global);
  // day 2: mean contrast -4 per row over global mean yield 7.
  CHECK(g.daily_lifts.at("d2") == doctest::Approx(-4.0 / 7.0));
}

TEST_CASE("replay_catalog returns baseline first with zero lift") {
  synth::GeneratorConfig cfg;
  cfg.seed = 12;
  cfg.n_rows = 400;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const Catalog catalog = build_catalog(paper19_spec(), q);
  const auto summaries = replay_catalog(panel, catalog);
  REQUIRE(summaries.size() == 19);
  CHECK(summaries[0].policy_id == "P0");
  CHECK(summaries[0].lift == 0.0);
  CHECK(summaries[0].retained_share == 1.0);
}

TEST_CASE("full catalog on a single zero-floor row evaluates by hand") {
  // floor 0, bid 1, payment 1, filled. Baseline yield 1. Quantile anchors
  // are supplied frozen (2, 3, 5). Per rule: percentage raises keep a zero
  // floor at zero (lift 0); absolute increments and all-floor quantile
  // raises push the floor above the bid (lift -1, nothing retained);
  // gap-gated rules never trigger on a gap of 1.
  const Panel p = Panel::from_rows({make_row("d1", 0, 1, 1, true)});
  QuantileSet q;
  q.q25 = to_micro(2);
  q.q50 = to_micro(3);
  q.q75 = to_micro(5);
  q.frozen = true;
  const Catalog catalog = build_catalog(paper19_spec(), q);
  const auto summaries = replay_catalog(p, catalog);
  const std::map<std::string, double> expected = {
      {"P0", 0},  {"P1", 0},  {"P2", 0},  {"P3", 0},   {"P4", 0},
      {"P5", 0},  {"P6", -1}, {"P7", -1}, {"P8", -1},  {"P9", 0},
      {"P10", 0}, {"P11", 0}, {"P12", -1}, {"P13", -1}, {"P14", 0},
      {"P15", 0}, {"P16", 0}, {"P17", 0},  {"P18", 0}};
  for (const auto& s : summaries) {
    CHECK(s.lift == expected.at(s.policy_id));
    CHECK(s.retained_share == (s.lift == 0 ? 1.0 : 0.0));
  }
}

TEST_CASE("monotone retention: dominating floors retain fewer rows") {
  synth::GeneratorConfig cfg;
  cfg.seed = 77;
  cfg.n_rows = 2000;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  // add-k floors dominate add-(k-1) floors row-wise.
  const char* increments[] = {"0", "1", "2", "5", "10", "50"};
  double previous_share = 1.0;
  for (const char* inc : increments) {
    const ReplaySummary s =
        replay_policy(panel, add_increment_policy("A", inc), q);
    CHECK(s.retained_share <= previous_share + 1e-15);
    previous_share = s.retained_share;
  }
}

TEST_CASE("retained rows never pay less than the logged payment") {
  synth::GeneratorConfig cfg;
  cfg.seed = 3;
  cfg.n_rows = 500;
  const Panel panel = synth::generate_log(cfg);
  const Policy policy = add_increment_policy("A7", "7");
  for (std::int64_t i = 0; i < panel.size(); ++i) {
    const AuctionRow row = panel.row(i);
    const MicroMoney y = replay_row(row, candidate_floor(policy, row, {}));
    if (y > 0) CHECK(y >= to_micro(row.payment));
  }
}

TEST_CASE("parallel kernel matches the serial twin exactly") {
  synth::GeneratorConfig cfg;
  cfg.seed = 21;
  cfg.n_rows = 50'000;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const Catalog catalog = build_catalog(paper19_spec(), q);
  for (const Policy& policy : catalog.policies) {
    const auto a = detail::replay_totals(panel, policy, q);
    const auto b = detail::replay_totals_serial(panel, policy, q);
    REQUIRE(a.policy_yield == b.policy_yield);
    REQUIRE(a.base_yield == b.base_yield);
    REQUIRE(a.retained == b.retained);
    REQUIRE(a.base_fills == b.base_fills);
    for (std::size_t d = 0; d < a.by_day.size(); ++d) {
      REQUIRE(a.by_day[d].policy_yield == b.by_day[d].policy_yield);
      REQUIRE(a.by_day[d].base_yield == b.by_day[d].base_yield);
    }
  }
}

TEST_CASE("replay output is invariant to the worker count") {
  synth::GeneratorConfig cfg;
  cfg.seed = 8;
  cfg.n_rows = 30'000;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const Catalog catalog = build_catalog(paper19_spec(), q);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto single = replay_catalog(panel, catalog);
  omp_set_num_threads(std::max(4, saved));
  const auto multi = replay_catalog(panel, catalog);
  omp_set_num_threads(saved);

  REQUIRE(single.size() == multi.size());
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(single[i].lift == multi[i].lift);
    CHECK(single[i].mean_yield == multi[i].mean_yield);
    CHECK(single[i].retained_share == multi[i].retained_share);
    CHECK(single[i].daily_lifts == multi[i].daily_lifts);
  }
}

TEST_CASE("engine lift agrees with the brute-force reference") {
  synth::GeneratorConfig cfg;
  cfg.seed = 100;
  cfg.n_rows = 100'000;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const Catalog catalog = build_catalog(paper19_spec(), q);
  const auto summaries = replay_catalog(panel, catalog);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const ReferenceSummary ref =
        reference_replay_policy(panel, catalog.policies[i], q);
    CHECK(std::fabs(summaries[i].lift - ref.lift) <=
          1e-12 * std::max(1.0, std::fabs(ref.lift)));
    CHECK(summaries[i].retained_share == ref.retained_share);
  }
}

TEST_CASE("additivity: n * mean_yield equals the compensated row sum") {
  synth::GeneratorConfig cfg;
  cfg.seed = 55;
  cfg.n_rows = 20'000;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const Policy policy = add_increment_policy("A3", "3");
  const ReplaySummary s = replay_policy(panel, policy, q);

  std::vector<double> yields;
  yields.reserve(panel.size());
  for (std::int64_t i = 0; i < panel.size(); ++i)
    yields.push_back(
        micro_to_double(replay_row(panel.row(i), candidate_floor(policy, panel.row(i), q))));
  const double total = testutil::compensated_sum(yields);
  CHECK(std::fabs(s.mean_yield * static_cast<double>(panel.size()) - total) <=
        1e-12 * std::max(1.0, std::fabs(total)));
}

TEST_CASE("segment lifts aggregate consistently with the panel lift") {
  synth::GeneratorConfig cfg;
  cfg.seed = 14;
  cfg.n_rows = 5000;
  cfg.advertisers = 5;
  const Panel panel = synth::generate_log(cfg);
  const QuantileSet q = fit_quantiles(panel);
  const SegmentMap segments =
      partition_segments(panel, {SegmentDimension::kAdvertiser}, 1);
  const Policy policy = add_increment_policy("A2", "2");
  const ReplaySummary s = replay_policy(panel, policy, q, &segments);

  // n-weighted mean of per-segment mean yields equals the panel mean yield.
  REQUIRE_FALSE(s.segment_lifts.empty());
  double weighted = 0;
  std::int64_t total_rows = 0;
  for (const SegmentGroup& g : segments.covered) {
    const auto totals = detail::replay_totals(panel, policy, q, g.rows);
    weighted += static_cast<double>(totals.policy_yield) / kMicroScale;
    total_rows += totals.rows;
  }
  REQUIRE(total_rows == panel.size());
  CHECK(std::fabs(weighted / static_cast<double>(panel.size()) - s.mean_yield) <=
        1e-10 * std::max(1.0, std::fabs(s.mean_yield)));
}
