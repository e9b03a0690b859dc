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

#ifndef FLOORCERT_VALIDATION_HPP_
#define FLOORCERT_VALIDATION_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"
#include "floorcert/replay_engine.hpp"

namespace floorcert {

struct TransferReport {
  std::vector<std::string> policy_ids;  // non-baseline, catalog order
  std::vector<double> dev_lifts;
  std::vector<double> holdout_lifts;
  std::vector<double> holdout_retained;
  double spearman = 0;
  int k = 0;
  int topk_overlap = 0;
  std::string holdout_leader;
};

// Replays the frozen catalog (policies and quantile anchors untouched) on a
// held-out panel and compares the lift rankings. Throws Error{kContract}
// when the catalog's quantiles are not frozen, which would amount to
// silent refitting.
TransferReport frozen_transfer(const Catalog& catalog, const Panel& holdout,
                               const std::vector<ReplaySummary>& dev_summaries,
                               int k = 5, const ReplayOptions& options = {});

// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> a, std::span<const double> b);

// Overlap of the two top-k sets when ranking descending; ties broken by
// input position.
int topk_overlap(std::span<const double> lifts_a, std::span<const double> lifts_b,
                 int k);

enum class BootstrapRanking { kFullReplay, kLcb };
enum class BootstrapUnit { kDay, kRow };

struct BootstrapResult {
  std::map<std::string, double> winner_frequency;  // sums to 1
  int draws = 0;
  BootstrapRanking ranking = BootstrapRanking::kFullReplay;
  BootstrapUnit unit = BootstrapUnit::kDay;
};

// Winner frequencies under resampling. The day unit resamples panel days
// with replacement; the row unit resamples rows and supports only the
// full-replay ranking. Draw t uses the RNG stream (seed, t), so results
// are identical for any worker count.
BootstrapResult day_bootstrap(const Panel& panel, const Catalog& catalog,
                              int draws, std::uint64_t seed,
                              BootstrapRanking ranking = BootstrapRanking::kFullReplay,
                              BootstrapUnit unit = BootstrapUnit::kDay,
                              double alpha = 0.05);

struct ResponseGapAssessment {
  double margin = 0;     // leader lift minus runner-up lift
  double threshold = 0;  // margin / 2
  std::string interpretation;
};

// Planning diagnostic: the leader's ranking survives a pairwise response
// gap up to half the replay margin under the symmetric split.
ResponseGapAssessment response_gap_threshold(double leader_lift,
                                             double runner_up_lift);

}  // namespace floorcert

#endif  // FLOORCERT_VALIDATION_HPP_
