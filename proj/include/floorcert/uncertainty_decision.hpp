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

#ifndef FLOORCERT_UNCERTAINTY_DECISION_HPP_
#define FLOORCERT_UNCERTAINTY_DECISION_HPP_

#include <map>
#include <string>
#include <vector>

#include "floorcert/replay_engine.hpp"

namespace floorcert {

// Inverse standard normal CDF (Wichura's AS 241, double precision branch).
// Throws Error{kDomain} outside (0, 1).
double normal_quantile(double p);

struct PolicyBounds {
  std::string policy_id;
  bool baseline = false;
  double lift_hat = 0;
  double se_daily = 0;     // sd of daily lifts / sqrt(days)
  double lcb = 0;          // lift_hat - z_crit * se_daily
  double ucb = 0;          // lift_hat + z_crit * se_daily
  double lcb_support = 0;  // lcb - lambda * (1 - retained_share)
  double alpha = 0;
  double z_crit = 0;
};

// Bonferroni-simultaneous normal bounds over the finite catalog from daily
// replay-lift variation, plus the retained-share support penalty. The
// critical value is z_{1 - alpha / (2|P|)} with |P| = summaries.size().
// Requires at least two daily lift replicates per policy.
std::vector<PolicyBounds> simultaneous_bounds(
    const std::vector<ReplaySummary>& summaries, double alpha, double lambda);

struct GateRecord {
  bool segment_pass = true;
  bool positive_lcb_support = false;
  std::string label;  // certified | dominated | unresolved | baseline
};

struct DecisionObject {
  double alpha = 0;
  double lambda = 0;
  double tolerance = 0;
  std::string leader_id;
  std::vector<PolicyBounds> bounds;
  std::vector<std::string> shortlist;
  std::vector<std::string> certified;
  std::vector<std::string> dominated;
  std::vector<std::string> unresolved;
  std::map<std::string, GateRecord> gate_report;
};

// The conservative decision rule. Leadership by support-adjusted lower
// bound (ties to the lowest catalog index); a policy is dominated when its
// upper bound falls below the leader's support-adjusted lower bound minus
// the tolerance; the leader is certified only with a positive
// support-adjusted lower bound and a passing segment gate. The baseline
// anchors lifts and is never certified, dominated, or leader. Policies
// absent from segment_pass are treated as passing.
DecisionObject decide(const std::vector<PolicyBounds>& bounds, double tolerance,
                      const std::map<std::string, bool>& segment_pass = {});

// Shortlist size per tolerance; nondecreasing in the tolerance.
std::map<double, std::size_t> tolerance_sweep(
    const std::vector<PolicyBounds>& bounds, const std::vector<double>& tolerances,
    const std::map<std::string, bool>& segment_pass = {});

// The naive comparator: argmax of the point estimate among non-baseline
// policies. Kept for decision-rule comparison reports.
std::string point_estimate_winner(const std::vector<PolicyBounds>& bounds);

// Winner under the plain lower-bound rule (no support adjustment).
std::string lcb_winner(const std::vector<PolicyBounds>& bounds);

}  // namespace floorcert

#endif  // FLOORCERT_UNCERTAINTY_DECISION_HPP_
