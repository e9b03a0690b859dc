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

#ifndef FLOORCERT_SEGMENT_SAFETY_HPP_
#define FLOORCERT_SEGMENT_SAFETY_HPP_

#include <map>
#include <string>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"
#include "floorcert/replay_engine.hpp"

namespace floorcert {

struct SegmentBound {
  SegmentKey key;
  std::int64_t n_rows = 0;
  int active_days = 0;      // days with rows and positive baseline yield
  double lift_hat = 0;      // segment-local replay lift
  double se = 0;            // sd of segment daily lifts / sqrt(days)
  double lcb = 0;           // Bonferroni-adjusted over the K covered segments
  double lcb_unadjusted = 0;  // plain two-sided 1-alpha bar, reporting only
};

struct SegmentBoundsResult {
  std::vector<SegmentBound> covered;  // K = covered.size()
  std::vector<std::pair<SegmentKey, std::string>> uncovered;  // key, reason
  double alpha = 0;
  double z_adjusted = 0;
  double z_unadjusted = 0;
};

// Segment-local lifts with simultaneous lower bounds: lcb_s uses
// z_{1 - alpha/(2K)}, the union bound over the covered grid. Segments with
// fewer than two active days move to uncovered with a reason. Certification
// gates on the adjusted bounds; the unadjusted bars are emitted alongside.
SegmentBoundsResult segment_bounds(const Panel& panel, const Policy& policy,
                                   const QuantileSet& quantiles,
                                   const SegmentMap& segments, double alpha,
                                   const ReplayOptions& options = {});

struct SegmentCertificate {
  std::string policy_id;
  double alpha = 0;
  int K = 0;
  std::vector<SegmentBound> segments;
  double eta = 0;            // min lcb over covered segments
  double L_s = 0;
  double cover_radius = 0;
  double uniform_margin = 0;  // eta - L_s * cover_radius
  bool certified = false;     // K >= 1 and eta strictly above L_s * cover_radius
  bool boundary = false;      // eta exactly equals the Lipschitz-cover bar
  int nonnegative_count = 0;  // covered segments with lcb >= 0 (reported, not gating)
  std::string reason;         // set when not certified
  std::vector<SegmentKey> uncovered;
};

// Uniform non-harm certificate: certified iff at least one covered segment
// exists and min lcb > L_s * cover_radius (strict). An exact tie is
// reported as boundary, not certified.
SegmentCertificate nonharm_certificate(const SegmentBoundsResult& bounds,
                                       const std::string& policy_id, double L_s,
                                       double cover_radius);

// Low-level rule on a plain lcb vector, for property checks and planning.
bool nonharm_certified(const std::vector<double>& lcbs, double L_s,
                       double cover_radius);

// Certified-segment count per cover radius; nonincreasing in the radius.
std::map<double, int> coverage_sensitivity(const std::vector<double>& lcbs,
                                           double L_s,
                                           const std::vector<double>& radius_grid);

// Per-segment sample size sufficient for global non-harm:
// A^2 ln(K/alpha) / (eta + L_s rho)^2, constant factor 1 by convention.
// Returns +inf when the margin denominator is zero.
double required_segment_sample(double A, int K, double alpha, double eta,
                               double L_s, double cover_radius);

}  // namespace floorcert

#endif  // FLOORCERT_SEGMENT_SAFETY_HPP_
