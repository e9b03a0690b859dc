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

#include "floorcert/uncertainty_decision.hpp"

#include <algorithm>
#include <cmath>

#include "floorcert/error.hpp"

namespace floorcert {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::kDomain, "normal_quantile requires p in (0,1)");

  // ALGORITHM AS 241, APPL. STATIST. (1988) VOL. 37, NO. 3 (PPND16).
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace {

double sample_sd(const std::map<std::string, double>& values) {
  const double first = values.begin()->second;
  bool constant = true;
  double mean = 0;
  for (const auto& [day, v] : values) {
    constant = constant && v == first;
    mean += v;
  }
  if (constant) return 0.0;
  const double n = static_cast<double>(values.size());
  mean /= n;
  double ss = 0;
  for (const auto& [day, v] : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

std::vector<PolicyBounds> simultaneous_bounds(
    const std::vector<ReplaySummary>& summaries, double alpha, double lambda) {
  if (summaries.empty())
    throw Error(ErrorKind::kConfig, "no replay summaries to bound");
  if (!(alpha > 0 && alpha < 1))
    throw Error(ErrorKind::kConfig, "alpha must be in (0,1)");
  if (lambda < 0)
    throw Error(ErrorKind::kConfig, "support penalty scale must be nonnegative");

  const double z =
      normal_quantile(1.0 - alpha / (2.0 * static_cast<double>(summaries.size())));

  std::vector<PolicyBounds> out;
  out.reserve(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const ReplaySummary& s = summaries[i];
    if (s.daily_lifts.size() < 2)
      throw Error(ErrorKind::kDomain,
                  "policy '" + s.policy_id +
                      "' has fewer than two daily replicates; standard error undefined");
    PolicyBounds b;
    b.policy_id = s.policy_id;
    b.baseline = i == 0;
    b.lift_hat = s.lift;
    b.se_daily = sample_sd(s.daily_lifts) /
                 std::sqrt(static_cast<double>(s.daily_lifts.size()));
    b.alpha = alpha;
    b.z_crit = z;
    b.lcb = s.lift - z * b.se_daily;
    b.ucb = s.lift + z * b.se_daily;
    b.lcb_support = b.lcb - lambda * (1.0 - s.retained_share);
    out.push_back(std::move(b));
  }
  return out;
}

DecisionObject decide(const std::vector<PolicyBounds>& bounds, double tolerance,
                      const std::map<std::string, bool>& segment_pass) {
  if (tolerance < 0)
    throw Error(ErrorKind::kConfig, "tolerance must be nonnegative");

  DecisionObject d;
  d.tolerance = tolerance;
  d.bounds = bounds;

  const auto passes = [&](const PolicyBounds& b) {
    auto it = segment_pass.find(b.policy_id);
    return it == segment_pass.end() || it->second;
  };

  int leader = -1;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i].baseline) continue;
    if (leader < 0 || bounds[i].lcb_support > bounds[leader].lcb_support)
      leader = static_cast<int>(i);  // strict >: ties keep the lowest index
  }
  if (leader < 0)
    throw Error(ErrorKind::kConfig, "catalog has no non-baseline policy to rank");

  const PolicyBounds& lead = bounds[leader];
  d.alpha = lead.alpha;
  d.leader_id = lead.policy_id;

  const bool leader_certified = lead.lcb_support > 0 && passes(lead);
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const PolicyBounds& b = bounds[i];
    GateRecord gate;
    gate.segment_pass = passes(b);
    gate.positive_lcb_support = b.lcb_support > 0;
    if (b.baseline) {
      gate.label = "baseline";
    } else if (static_cast<int>(i) != leader &&
               b.ucb < lead.lcb_support - tolerance) {
      gate.label = "dominated";
      d.dominated.push_back(b.policy_id);
    } else {
      d.shortlist.push_back(b.policy_id);
      if (static_cast<int>(i) == leader && leader_certified) {
        gate.label = "certified";
        d.certified.push_back(b.policy_id);
      } else {
        gate.label = "unresolved";
        d.unresolved.push_back(b.policy_id);
      }
    }
    d.gate_report.emplace(b.policy_id, std::move(gate));
  }
  return d;
}

std::map<double, std::size_t> tolerance_sweep(
    const std::vector<PolicyBounds>& bounds, const std::vector<double>& tolerances,
    const std::map<std::string, bool>& segment_pass) {
  if (!std::is_sorted(tolerances.begin(), tolerances.end()))
    throw Error(ErrorKind::kConfig, "tolerance grid must be ascending");
  std::map<double, std::size_t> out;
  for (double rho : tolerances)
    out[rho] = decide(bounds, rho, segment_pass).shortlist.size();
  return out;
}

namespace {

std::string argmax_policy(const std::vector<PolicyBounds>& bounds,
                          double PolicyBounds::*field) {
  int best = -1;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i].baseline) continue;
    if (best < 0 || bounds[i].*field > bounds[best].*field)
      best = static_cast<int>(i);
  }
  if (best < 0)
    throw Error(ErrorKind::kConfig, "catalog has no non-baseline policy to rank");
  return bounds[best].policy_id;
}

}  // namespace

std::string point_estimate_winner(const std::vector<PolicyBounds>& bounds) {
  return argmax_policy(bounds, &PolicyBounds::lift_hat);
}

std::string lcb_winner(const std::vector<PolicyBounds>& bounds) {
  return argmax_policy(bounds, &PolicyBounds::lcb);
}

}  // namespace floorcert
