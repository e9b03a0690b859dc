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

#include "floorcert/segment_safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "floorcert/error.hpp"
#include "floorcert/uncertainty_decision.hpp"

namespace floorcert {

namespace {

struct SegmentStats {
  std::int64_t n_rows = 0;
  double lift = 0;
  std::vector<double> daily_lifts;
};

}  // namespace

SegmentBoundsResult segment_bounds(const Panel& panel, const Policy& policy,
                                   const QuantileSet& quantiles,
                                   const SegmentMap& segments, double alpha,
                                   const ReplayOptions& options) {
  if (!(alpha > 0 && alpha < 1))
    throw Error(ErrorKind::kConfig, "alpha must be in (0,1)");

  SegmentBoundsResult result;
  result.alpha = alpha;

  std::vector<std::pair<SegmentKey, SegmentStats>> eligible;
  for (const SegmentGroup& g : segments.covered) {
    const auto t = detail::replay_totals(panel, policy, quantiles, g.rows);
    SegmentStats st;
    st.n_rows = t.rows;
    int active = 0;
    for (std::size_t d = 0; d < t.by_day.size(); ++d) {
      const auto& day = t.by_day[d];
      if (day.rows == 0 || day.base_yield <= 0) continue;
      ++active;
      if (options.daily_baseline == ReplayOptions::DailyBaseline::kDayLocal) {
        st.daily_lifts.push_back(static_cast<double>(day.policy_yield - day.base_yield) /
                                 static_cast<double>(day.base_yield));
      } else {
        st.daily_lifts.push_back(
            (static_cast<double>(day.policy_yield - day.base_yield) /
             static_cast<double>(day.rows)) /
            (static_cast<double>(t.base_yield) / static_cast<double>(t.rows)));
      }
    }
    if (active < 2) {
      result.uncovered.emplace_back(g.key, "fewer than two active days");
      continue;
    }
    if (t.base_yield <= 0) {
      result.uncovered.emplace_back(g.key, "no baseline yield");
      continue;
    }
    st.lift = static_cast<double>(t.policy_yield - t.base_yield) /
              static_cast<double>(t.base_yield);
    eligible.emplace_back(g.key, std::move(st));
  }
  for (const SegmentGroup& g : segments.uncovered)
    result.uncovered.emplace_back(g.key, "below minimum row count");

  const int K = static_cast<int>(eligible.size());
  if (K == 0) return result;

  result.z_adjusted = normal_quantile(1.0 - alpha / (2.0 * K));
  result.z_unadjusted = normal_quantile(1.0 - alpha / 2.0);

  for (auto& [key, st] : eligible) {
    SegmentBound b;
    b.key = key;
    b.n_rows = st.n_rows;
    b.active_days = static_cast<int>(st.daily_lifts.size());
    b.lift_hat = st.lift;
    bool constant = true;
    double mean = 0;
    for (double v : st.daily_lifts) {
      constant = constant && v == st.daily_lifts.front();
      mean += v;
    }
    mean /= static_cast<double>(st.daily_lifts.size());
    double ss = 0;
    for (double v : st.daily_lifts) ss += (v - mean) * (v - mean);
    b.se = constant ? 0.0
                    : std::sqrt(ss / (static_cast<double>(st.daily_lifts.size()) - 1)) /
                          std::sqrt(static_cast<double>(st.daily_lifts.size()));
    b.lcb = b.lift_hat - result.z_adjusted * b.se;
    b.lcb_unadjusted = b.lift_hat - result.z_unadjusted * b.se;
    result.covered.push_back(std::move(b));
  }
  return result;
}

SegmentCertificate nonharm_certificate(const SegmentBoundsResult& bounds,
                                       const std::string& policy_id, double L_s,
                                       double cover_radius) {
  if (L_s < 0 || cover_radius < 0)
    throw Error(ErrorKind::kConfig,
                "Lipschitz constant and cover radius must be nonnegative");

  SegmentCertificate cert;
  cert.policy_id = policy_id;
  cert.alpha = bounds.alpha;
  cert.K = static_cast<int>(bounds.covered.size());
  cert.segments = bounds.covered;
  cert.L_s = L_s;
  cert.cover_radius = cover_radius;
  for (const auto& [key, reason] : bounds.uncovered)
    cert.uncovered.push_back(key);

  if (cert.K == 0) {
    cert.eta = std::numeric_limits<double>::quiet_NaN();
    cert.uniform_margin = std::numeric_limits<double>::quiet_NaN();
    cert.certified = false;
    cert.reason = "insufficient coverage";
    return cert;
  }

  cert.eta = std::numeric_limits<double>::infinity();
  for (const SegmentBound& b : bounds.covered) {
    cert.eta = std::min(cert.eta, b.lcb);
    if (b.lcb >= 0) ++cert.nonnegative_count;
  }
  const double bar = L_s * cover_radius;
  cert.uniform_margin = cert.eta - bar;
  cert.certified = cert.eta > bar;
  cert.boundary = cert.eta == bar;
  if (!cert.certified)
    cert.reason = cert.boundary ? "boundary: minimum lower bound equals the cover bar"
                                : "minimum lower bound below the cover bar";
  return cert;
}

bool nonharm_certified(const std::vector<double>& lcbs, double L_s,
                       double cover_radius) {
  if (lcbs.empty()) return false;
  const double eta = *std::min_element(lcbs.begin(), lcbs.end());
  return eta > L_s * cover_radius;
}

std::map<double, int> coverage_sensitivity(const std::vector<double>& lcbs,
                                           double L_s,
                                           const std::vector<double>& radius_grid) {
  if (!std::is_sorted(radius_grid.begin(), radius_grid.end()) ||
      (!radius_grid.empty() && radius_grid.front() < 0))
    throw Error(ErrorKind::kConfig, "radius grid must be nonnegative ascending");
  std::map<double, int> out;
  for (double radius : radius_grid) {
    int count = 0;
    for (double lcb : lcbs)
      if (lcb > L_s * radius) ++count;
    out[radius] = count;
  }
  return out;
}

double required_segment_sample(double A, int K, double alpha, double eta,
                               double L_s, double cover_radius) {
  if (A <= 0)
    throw Error(ErrorKind::kConfig, "segment reward bound A must be positive");
  if (K < 1)
    throw Error(ErrorKind::kConfig, "segment count K must be at least 1");
  if (!(alpha > 0 && alpha < 1))
    throw Error(ErrorKind::kConfig, "alpha must be in (0,1)");
  if (L_s < 0 || cover_radius < 0 || eta < 0)
    throw Error(ErrorKind::kConfig,
                "eta, Lipschitz constant and cover radius must be nonnegative");
  const double margin = eta + L_s * cover_radius;
  if (margin == 0) return std::numeric_limits<double>::infinity();
  return A * A * std::log(static_cast<double>(K) / alpha) / (margin * margin);
}

}  // namespace floorcert
