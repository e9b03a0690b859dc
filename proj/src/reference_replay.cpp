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

#include "floorcert/reference_replay.hpp"

#include "floorcert/error.hpp"

namespace floorcert {

MicroMoney reference_candidate_floor(const Policy& policy, Money floor,
                                     Money bid, const QuantileSet& quantiles) {
  const MicroMoney f0 = floor * kMicroScale;
  const MicroMoney gap = (bid - floor) * kMicroScale;
  MicroMoney anchor = 0;
  if (policy.uses_quantiles()) {
    if (policy.quantile == 25) anchor = quantiles.q25;
    if (policy.quantile == 50) anchor = quantiles.q50;
    if (policy.quantile == 75) anchor = quantiles.q75;
  }
  const auto capped = [](__int128 c) {
    return c > static_cast<__int128>(kCandidateCap)
               ? kCandidateCap
               : static_cast<MicroMoney>(c);
  };
  switch (policy.family) {
    case PolicyFamily::kBaseline:
      return f0;
    case PolicyFamily::kUniformPercent:
      return capped(static_cast<__int128>(floor) * policy.multiplier_micro);
    case PolicyFamily::kAbsoluteIncrement:
      return capped(static_cast<__int128>(f0) + policy.increment);
    case PolicyFamily::kPositiveFloorQuantile:
      if (floor > 0 && f0 < anchor) return anchor;
      return f0;
    case PolicyFamily::kAllFloorQuantile:
      if (f0 < anchor) return anchor;
      return f0;
    case PolicyFamily::kMarginGatedIncrement:
      if (gap >= policy.gap_threshold)
        return capped(static_cast<__int128>(f0) + policy.increment);
      return f0;
    case PolicyFamily::kHybridQuantileMargin:
      if (gap >= policy.gap_threshold) return f0 > anchor ? f0 : anchor;
      return f0;
  }
  throw Error(ErrorKind::kContract, "unhandled policy family");
}

MicroMoney reference_replay_row(bool filled, Money bid, Money payment,
                                MicroMoney candidate) {
  if (!filled) return 0;
  if (bid * kMicroScale < candidate) return 0;
  const MicroMoney paid = payment * kMicroScale;
  return paid > candidate ? paid : candidate;
}

ReferenceSummary reference_replay_policy(const Panel& panel, const Policy& policy,
                                         const QuantileSet& quantiles) {
  const auto& floors = panel.floors();
  const auto& bids = panel.bids();
  const auto& payments = panel.payments();
  const auto& filled = panel.filled();
  const std::int64_t n = panel.size();

  __int128 policy_sum = 0;
  __int128 base_sum = 0;
  std::int64_t retained = 0;
  std::int64_t base_fills = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool is_filled = filled[i] != 0;
    const MicroMoney cand =
        reference_candidate_floor(policy, floors[i], bids[i], quantiles);
    const MicroMoney y = reference_replay_row(is_filled, bids[i], payments[i], cand);
    policy_sum += y;
    if (is_filled && bids[i] * kMicroScale >= cand) ++retained;
    const MicroMoney y0 =
        reference_replay_row(is_filled, bids[i], payments[i], floors[i] * kMicroScale);
    base_sum += y0;
    if (is_filled) ++base_fills;
  }
  if (base_sum <= 0)
    throw Error(ErrorKind::kDomain,
                "baseline mean yield is zero; replay lift is undefined");

  ReferenceSummary s;
  s.mean_yield = static_cast<double>(policy_sum) /
                 (static_cast<double>(kMicroScale) * static_cast<double>(n));
  s.lift = static_cast<double>(policy_sum - base_sum) / static_cast<double>(base_sum);
  s.retained_share =
      static_cast<double>(retained) / static_cast<double>(base_fills);
  return s;
}

}  // namespace floorcert
