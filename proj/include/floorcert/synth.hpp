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

#ifndef FLOORCERT_SYNTH_HPP_
#define FLOORCERT_SYNTH_HPP_

#include <cstdint>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"

namespace floorcert::synth {

// Seeded synthetic auction-log generator. Rows are i.i.d. given the config:
//   floor    = 0 with probability zero_floor_prob, else lognormal;
//   bid      = floor + lognormal overshoot;
//   filled   ~ logistic in the bid-floor gap (never fires on negative gaps);
//   payment  = floor + payment_fraction * (bid - floor) when filled, else 0;
//   day      = row index round-robin over n_days.
// Generation is stream-partitioned by (seed, chunk), so the same seed gives
// the same panel for any worker count.
struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::int64_t n_rows = 10'000;
  int n_days = 7;
  int advertisers = 4;
  int exchanges = 3;
  int regions = 4;
  int categories = 0;  // 0 leaves the category key empty
  double zero_floor_prob = 0.2;
  double floor_log_location = 3.0;   // lognormal on positive floors, minor units
  double floor_log_scale = 0.8;
  double overshoot_log_location = 3.5;  // lognormal on bid - floor
  double overshoot_log_scale = 1.0;
  double fill_slope = 0.02;      // logistic slope on the gap
  double fill_intercept = 0.0;   // logistic intercept
  double payment_fraction = 0.5;  // position of payment inside [floor, bid]

  void validate() const;
};

Panel generate_log(const GeneratorConfig& config);

struct OracleEstimate {
  double lift = 0;
  double se = 0;        // CLT standard error of the lift estimate
  double mu0 = 0;       // baseline mean yield, minor units
  std::int64_t n = 0;
};

// Ground-truth lift for a policy under the generator's population: replays
// a fresh n_oracle-row stream (disjoint from any panel the same seed
// produces) through the serial reference implementation. The standard
// error is the delta-method CLT scale, for sizing test tolerance bands.
OracleEstimate true_lift_oracle(const GeneratorConfig& config, const Policy& policy,
                                const QuantileSet& quantiles,
                                std::int64_t n_oracle = 10'000'000);

}  // namespace floorcert::synth

#endif  // FLOORCERT_SYNTH_HPP_
