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

#ifndef FLOORCERT_REFERENCE_REPLAY_HPP_
#define FLOORCERT_REFERENCE_REPLAY_HPP_

#include <cstdint>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"

namespace floorcert {

// Serial reference replay, deliberately written without any code shared
// with the production kernel so that engine/reference agreement in tests is
// evidence rather than tautology. Row-at-a-time, no chunking, no threading.

// Re-derives f^pi for one row from the policy definition.
MicroMoney reference_candidate_floor(const Policy& policy, Money floor,
                                     Money bid, const QuantileSet& quantiles);

// Replay outcome of one row under a candidate floor:
// retains the row only when it was logged filled and the logged bid clears
// the candidate, paying max(logged payment, candidate); zero otherwise.
MicroMoney reference_replay_row(bool filled, Money bid, Money payment,
                                MicroMoney candidate);

struct ReferenceSummary {
  double mean_yield = 0;      // minor units per opportunity
  double lift = 0;            // vs the logged baseline
  double retained_share = 0;  // retained / logged fills
};

ReferenceSummary reference_replay_policy(const Panel& panel, const Policy& policy,
                                         const QuantileSet& quantiles);

}  // namespace floorcert

#endif  // FLOORCERT_REFERENCE_REPLAY_HPP_
