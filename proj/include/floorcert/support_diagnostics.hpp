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

#ifndef FLOORCERT_SUPPORT_DIAGNOSTICS_HPP_
#define FLOORCERT_SUPPORT_DIAGNOSTICS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"
#include "floorcert/uncertainty_decision.hpp"

namespace floorcert {

// Row-wise boundary distance is |bid - candidate floor|: the per-row
// threshold band, which stays well defined for non-uniform policies where
// no single threshold exists.

struct BoundaryDiagnostics {
  std::string policy_id;
  MicroMoney window_h = 0;
  std::int64_t n_boundary = 0;  // rows with |bid - f^pi| <= h
  double penalty = 0;           // kappa / sqrt(n_boundary)
  double penalized_lcb = 0;     // lcb - penalty; -inf when n_boundary == 0
};

// Sweeps the diagnostic boundary window over every catalog policy.
// h_grid must be positive ascending (micro units). Output is policy-major,
// window-minor; n_boundary is nondecreasing in h for each policy.
std::vector<BoundaryDiagnostics> boundary_sweep(
    const Panel& panel, const Catalog& catalog,
    const std::vector<MicroMoney>& h_grid, double kappa,
    const std::vector<PolicyBounds>& bounds);

// The standard boundary-window grid for the sweep.
std::vector<MicroMoney> default_h_grid();

struct LocalizedEstimate {
  std::string policy_id;
  double q = 0;
  MicroMoney radius = 0;       // smallest band holding fraction q of contrast rows
  double boundary_mass = 0;    // share of all rows within the band
  double localized_lift = 0;   // NaN when only the radius was requested
  std::int64_t n_contrast = 0; // floor-changing rows
};

// q is normalized over floor-changing rows (candidate != logged floor).
// Both throw Error{kDomain} when the policy never changes a floor on the
// panel (it is indistinguishable from the baseline there).
LocalizedEstimate q_local_radius(const Panel& panel, const Policy& policy,
                                 const QuantileSet& quantiles, double q);
LocalizedEstimate localized_lift(const Panel& panel, const Policy& policy,
                                 const QuantileSet& quantiles, double q);

struct LocalizedSelection {
  struct PerQ {
    double q = 0;
    std::vector<LocalizedEstimate> ranked;  // descending localized lift
    std::map<std::string, double> winner_frequency;
  };
  std::vector<PerQ> per_q;
  std::vector<std::string> skipped_degenerate;  // policies with no contrast rows
  int draws = 0;
};

// Default localization grid.
std::vector<double> default_q_grid();

// Ranks non-baseline policies by localized lift at each q and estimates
// day-bootstrap winner frequencies (radii recomputed within each draw).
LocalizedSelection localized_selection(const Panel& panel, const Catalog& catalog,
                                       const std::vector<double>& q_grid,
                                       int bootstrap_draws, std::uint64_t seed);

// Share of filled rows whose bid lies in the closed interval between the
// two candidate floors. Symmetric in (a, b). Sets *degenerate when the two
// policies assign identical floors on every row (mass reported as 0).
double pairwise_boundary_mass(const Panel& panel, const Policy& a,
                              const Policy& b, const QuantileSet& quantiles,
                              bool* degenerate = nullptr);

// Effective boundary sample n*m needed to separate two policies whose
// replay lifts differ by epsilon: (B^2 / (c0 epsilon^2)) * ln(1/(2 delta)).
// Returns +inf when epsilon == 0.
double required_boundary_sample(double B, double epsilon, double delta,
                                double c0 = 1.0);

struct BoundCalculatorInputs {
  double B = 1;             // per-auction reward bound, money units
  double mu0 = 1;           // baseline mean yield
  std::int64_t n = 1;       // panel size
  std::int64_t catalog_size = 1;
  double delta = 0.05;      // failure probability
  double C = 1;             // universal constant, user supplied
  double L_pi = 1;          // localization envelope constant
  double c0 = 1;            // resolution constant
  double A = 1;             // segment reward bound
  double L_s = 0;           // segment Lipschitz constant
  double cover_radius = 0;  // segment cover radius
};

// eps_pi(q): the three-term localized error bound. `radius` is in money
// units; q is carried for labeling and must lie in (0,1].
double localization_error_bound(const BoundCalculatorInputs& inputs, double m,
                                double radius, double q);

// True iff the localized margin strictly clears both policies' error bounds
// plus the normalized response gap eta / mu0.
bool ranking_certified(double localized_margin, double eps_a, double eps_b,
                       double response_eta, double mu0);

// Replay regret of the localized empirical maximizer: twice the worst
// localization error bound over the catalog's (mass, radius) profile.
double regret_bound(const BoundCalculatorInputs& inputs,
                    const std::vector<std::pair<double, double>>& mass_radius);

}  // namespace floorcert

#endif  // FLOORCERT_SUPPORT_DIAGNOSTICS_HPP_
