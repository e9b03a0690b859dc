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

#include "floorcert/support_diagnostics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "floorcert/error.hpp"
#include "floorcert/rng.hpp"

namespace floorcert {

namespace {

MicroMoney row_distance(Money bid, MicroMoney candidate) {
  const MicroMoney d = to_micro(bid) - candidate;
  return d < 0 ? -d : d;
}

MicroMoney row_yield(bool filled, Money bid, Money payment, MicroMoney candidate) {
  if (!filled || to_micro(bid) < candidate) return 0;
  return std::max(to_micro(payment), candidate);
}

// Per-policy boundary profile: floor-changing rows sorted by distance to
// the candidate threshold, with the replay contrast Z attached, plus the
// distances of all rows (for boundary mass) and per-day baseline totals.
struct ContrastProfile {
  struct Entry {
    MicroMoney distance;
    MicroMoney z;  // Y^pi - Y^0, micro units
    std::int32_t day;
  };
  std::vector<Entry> contrast;            // sorted by distance
  std::vector<MicroMoney> all_distances;  // sorted, every row
  std::vector<__int128> z_prefix;         // prefix sums over `contrast`
  __int128 base_yield_total = 0;
  std::vector<__int128> base_yield_by_day;
  std::vector<std::int64_t> rows_by_day;
  std::vector<std::int64_t> contrast_by_day;
  std::int64_t n = 0;
};

ContrastProfile build_profile(const Panel& panel, const Policy& policy,
                              const QuantileSet& quantiles, bool need_all_distances) {
  const auto& floors = panel.floors();
  const auto& bids = panel.bids();
  const auto& payments = panel.payments();
  const auto& filled = panel.filled();
  const auto& day_idx = panel.day_index();
  const std::int64_t n = panel.size();
  const std::size_t n_days = panel.days().size();

  ContrastProfile p;
  p.n = n;
  p.base_yield_by_day.assign(n_days, 0);
  p.rows_by_day.assign(n_days, 0);
  p.contrast_by_day.assign(n_days, 0);
  if (need_all_distances) p.all_distances.reserve(n);

  for (std::int64_t i = 0; i < n; ++i) {
    const MicroMoney f0 = to_micro(floors[i]);
    const MicroMoney cand = candidate_floor(policy, floors[i], bids[i], quantiles);
    const MicroMoney dist = row_distance(bids[i], cand);
    if (need_all_distances) p.all_distances.push_back(dist);
    ++p.rows_by_day[day_idx[i]];
    const bool is_filled = filled[i] != 0;
    const MicroMoney y0 = row_yield(is_filled, bids[i], payments[i], f0);
    p.base_yield_by_day[day_idx[i]] += y0;
    p.base_yield_total += y0;
    if (cand != f0) {
      const MicroMoney y = row_yield(is_filled, bids[i], payments[i], cand);
      p.contrast.push_back({dist, y - y0, day_idx[i]});
      ++p.contrast_by_day[day_idx[i]];
    }
  }

  std::sort(p.contrast.begin(), p.contrast.end(),
            [](const auto& a, const auto& b) { return a.distance < b.distance; });
  if (need_all_distances)
    std::sort(p.all_distances.begin(), p.all_distances.end());
  p.z_prefix.resize(p.contrast.size() + 1);
  p.z_prefix[0] = 0;
  for (std::size_t i = 0; i < p.contrast.size(); ++i)
    p.z_prefix[i + 1] = p.z_prefix[i] + p.contrast[i].z;
  return p;
}

void check_q(double q) {
  if (!(q > 0.0 && q <= 1.0))
    throw Error(ErrorKind::kConfig, "localization level q must be in (0,1]");
}

// ceil(q * count) as an order-statistic rank, with one-ulp slack so that
// binary representation of q never bumps an exact product to the next rank.
std::int64_t evidence_rank(double q, std::int64_t count) {
  const auto k = static_cast<std::int64_t>(
      std::ceil(q * static_cast<double>(count) - 1e-9));
  return std::clamp<std::int64_t>(k, 1, count);
}

LocalizedEstimate estimate_from_profile(const ContrastProfile& p,
                                        const std::string& policy_id, double q,
                                        bool want_lift) {
  if (p.contrast.empty())
    throw Error(ErrorKind::kDomain,
                "policy '" + policy_id +
                    "' changes no floor on this panel (degenerate against baseline)");
  LocalizedEstimate e;
  e.policy_id = policy_id;
  e.q = q;
  e.n_contrast = static_cast<std::int64_t>(p.contrast.size());
  const std::int64_t k = evidence_rank(q, e.n_contrast);
  e.radius = p.contrast[k - 1].distance;

  const auto in_band = std::upper_bound(
      p.all_distances.begin(), p.all_distances.end(), e.radius);
  e.boundary_mass = static_cast<double>(in_band - p.all_distances.begin()) /
                    static_cast<double>(p.n);

  if (want_lift) {
    // All rows inside the band contribute; rows with unchanged floors have
    // Z = 0, so the contrast prefix covers the whole sum.
    const auto last = std::upper_bound(
        p.contrast.begin(), p.contrast.end(), e.radius,
        [](MicroMoney r, const auto& entry) { return r < entry.distance; });
    const __int128 z_sum = p.z_prefix[last - p.contrast.begin()];
    if (p.base_yield_total <= 0)
      throw Error(ErrorKind::kDomain,
                  "baseline mean yield is zero; localized lift is undefined");
    e.localized_lift = static_cast<double>(z_sum) /
                       static_cast<double>(p.base_yield_total);
  } else {
    e.localized_lift = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

}  // namespace

std::vector<BoundaryDiagnostics> boundary_sweep(
    const Panel& panel, const Catalog& catalog,
    const std::vector<MicroMoney>& h_grid, double kappa,
    const std::vector<PolicyBounds>& bounds) {
  if (h_grid.empty() || h_grid.front() <= 0 ||
      !std::is_sorted(h_grid.begin(), h_grid.end()))
    throw Error(ErrorKind::kConfig, "h grid must be positive ascending");
  if (kappa < 0)
    throw Error(ErrorKind::kConfig, "penalty scale kappa must be nonnegative");

  const auto& floors = panel.floors();
  const auto& bids = panel.bids();
  const std::int64_t n = panel.size();
  const int n_h = static_cast<int>(h_grid.size());

  std::vector<BoundaryDiagnostics> out;
  out.reserve(catalog.policies.size() * h_grid.size());

  for (const Policy& policy : catalog.policies) {
    // Histogram rows by the first window that contains them; prefix sums
    // then give the cumulative boundary counts.
    std::vector<std::int64_t> counts(n_h + 1, 0);
#pragma omp parallel
    {
      std::vector<std::int64_t> local(n_h + 1, 0);
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        const MicroMoney cand =
            candidate_floor(policy, floors[i], bids[i], catalog.quantiles);
        const MicroMoney dist = row_distance(bids[i], cand);
        const auto slot =
            std::lower_bound(h_grid.begin(), h_grid.end(), dist) - h_grid.begin();
        ++local[slot];
      }
#pragma omp critical
      for (int s = 0; s <= n_h; ++s) counts[s] += local[s];
    }

    const auto bound_it =
        std::find_if(bounds.begin(), bounds.end(), [&](const PolicyBounds& b) {
          return b.policy_id == policy.id;
        });
    if (bound_it == bounds.end())
      throw Error(ErrorKind::kContract,
                  "no bounds supplied for policy '" + policy.id + "'");

    std::int64_t cumulative = 0;
    for (int s = 0; s < n_h; ++s) {
      cumulative += counts[s];
      BoundaryDiagnostics d;
      d.policy_id = policy.id;
      d.window_h = h_grid[s];
      d.n_boundary = cumulative;
      if (cumulative > 0) {
        d.penalty = kappa / std::sqrt(static_cast<double>(cumulative));
        d.penalized_lcb = bound_it->lcb - d.penalty;
      } else {
        d.penalty = std::numeric_limits<double>::infinity();
        d.penalized_lcb = -std::numeric_limits<double>::infinity();
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<MicroMoney> default_h_grid() {
  std::vector<MicroMoney> grid;
  for (const char* h : {"1", "2", "3", "5", "7.5", "10", "15", "20", "30",
                        "50", "75", "100", "150", "200"})
    grid.push_back(parse_micro(h));
  return grid;
}

LocalizedEstimate q_local_radius(const Panel& panel, const Policy& policy,
                                 const QuantileSet& quantiles, double q) {
  check_q(q);
  const auto profile = build_profile(panel, policy, quantiles, true);
  return estimate_from_profile(profile, policy.id, q, false);
}

LocalizedEstimate localized_lift(const Panel& panel, const Policy& policy,
                                 const QuantileSet& quantiles, double q) {
  check_q(q);
  const auto profile = build_profile(panel, policy, quantiles, true);
  return estimate_from_profile(profile, policy.id, q, true);
}

std::vector<double> default_q_grid() { return {0.01, 0.025, 0.05, 0.10, 0.20}; }

LocalizedSelection localized_selection(const Panel& panel, const Catalog& catalog,
                                       const std::vector<double>& q_grid,
                                       int bootstrap_draws, std::uint64_t seed) {
  for (double q : q_grid) check_q(q);
  if (bootstrap_draws < 1)
    throw Error(ErrorKind::kConfig, "bootstrap draws must be at least 1");

  LocalizedSelection sel;
  sel.draws = bootstrap_draws;

  std::vector<const Policy*> policies;
  std::vector<ContrastProfile> profiles;
  for (const Policy& p : catalog.policies) {
    if (p.is_baseline()) continue;
    ContrastProfile prof = build_profile(panel, p, catalog.quantiles, true);
    if (prof.contrast.empty()) {
      sel.skipped_degenerate.push_back(p.id);
      continue;
    }
    policies.push_back(&p);
    profiles.push_back(std::move(prof));
  }
  if (policies.empty())
    throw Error(ErrorKind::kDomain,
                "every catalog policy is degenerate on this panel");

  const std::size_t n_days = panel.days().size();

  for (double q : q_grid) {
    LocalizedSelection::PerQ per;
    per.q = q;
    for (std::size_t j = 0; j < policies.size(); ++j)
      per.ranked.push_back(
          estimate_from_profile(profiles[j], policies[j]->id, q, true));
    std::stable_sort(per.ranked.begin(), per.ranked.end(),
                     [](const LocalizedEstimate& a, const LocalizedEstimate& b) {
                       return a.localized_lift > b.localized_lift;
                     });

    // Day bootstrap: radii and localized sums are recomputed inside each
    // resampled panel by walking the distance-sorted contrast rows with
    // day multiplicities.
    std::vector<std::int64_t> wins(policies.size(), 0);
    std::int64_t counted = 0;
#pragma omp parallel
    {
      std::vector<std::int64_t> local_wins(policies.size(), 0);
      std::int64_t local_counted = 0;
      std::vector<std::int64_t> mult(n_days);
#pragma omp for schedule(static)
      for (int t = 0; t < bootstrap_draws; ++t) {
        SplitMix64 rng(seed, 0x10c4 + static_cast<std::uint64_t>(t));
        std::fill(mult.begin(), mult.end(), 0);
        for (std::size_t d = 0; d < n_days; ++d)
          ++mult[rng.next_below(n_days)];

        int best = -1;
        double best_lift = 0;
        for (std::size_t j = 0; j < policies.size(); ++j) {
          const ContrastProfile& prof = profiles[j];
          std::int64_t n_change = 0;
          for (std::size_t d = 0; d < n_days; ++d)
            n_change += mult[d] * prof.contrast_by_day[d];
          if (n_change == 0) continue;
          __int128 s0 = 0;
          for (std::size_t d = 0; d < n_days; ++d)
            s0 += static_cast<__int128>(mult[d]) * prof.base_yield_by_day[d];
          if (s0 <= 0) continue;

          const std::int64_t k = evidence_rank(q, n_change);
          std::int64_t acc = 0;
          __int128 z_sum = 0;
          MicroMoney radius = 0;
          std::size_t i = 0;
          for (; i < prof.contrast.size(); ++i) {
            const auto& e = prof.contrast[i];
            const std::int64_t m = mult[e.day];
            acc += m;
            z_sum += static_cast<__int128>(m) * e.z;
            if (acc >= k) {
              radius = e.distance;
              break;
            }
          }
          // Include the rest of the tie group at the radius.
          for (++i; i < prof.contrast.size() && prof.contrast[i].distance == radius;
               ++i)
            z_sum += static_cast<__int128>(mult[prof.contrast[i].day]) *
                     prof.contrast[i].z;

          const double lift =
              static_cast<double>(z_sum) / static_cast<double>(s0);
          if (best < 0 || lift > best_lift) {
            best = static_cast<int>(j);
            best_lift = lift;
          }
        }
        if (best >= 0) {
          ++local_wins[best];
          ++local_counted;
        }
      }
#pragma omp critical
      {
        for (std::size_t j = 0; j < policies.size(); ++j)
          wins[j] += local_wins[j];
        counted += local_counted;
      }
    }
    for (std::size_t j = 0; j < policies.size(); ++j)
      per.winner_frequency[policies[j]->id] =
          counted > 0 ? static_cast<double>(wins[j]) / static_cast<double>(counted)
                      : 0.0;
    sel.per_q.push_back(std::move(per));
  }
  return sel;
}

double pairwise_boundary_mass(const Panel& panel, const Policy& a,
                              const Policy& b, const QuantileSet& quantiles,
                              bool* degenerate) {
  if (a.id == b.id)
    throw Error(ErrorKind::kContract,
                "pairwise boundary mass requires two distinct policies");
  const auto& floors = panel.floors();
  const auto& bids = panel.bids();
  const auto& filled = panel.filled();
  const std::int64_t n = panel.size();

  std::int64_t n_filled = 0;
  std::int64_t inside = 0;
  bool identical = true;
  for (std::int64_t i = 0; i < n; ++i) {
    const MicroMoney fa = candidate_floor(a, floors[i], bids[i], quantiles);
    const MicroMoney fb = candidate_floor(b, floors[i], bids[i], quantiles);
    if (fa != fb) identical = false;
    if (!filled[i]) continue;
    ++n_filled;
    const MicroMoney bid = to_micro(bids[i]);
    if (bid >= std::min(fa, fb) && bid <= std::max(fa, fb)) ++inside;
  }
  if (degenerate) *degenerate = identical;
  if (identical || n_filled == 0) return 0.0;
  return static_cast<double>(inside) / static_cast<double>(n_filled);
}

double required_boundary_sample(double B, double epsilon, double delta,
                                double c0) {
  if (B <= 0 || c0 <= 0)
    throw Error(ErrorKind::kConfig, "B and c0 must be positive");
  if (!(delta > 0 && delta < 0.5))
    throw Error(ErrorKind::kConfig, "delta must be in (0, 1/2)");
  if (epsilon < 0)
    throw Error(ErrorKind::kConfig, "epsilon must be nonnegative");
  if (epsilon == 0) return std::numeric_limits<double>::infinity();
  return (B * B) / (c0 * epsilon * epsilon) * std::log(1.0 / (2.0 * delta));
}

namespace {

double localization_error(const BoundCalculatorInputs& in, double m,
                          double radius) {
  if (!(m > 0 && m <= 1))
    throw Error(ErrorKind::kConfig, "boundary mass must be in (0,1]");
  if (in.B <= 0 || in.mu0 <= 0 || in.n < 1 || in.catalog_size < 1 ||
      in.C <= 0 || in.L_pi < 0 || radius < 0)
    throw Error(ErrorKind::kConfig, "calculator inputs must be positive");
  if (!(in.delta > 0 && in.delta < 1))
    throw Error(ErrorKind::kConfig, "delta must be in (0,1)");
  const double log_term =
      std::log(2.0 * static_cast<double>(in.catalog_size) / in.delta);
  const double nd = static_cast<double>(in.n);
  return in.C * (in.B / in.mu0) * std::sqrt(m * log_term / nd) +
         in.C * (in.B / in.mu0) * log_term / nd + in.L_pi * radius / in.mu0;
}

}  // namespace

double localization_error_bound(const BoundCalculatorInputs& inputs, double m,
                                double radius, double q) {
  check_q(q);
  return localization_error(inputs, m, radius);
}

bool ranking_certified(double localized_margin, double eps_a, double eps_b,
                       double response_eta, double mu0) {
  if (eps_a < 0 || eps_b < 0 || response_eta < 0)
    throw Error(ErrorKind::kConfig, "error bounds and eta must be nonnegative");
  if (mu0 <= 0)
    throw Error(ErrorKind::kConfig, "mu0 must be positive");
  return localized_margin > eps_a + eps_b + response_eta / mu0;
}

double regret_bound(const BoundCalculatorInputs& inputs,
                    const std::vector<std::pair<double, double>>& mass_radius) {
  if (mass_radius.empty())
    throw Error(ErrorKind::kConfig, "regret bound needs at least one policy");
  double worst = 0;
  for (const auto& [m, radius] : mass_radius)
    worst = std::max(worst, localization_error(inputs, m, radius));
  return 2.0 * worst;
}

}  // namespace floorcert
