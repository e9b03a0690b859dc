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

// Acceptance suite. Each criterion prints one PASS/FAIL line; the binary
// exits nonzero if any criterion fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "floorcert/error.hpp"
#include "floorcert/pipeline.hpp"
#include "floorcert/reference_replay.hpp"
#include "floorcert/rng.hpp"
#include "floorcert/segment_safety.hpp"
#include "floorcert/support_diagnostics.hpp"
#include "floorcert/synth.hpp"
#include "floorcert/uncertainty_decision.hpp"
#include "floorcert/validation.hpp"

using namespace floorcert;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Harness {
  int failures = 0;

  void run(int number, const std::string& name,
           const std::function<bool(std::string&)>& body) {
    std::string detail;
    const auto t0 = Clock::now();
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(t0);
    std::printf("%s criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL",
                number, name.c_str(), elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

PolicyBounds hand_bounds(std::string id, double lcb, double ucb, double lift_hat,
                         bool baseline = false) {
  PolicyBounds b;
  b.policy_id = std::move(id);
  b.baseline = baseline;
  b.lcb = lcb;
  b.ucb = ucb;
  b.lcb_support = lcb;
  b.lift_hat = lift_hat;
  b.alpha = 0.05;
  b.z_crit = 1;
  return b;
}

// Generator family shared by the Monte Carlo criteria: light tails so
// daily-lift normal intervals are honest at a few hundred rows per day.
synth::GeneratorConfig mc_generator() {
  synth::GeneratorConfig g;
  g.n_rows = 6000;
  g.n_days = 12;
  g.advertisers = 3;
  g.exchanges = 2;
  g.regions = 2;
  g.zero_floor_prob = 0.15;
  g.floor_log_location = 3.0;
  g.floor_log_scale = 0.45;
  g.overshoot_log_location = 2.2;
  g.overshoot_log_scale = 0.7;
  g.fill_slope = 0.04;
  g.fill_intercept = 0.5;
  g.payment_fraction = 0.5;
  return g;
}

struct MonteCarloOutcome {
  int replications = 0;
  int soundness_violations = 0;  // a dominated policy had true regret <= rho
  int retention_hits = 0;        // the true best stayed certified/unresolved
  double mean_dominated = 0;     // average dominated count, for transparency
};

MonteCarloOutcome run_decision_monte_carlo(int replications, double alpha,
                                           double lambda, double rho) {
  const synth::GeneratorConfig population = mc_generator();

  // Frozen anchors from a dedicated reference panel, never refit.
  synth::GeneratorConfig ref_cfg = population;
  ref_cfg.seed = 777;
  ref_cfg.n_rows = 200'000;
  const QuantileSet quantiles =
      fit_quantiles(synth::generate_log(ref_cfg), "mc-reference");
  const Catalog catalog = build_catalog(paper19_spec(), quantiles);

  // Ground truth on a 1e7-row population drawn once.
  std::vector<double> truth(catalog.policies.size(), 0.0);
  for (std::size_t p = 1; p < catalog.policies.size(); ++p)
    truth[p] = synth::true_lift_oracle(population, catalog.policies[p], quantiles,
                                       10'000'000)
                   .lift;
  std::size_t best_index = 1;
  for (std::size_t p = 2; p < catalog.policies.size(); ++p)
    if (truth[p] > truth[best_index]) best_index = p;
  const double best_truth = truth[best_index];
  const std::string best_id = catalog.policies[best_index].id;

  MonteCarloOutcome out;
  out.replications = replications;
  std::int64_t dominated_total = 0;

  for (int rep = 0; rep < replications; ++rep) {
    synth::GeneratorConfig cfg = population;
    cfg.seed = 40'000 + static_cast<std::uint64_t>(rep);
    const Panel panel = synth::generate_log(cfg);
    const auto summaries = replay_catalog(panel, catalog);
    const auto bounds = simultaneous_bounds(summaries, alpha, lambda);
    const DecisionObject decision = decide(bounds, rho);

    dominated_total += static_cast<std::int64_t>(decision.dominated.size());
    bool violated = false;
    for (const std::string& id : decision.dominated) {
      for (std::size_t p = 1; p < catalog.policies.size(); ++p)
        if (catalog.policies[p].id == id && best_truth - truth[p] <= rho)
          violated = true;
    }
    out.soundness_violations += violated;

    const bool best_dominated =
        std::find(decision.dominated.begin(), decision.dominated.end(), best_id) !=
        decision.dominated.end();
    out.retention_hits += !best_dominated;
  }
  out.mean_dominated =
      static_cast<double>(dominated_total) / static_cast<double>(replications);
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  Harness h;
  std::printf("acceptance suite (threads available: %d)\n", omp_get_max_threads());

  h.run(1, "worked decision example separates the rules", [](std::string& detail) {
    const std::vector<PolicyBounds> bounds = {
        hand_bounds("P0", 0, 0, 0, true),
        hand_bounds("a", 0.9, 1.1, 1.0),
        hand_bounds("b", 0.0, 2.4, 1.2),
    };
    const auto t0 = Clock::now();
    const DecisionObject d = decide(bounds, 0.0);
    const std::string naive = point_estimate_winner(bounds);
    const double ms = seconds_since(t0) * 1e3;
    detail = "leader=" + d.leader_id + " point-estimate=" + naive;
    return d.leader_id == "a" && d.certified == std::vector<std::string>{"a"} &&
           d.unresolved == std::vector<std::string>{"b"} && d.dominated.empty() &&
           naive == "b" && ms < 1.0;
  });

  h.run(2, "Bonferroni critical values at catalog sizes 3 and 19",
        [](std::string& detail) {
          const double z3 = normal_quantile(1 - 0.05 / (2.0 * 3));
          const double z19 = normal_quantile(1 - 0.05 / (2.0 * 19));
          char buf[64];
          std::snprintf(buf, sizeof(buf), "z3=%.4f z19=%.4f", z3, z19);
          detail = buf;
          return std::fabs(z3 - 2.394) < 1e-3 && std::fabs(z19 - 3.008) < 1e-3;
        });

  h.run(3, "response-gap threshold halves the 12.15pp margin",
        [](std::string& detail) {
          const auto a = response_gap_threshold(0.1215, 0.0);
          char buf[64];
          std::snprintf(buf, sizeof(buf), "threshold=%.4fpp", a.threshold * 100);
          detail = buf;
          const double threshold_pp = a.threshold * 100;
          return std::fabs(threshold_pp - 6.075) < 1e-12 &&
                 std::fabs(threshold_pp - 6.08) < 0.005 + 1e-12;
        });

  h.run(4, "engine matches the brute-force oracle on 50 seeded panels",
        [](std::string& detail) {
          const auto t0 = Clock::now();
          double worst = 0;
          for (int s = 0; s < 50; ++s) {
            synth::GeneratorConfig cfg;
            cfg.seed = 1000 + static_cast<std::uint64_t>(s);
            cfg.n_rows = 10'000 + 1800 * static_cast<std::int64_t>(s);
            const Panel panel = synth::generate_log(cfg);
            const QuantileSet q = fit_quantiles(panel);
            const Catalog catalog = build_catalog(paper19_spec(), q);
            const auto summaries = replay_catalog(panel, catalog);
            for (std::size_t i = 0; i < summaries.size(); ++i) {
              const auto ref =
                  reference_replay_policy(panel, catalog.policies[i], q);
              const double rel =
                  std::fabs(summaries[i].lift - ref.lift) /
                  std::max(1.0, std::fabs(ref.lift));
              worst = std::max(worst, rel);
            }
          }
          const double elapsed = seconds_since(t0);
          char buf[96];
          std::snprintf(buf, sizeof(buf), "max rel diff=%.2e elapsed=%.1fs",
                        worst, elapsed);
          detail = buf;
          return worst <= 1e-12 && elapsed < 30.0;
        });

  {
    // Criteria 5 and 6 share one 200-replication Monte Carlo.
    const double alpha = 0.05, lambda = 1.0, rho = 0.05;
    MonteCarloOutcome mc;
    const auto t0 = Clock::now();
    bool mc_ok = true;
    std::string mc_err;
    try {
      mc = run_decision_monte_carlo(200, alpha, lambda, rho);
    } catch (const std::exception& e) {
      mc_ok = false;
      mc_err = e.what();
    }
    const double mc_elapsed = seconds_since(t0);

    h.run(5, "elimination soundness over 200 seeded replications",
          [&](std::string& detail) {
            if (!mc_ok) {
              detail = mc_err;
              return false;
            }
            const double fraction =
                static_cast<double>(mc.soundness_violations) / mc.replications;
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "violations=%d/%d mean dominated=%.1f elapsed=%.1fs",
                          mc.soundness_violations, mc.replications,
                          mc.mean_dominated, mc_elapsed);
            detail = buf;
            return fraction <= alpha + 0.03 && mc_elapsed < 600.0;
          });

    h.run(6, "best policy retention over the same replications",
          [&](std::string& detail) {
            if (!mc_ok) {
              detail = mc_err;
              return false;
            }
            const double fraction =
                static_cast<double>(mc.retention_hits) / mc.replications;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "retained=%d/%d", mc.retention_hits,
                          mc.replications);
            detail = buf;
            return fraction >= 1 - alpha - 0.03;
          });
  }

  h.run(7, "localization identity and monotone radius/boundary maps",
        [](std::string& detail) {
          int checked_policies = 0;
          for (int s = 0; s < 20; ++s) {
            synth::GeneratorConfig cfg;
            cfg.seed = 2000 + static_cast<std::uint64_t>(s);
            cfg.n_rows = 3000;
            const Panel panel = synth::generate_log(cfg);
            const QuantileSet q = fit_quantiles(panel);
            const Catalog catalog = build_catalog(paper19_spec(), q);
            const auto summaries = replay_catalog(panel, catalog);

            std::vector<PolicyBounds> bounds;
            for (const auto& pol : catalog.policies) {
              PolicyBounds b;
              b.policy_id = pol.id;
              bounds.push_back(b);
            }
            const auto sweep =
                boundary_sweep(panel, catalog, default_h_grid(), 1.0, bounds);
            std::int64_t prev = -1;
            std::string prev_id;
            for (const auto& d : sweep) {
              if (d.policy_id != prev_id) {
                prev = -1;
                prev_id = d.policy_id;
              }
              if (d.n_boundary < prev) return false;
              prev = d.n_boundary;
            }

            for (std::size_t i = 1; i < catalog.policies.size(); ++i) {
              LocalizedEstimate full;
              try {
                full = localized_lift(panel, catalog.policies[i], q, 1.0);
              } catch (const Error&) {
                continue;  // degenerate on this panel
              }
              ++checked_policies;
              const double rel = std::fabs(full.localized_lift - summaries[i].lift) /
                                 std::max(1.0, std::fabs(summaries[i].lift));
              if (rel > 1e-12) return false;
              MicroMoney prev_radius = 0;
              for (double qq : {0.1, 0.25, 0.5, 0.75, 1.0}) {
                const MicroMoney r =
                    q_local_radius(panel, catalog.policies[i], q, qq).radius;
                if (r < prev_radius) return false;
                prev_radius = r;
              }
            }
          }
          detail = "policies checked: " + std::to_string(checked_policies);
          return checked_policies > 200;
        });

  h.run(8, "segment certificate logic and Monte Carlo coverage",
        [](std::string& detail) {
          // Property check of the certificate rule.
          SplitMix64 rng(4242);
          for (int trial = 0; trial < 2000; ++trial) {
            const int k = 1 + static_cast<int>(rng.next_below(8));
            std::vector<double> lcbs;
            double min_lcb = 1e18;
            for (int i = 0; i < k; ++i) {
              const double v = rng.next_double() - 0.4;
              lcbs.push_back(v);
              min_lcb = std::min(min_lcb, v);
            }
            const double L = rng.next_double() * 2;
            const double radius = rng.next_double() * 0.4;
            if (nonharm_certified(lcbs, L, radius) != (min_lcb > L * radius))
              return false;
            const std::vector<double> grid = {0, 0.1, 0.2, 0.4};
            const auto counts = coverage_sensitivity(lcbs, L, grid);
            int prev = k + 1;
            for (double r : grid) {
              if (counts.at(r) > prev) return false;
              prev = counts.at(r);
            }
          }

          // Segment-level Monte Carlo coverage at alpha = 0.05.
          synth::GeneratorConfig base = mc_generator();
          base.n_rows = 12'800;
          base.n_days = 16;
          base.advertisers = 2;
          Policy policy;
          policy.id = "A5";
          policy.family = PolicyFamily::kAbsoluteIncrement;
          policy.increment = parse_micro("5");
          const double truth =
              synth::true_lift_oracle(base, policy, {}, 4'000'000).lift;
          int covered = 0;
          const int reps = 200;
          for (int rep = 0; rep < reps; ++rep) {
            synth::GeneratorConfig cfg = base;
            cfg.seed = 60'000 + static_cast<std::uint64_t>(rep);
            const Panel p = synth::generate_log(cfg);
            const SegmentMap m =
                partition_segments(p, {SegmentDimension::kAdvertiser}, 1);
            const auto r = segment_bounds(p, policy, {}, m, 0.05);
            bool all_below = true;
            for (const auto& b : r.covered)
              if (b.lcb > truth) all_below = false;
            covered += all_below;
          }
          char buf[64];
          std::snprintf(buf, sizeof(buf), "coverage=%d/%d", covered, reps);
          detail = buf;
          return static_cast<double>(covered) / reps >= 1 - 0.05 - 0.03;
        });

  h.run(9, "sample-size calculators and exact scalings", [](std::string& detail) {
    const double boundary = required_boundary_sample(1.0, 0.1, 0.05, 1.0);
    const double segment = required_segment_sample(1.0, 44, 0.05, 0.1, 0.0, 0.0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "boundary=%.2f segment=%.1f", boundary,
                  segment);
    detail = buf;
    if (std::fabs(boundary - 230.2585092994046) > 1e-6 * 230.26) return false;
    if (std::fabs(segment - 677.9921907472251) > 1e-6 * 678.0) return false;
    // Quadratic scalings in B, A and inverse-square in epsilon hold exactly;
    // the comparison allows double roundoff only.
    const auto matches = [](double value, double expected) {
      return std::fabs(value - expected) <= 1e-12 * std::fabs(expected);
    };
    if (!matches(required_boundary_sample(3.0, 0.1, 0.05), 9.0 * boundary))
      return false;
    if (!matches(required_boundary_sample(1.0, 0.05, 0.05), 4.0 * boundary))
      return false;
    if (!matches(required_segment_sample(2.0, 44, 0.05, 0.1, 0.0, 0.0),
                 4.0 * segment))
      return false;
    return true;
  });

  h.run(10, "determinism across workers and replay throughput",
        [](std::string& detail) {
          RunConfig config;
          config.use_synth = true;
          config.synth_config.n_rows = 50'000;
          config.synth_config.n_days = 10;
          config.synth_config.seed = 99;
          config.seed = 99;
          config.synth_holdout_rows = 20'000;
          config.segment_min_rows = 500;
          config.localized_draws = 50;
          config.bootstrap_draws = 100;

          const fs::path base =
              fs::temp_directory_path() / "floorcert_acceptance";
          fs::remove_all(base);
          std::string reference_bytes;
          for (int workers : {1, 2, 5, 16}) {
            RunConfig c = config;
            c.workers = workers;
            const fs::path dir = base / ("w" + std::to_string(workers));
            fs::create_directories(dir);
            run_pipeline(c, dir.string());
            const std::string bytes = slurp(dir / files::kDecision);
            if (reference_bytes.empty()) reference_bytes = bytes;
            if (bytes != reference_bytes) {
              detail = "decision.json differs at workers=" +
                       std::to_string(workers);
              return false;
            }
          }
          omp_set_num_threads(omp_get_num_procs());

          // Throughput: 19 policies over a 1e6-row panel within 10 s.
          synth::GeneratorConfig big;
          big.seed = 5;
          big.n_rows = 1'000'000;
          big.n_days = 14;
          const Panel panel = synth::generate_log(big);
          const QuantileSet q = fit_quantiles(panel);
          const Catalog catalog = build_catalog(paper19_spec(), q);
          const auto t0 = Clock::now();
          const auto summaries = replay_catalog(panel, catalog);
          const double elapsed = seconds_since(t0);
          char buf[96];
          std::snprintf(buf, sizeof(buf),
                        "byte-identical at 1/2/5/16 workers; replay=%.2fs",
                        elapsed);
          detail = buf;
          return summaries.size() == 19 && elapsed <= 10.0;
        });

  if (h.failures == 0) std::printf("acceptance: all criteria passed\n");
  return h.failures == 0 ? 0 : 1;
}
