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

#ifndef FLOORCERT_PIPELINE_HPP_
#define FLOORCERT_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "floorcert/auction_log.hpp"
#include "floorcert/policy_catalog.hpp"
#include "floorcert/replay_engine.hpp"
#include "floorcert/support_diagnostics.hpp"
#include "floorcert/synth.hpp"
#include "floorcert/validation.hpp"

namespace floorcert {

// One run configuration drives the whole pipeline. Stages communicate only
// through plain files in the output directory, so any stage can be rerun
// from its cached upstream artifacts.
struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 0;  // 0 keeps the OpenMP default

  // Exactly one of (input dev path, synth) must be set.
  std::string input_dev_path;
  std::string input_holdout_path;
  SchemaMapping schema;
  char delimiter = ',';
  bool strict = true;

  bool use_synth = false;
  synth::GeneratorConfig synth_config;
  std::int64_t synth_holdout_rows = 0;  // 0 means half the dev rows

  std::string catalog_preset = "paper19";  // ignored when catalog_file set
  std::string catalog_file;

  double alpha = 0.05;
  double lambda = 1.0;
  double tolerance = 0.0;
  std::vector<double> tolerance_grid = {0.0, 0.05, 0.10};

  std::vector<MicroMoney> h_grid = default_h_grid();
  double kappa = 5.0;
  std::vector<double> q_grid = default_q_grid();
  int localized_draws = 200;

  std::vector<SegmentDimension> segment_dimensions = {
      SegmentDimension::kAdvertiser, SegmentDimension::kExchange,
      SegmentDimension::kRegion};
  std::int64_t segment_min_rows = 100;
  std::vector<MicroMoney> gap_bucket_edges;
  double L_s = 0.0;
  double cover_radius = 0.0;
  std::vector<double> cover_radius_grid = {0.0, 0.25, 0.5, 1.0, 2.0};

  int bootstrap_draws = 0;  // 0 skips the bootstrap stage
  BootstrapRanking bootstrap_ranking = BootstrapRanking::kFullReplay;
  BootstrapUnit bootstrap_unit = BootstrapUnit::kDay;

  ReplayOptions replay_options;
  int topk = 5;

  static RunConfig load(const std::string& path);
  void validate() const;

  // Canonical JSON echo of this configuration (also hashed for the manifest).
  std::string to_json_string() const;
};

// Output file names inside the run directory.
namespace files {
inline constexpr const char* kPanel = "panel.csv";
inline constexpr const char* kHoldout = "holdout.csv";
inline constexpr const char* kIngestReport = "ingest.json";
inline constexpr const char* kQuantiles = "quantiles.json";
inline constexpr const char* kReplaySummaries = "replay_summaries.json";
inline constexpr const char* kReplayTable = "replay_table.csv";
inline constexpr const char* kSegments = "segments.csv";
inline constexpr const char* kSegmentCertificates = "segment_certificates.json";
inline constexpr const char* kDecision = "decision.json";
inline constexpr const char* kBoundarySweep = "boundary_sweep.csv";
inline constexpr const char* kLocalized = "localized.csv";
inline constexpr const char* kTransfer = "transfer.csv";
inline constexpr const char* kBootstrap = "bootstrap.csv";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kReport = "report.txt";
}  // namespace files

// Individual stages. Each reads its upstream artifacts from `out_dir` and
// throws Error{kDependency} naming the stage that must run first.
void stage_synth(const RunConfig& config, const std::string& out_dir);
void stage_ingest(const RunConfig& config, const std::string& out_dir);
void stage_fit_quantiles(const RunConfig& config, const std::string& out_dir);
void stage_replay(const RunConfig& config, const std::string& out_dir);
void stage_segment_safety(const RunConfig& config, const std::string& out_dir);
void stage_decide(const RunConfig& config, const std::string& out_dir);
void stage_diagnose_support(const RunConfig& config, const std::string& out_dir);
void stage_transfer(const RunConfig& config, const std::string& out_dir);
void stage_bootstrap(const RunConfig& config, const std::string& out_dir);
void stage_report(const RunConfig& config, const std::string& out_dir);

// The full pipeline: data -> quantiles -> replay -> segment certificates ->
// decision -> support diagnostics -> transfer -> optional bootstrap ->
// manifest. Outputs are a pure function of (config, seed).
void run_pipeline(const RunConfig& config, const std::string& out_dir);

}  // namespace floorcert

#endif  // FLOORCERT_PIPELINE_HPP_
