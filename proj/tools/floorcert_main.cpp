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

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "floorcert/error.hpp"
#include "floorcert/pipeline.hpp"
#include "json.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool strict = false;
  bool lenient = false;
};

floorcert::RunConfig load_config(const CliOptions& cli) {
  floorcert::RunConfig config = floorcert::RunConfig::load(cli.config_path);
  if (cli.workers > 0) config.workers = cli.workers;
  if (cli.seed_set) {
    config.seed = cli.seed;
    config.synth_config.seed = cli.seed;
  }
  if (cli.strict) config.strict = true;
  if (cli.lenient) config.strict = false;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floorcert: replay and certification engine for offline "
               "reserve-price policy selection"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  CliOptions cli;
  app.add_option("--config", cli.config_path, "run configuration (JSON)")
      ->required();
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_option("--workers", cli.workers, "worker threads (0 = default)")
      ->envname("FLOORCERT_WORKERS");
  app.add_option("--seed", cli.seed, "override the configured seed")
      ->each([&](const std::string&) { cli.seed_set = true; });
  app.add_flag("--strict", cli.strict, "abort on the first invalid input row");
  app.add_flag("--lenient", cli.lenient, "drop invalid input rows with a count");

  using Stage = std::function<void(const floorcert::RunConfig&, const std::string&)>;
  struct StageEntry {
    const char* name;
    const char* help;
    Stage fn;
  };
  const StageEntry stages[] = {
      {"run", "full pipeline: data to decision object and diagnostics",
       [](const auto& c, const auto& d) { floorcert::run_pipeline(c, d); }},
      {"ingest", "parse and validate the configured input panels",
       floorcert::stage_ingest},
      {"synth", "generate seeded synthetic dev and holdout panels",
       floorcert::stage_synth},
      {"fit-quantiles", "fit and freeze the positive-floor quantile anchors",
       floorcert::stage_fit_quantiles},
      {"replay", "replay the catalog and write per-policy summaries",
       floorcert::stage_replay},
      {"segment-safety", "per-segment bounds and non-harm certificates",
       floorcert::stage_segment_safety},
      {"decide", "simultaneous bounds and the certified/dominated partition",
       floorcert::stage_decide},
      {"diagnose-support", "boundary-window sweep and q-localized selection",
       floorcert::stage_diagnose_support},
      {"transfer", "frozen replay on the holdout panel with rank stability",
       floorcert::stage_transfer},
      {"bootstrap", "resampled winner frequencies", floorcert::stage_bootstrap},
      {"report", "render decision.json into text and plot-ready tables",
       floorcert::stage_report},
  };

  std::string selected;
  for (const auto& entry : stages) {
    CLI::App* sub = app.add_subcommand(entry.name, entry.help);
    sub->callback(
        [&selected, name = std::string(entry.name)]() { selected = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const floorcert::RunConfig config = load_config(cli);
    for (const auto& entry : stages) {
      if (selected == entry.name) {
        entry.fn(config, cli.out_dir);
        return 0;
      }
    }
    return 1;
  } catch (const floorcert::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", e.kind_name()},
                                           {"stage", selected},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", "internal"},
                                           {"stage", selected},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  }
}
