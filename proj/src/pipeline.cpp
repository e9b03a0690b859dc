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

#include "floorcert/pipeline.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "floorcert/error.hpp"
#include "floorcert/rng.hpp"
#include "floorcert/segment_safety.hpp"
#include "floorcert/support_diagnostics.hpp"
#include "floorcert/uncertainty_decision.hpp"
#include "json.hpp"

namespace floorcert {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string path_join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void require_artifact(const std::string& dir, const char* name,
                      const char* producing_stage) {
  if (!fs::exists(fs::path(dir) / name))
    throw Error(ErrorKind::kDependency,
                std::string(name) + " not found in '" + dir + "'; run stage '" +
                    producing_stage + "' first");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, "malformed JSON in '" + path + "': " + e.what());
  }
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

MicroMoney micro_from_number(double v, const char* what) {
  const double scaled = v * static_cast<double>(kMicroScale);
  if (!(scaled >= 0) || scaled > 9.0e18)
    throw Error(ErrorKind::kConfig,
                std::string(what) + " out of range: " + fmt_double(v));
  return static_cast<MicroMoney>(std::llround(scaled));
}

void apply_workers(const RunConfig& config) {
  if (config.workers > 0) omp_set_num_threads(config.workers);
}

// --- domain <-> json ------------------------------------------------------

json quantiles_to_json(const QuantileSet& q) {
  return json{{"q25_micro", q.q25},
              {"q50_micro", q.q50},
              {"q75_micro", q.q75},
              {"q25", format_micro(q.q25)},
              {"q50", format_micro(q.q50)},
              {"q75", format_micro(q.q75)},
              {"source_panel_id", q.source_panel_id},
              {"frozen", q.frozen},
              {"estimator", "order-statistic linear interpolation"}};
}

QuantileSet quantiles_from_json(const json& j) {
  QuantileSet q;
  q.q25 = j.at("q25_micro").get<MicroMoney>();
  q.q50 = j.at("q50_micro").get<MicroMoney>();
  q.q75 = j.at("q75_micro").get<MicroMoney>();
  q.source_panel_id = j.at("source_panel_id").get<std::string>();
  q.frozen = j.at("frozen").get<bool>();
  return q;
}

json summary_to_json(const ReplaySummary& s) {
  json daily = json::object();
  for (const auto& [day, lift] : s.daily_lifts) daily[day] = lift;
  return json{{"policy_id", s.policy_id},
              {"mean_yield", s.mean_yield},
              {"lift", s.lift},
              {"retained_share", s.retained_share},
              {"daily_lifts", daily}};
}

ReplaySummary summary_from_json(const json& j) {
  ReplaySummary s;
  s.policy_id = j.at("policy_id").get<std::string>();
  s.mean_yield = j.at("mean_yield").get<double>();
  s.lift = j.at("lift").get<double>();
  s.retained_share = j.at("retained_share").get<double>();
  for (const auto& [day, lift] : j.at("daily_lifts").items())
    s.daily_lifts[day] = lift.get<double>();
  return s;
}

// --- shared loading helpers ------------------------------------------------

Panel load_panel_file(const std::string& dir, const char* name,
                      const char* stage_hint) {
  require_artifact(dir, name, stage_hint);
  ParseOptions opts;
  opts.strict = true;  // canonical intermediates are always valid
  return parse_log(path_join(dir, name), SchemaMapping{}, opts);
}

QuantileSet load_quantiles(const std::string& dir) {
  require_artifact(dir, files::kQuantiles, "fit-quantiles");
  return quantiles_from_json(read_json(path_join(dir, files::kQuantiles)));
}

Catalog load_catalog(const RunConfig& config, const std::string& dir) {
  QuantileSet quantiles;
  std::vector<CatalogSpecEntry> spec;
  if (!config.catalog_file.empty()) {
    spec = parse_catalog_spec_file(config.catalog_file);
  } else if (config.catalog_preset == "paper19") {
    spec = paper19_spec();
  } else {
    throw Error(ErrorKind::kConfig,
                "unknown catalog preset '" + config.catalog_preset + "'");
  }
  bool needs = false;
  for (const auto& e : spec) {
    const PolicyFamily f = policy_family_from_name(e.family);
    needs = needs || f == PolicyFamily::kPositiveFloorQuantile ||
            f == PolicyFamily::kAllFloorQuantile ||
            f == PolicyFamily::kHybridQuantileMargin;
  }
  if (needs) quantiles = load_quantiles(dir);
  return build_catalog(spec, quantiles);
}

std::vector<ReplaySummary> load_summaries(const std::string& dir) {
  require_artifact(dir, files::kReplaySummaries, "replay");
  const json j = read_json(path_join(dir, files::kReplaySummaries));
  std::vector<ReplaySummary> out;
  for (const auto& item : j) out.push_back(summary_from_json(item));
  return out;
}

void update_decision(const std::string& dir, const char* key, const json& value) {
  require_artifact(dir, files::kDecision, "decide");
  json d = read_json(path_join(dir, files::kDecision));
  d[key] = value;
  write_json(path_join(dir, files::kDecision), d);
}

void write_panel_csv(const Panel& panel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  panel.write_csv(out);
}

}  // namespace

// --- configuration ----------------------------------------------------------

void RunConfig::validate() const {
  const bool has_input = !input_dev_path.empty();
  if (has_input == use_synth)
    throw Error(ErrorKind::kConfig,
                "exactly one of input.dev and synth must be configured");
  if (!(alpha > 0 && alpha < 1))
    throw Error(ErrorKind::kConfig, "alpha must be in (0,1)");
  if (lambda < 0)
    throw Error(ErrorKind::kConfig, "lambda must be nonnegative");
  if (tolerance < 0)
    throw Error(ErrorKind::kConfig, "tolerance must be nonnegative");
  if (use_synth) synth_config.validate();
}

RunConfig RunConfig::load(const std::string& path) {
  json j;
  {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open config '" + path + "'");
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig,
                  "malformed config '" + path + "': " + e.what());
    }
  }

  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.alpha = j.value("alpha", c.alpha);
    c.lambda = j.value("lambda", c.lambda);
    c.tolerance = j.value("tolerance", c.tolerance);
    if (j.contains("tolerance_grid"))
      c.tolerance_grid = j["tolerance_grid"].get<std::vector<double>>();
    c.kappa = j.value("kappa", c.kappa);
    c.localized_draws = j.value("localized_draws", c.localized_draws);
    c.topk = j.value("topk", c.topk);
    if (j.contains("h_grid")) {
      c.h_grid.clear();
      for (const auto& v : j["h_grid"])
        c.h_grid.push_back(micro_from_number(v.get<double>(), "h_grid entry"));
    }
    if (j.contains("q_grid")) c.q_grid = j["q_grid"].get<std::vector<double>>();
    if (j.contains("daily_baseline")) {
      const std::string mode = j["daily_baseline"].get<std::string>();
      if (mode == "day-local")
        c.replay_options.daily_baseline = ReplayOptions::DailyBaseline::kDayLocal;
      else if (mode == "global")
        c.replay_options.daily_baseline = ReplayOptions::DailyBaseline::kGlobal;
      else
        throw Error(ErrorKind::kConfig,
                    "daily_baseline must be 'day-local' or 'global'");
    }

    if (j.contains("input")) {
      const json& in = j["input"];
      c.input_dev_path = in.value("dev", "");
      c.input_holdout_path = in.value("holdout", "");
      const std::string delim = in.value("delimiter", ",");
      if (delim == "\\t" || delim == "tab")
        c.delimiter = '\t';
      else if (delim.size() == 1)
        c.delimiter = delim[0];
      else
        throw Error(ErrorKind::kConfig, "delimiter must be a single character");
      c.strict = in.value("strict", true);
      if (in.value("schema_preset", "") == "ipinyou")
        c.schema = SchemaMapping::ipinyou();
      if (in.contains("schema")) {
        const json& s = in["schema"];
        c.schema.day = s.value("day", c.schema.day);
        c.schema.advertiser = s.value("advertiser", c.schema.advertiser);
        c.schema.exchange = s.value("exchange", c.schema.exchange);
        c.schema.region = s.value("region", c.schema.region);
        c.schema.category = s.value("category", c.schema.category);
        c.schema.floor = s.value("floor", c.schema.floor);
        c.schema.bid = s.value("bid", c.schema.bid);
        c.schema.payment = s.value("payment", c.schema.payment);
        c.schema.filled = s.value("filled", c.schema.filled);
      }
    }
    if (j.contains("synth")) {
      const json& s = j["synth"];
      c.use_synth = true;
      synth::GeneratorConfig& g = c.synth_config;
      g.seed = s.value("seed", c.seed);
      g.n_rows = s.value("n_rows", g.n_rows);
      g.n_days = s.value("n_days", g.n_days);
      g.advertisers = s.value("advertisers", g.advertisers);
      g.exchanges = s.value("exchanges", g.exchanges);
      g.regions = s.value("regions", g.regions);
      g.categories = s.value("categories", g.categories);
      g.zero_floor_prob = s.value("zero_floor_prob", g.zero_floor_prob);
      g.floor_log_location = s.value("floor_log_location", g.floor_log_location);
      g.floor_log_scale = s.value("floor_log_scale", g.floor_log_scale);
      g.overshoot_log_location =
          s.value("overshoot_log_location", g.overshoot_log_location);
      g.overshoot_log_scale = s.value("overshoot_log_scale", g.overshoot_log_scale);
      g.fill_slope = s.value("fill_slope", g.fill_slope);
      g.fill_intercept = s.value("fill_intercept", g.fill_intercept);
      g.payment_fraction = s.value("payment_fraction", g.payment_fraction);
      c.synth_holdout_rows = s.value("holdout_rows", c.synth_holdout_rows);
    }
    if (j.contains("catalog")) {
      c.catalog_preset = j["catalog"].value("preset", c.catalog_preset);
      c.catalog_file = j["catalog"].value("file", c.catalog_file);
    }
    if (j.contains("segments")) {
      const json& s = j["segments"];
      if (s.contains("dimensions")) {
        c.segment_dimensions.clear();
        for (const auto& d : s["dimensions"])
          c.segment_dimensions.push_back(
              segment_dimension_from_name(d.get<std::string>()));
      }
      c.segment_min_rows = s.value("min_rows", c.segment_min_rows);
      if (s.contains("gap_bucket_edges")) {
        c.gap_bucket_edges.clear();
        for (const auto& v : s["gap_bucket_edges"])
          c.gap_bucket_edges.push_back(
              micro_from_number(v.get<double>(), "gap bucket edge"));
      }
      c.L_s = s.value("L_s", c.L_s);
      c.cover_radius = s.value("cover_radius", c.cover_radius);
      if (s.contains("cover_radius_grid"))
        c.cover_radius_grid = s["cover_radius_grid"].get<std::vector<double>>();
    }
    if (j.contains("bootstrap")) {
      const json& b = j["bootstrap"];
      c.bootstrap_draws = b.value("draws", c.bootstrap_draws);
      const std::string ranking = b.value("ranking", "full-replay");
      if (ranking == "full-replay")
        c.bootstrap_ranking = BootstrapRanking::kFullReplay;
      else if (ranking == "lcb")
        c.bootstrap_ranking = BootstrapRanking::kLcb;
      else
        throw Error(ErrorKind::kConfig,
                    "bootstrap ranking must be 'full-replay' or 'lcb'");
      const std::string unit = b.value("unit", "day");
      if (unit == "day")
        c.bootstrap_unit = BootstrapUnit::kDay;
      else if (unit == "row")
        c.bootstrap_unit = BootstrapUnit::kRow;
      else
        throw Error(ErrorKind::kConfig, "bootstrap unit must be 'day' or 'row'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig,
                std::string("config field has the wrong type: ") + e.what());
  }

  if (c.h_grid.empty()) c.h_grid = default_h_grid();
  if (c.q_grid.empty()) c.q_grid = default_q_grid();
  c.validate();
  return c;
}

std::string RunConfig::to_json_string() const {
  json j;
  j["seed"] = seed;
  j["workers"] = workers;
  j["alpha"] = alpha;
  j["lambda"] = lambda;
  j["tolerance"] = tolerance;
  j["tolerance_grid"] = tolerance_grid;
  j["kappa"] = kappa;
  j["localized_draws"] = localized_draws;
  j["topk"] = topk;
  {
    json h = json::array();
    for (MicroMoney v : h_grid) h.push_back(format_micro(v));
    j["h_grid"] = h;
  }
  j["q_grid"] = q_grid;
  j["daily_baseline"] =
      replay_options.daily_baseline == ReplayOptions::DailyBaseline::kDayLocal
          ? "day-local"
          : "global";
  if (use_synth) {
    const synth::GeneratorConfig& g = synth_config;
    j["synth"] = json{{"seed", g.seed},
                      {"n_rows", g.n_rows},
                      {"n_days", g.n_days},
                      {"advertisers", g.advertisers},
                      {"exchanges", g.exchanges},
                      {"regions", g.regions},
                      {"categories", g.categories},
                      {"zero_floor_prob", g.zero_floor_prob},
                      {"floor_log_location", g.floor_log_location},
                      {"floor_log_scale", g.floor_log_scale},
                      {"overshoot_log_location", g.overshoot_log_location},
                      {"overshoot_log_scale", g.overshoot_log_scale},
                      {"fill_slope", g.fill_slope},
                      {"fill_intercept", g.fill_intercept},
                      {"payment_fraction", g.payment_fraction},
                      {"holdout_rows", synth_holdout_rows}};
  } else {
    j["input"] = json{{"dev", input_dev_path},
                      {"holdout", input_holdout_path},
                      {"delimiter", std::string(1, delimiter)},
                      {"strict", strict},
                      {"schema",
                       json{{"day", schema.day},
                            {"advertiser", schema.advertiser},
                            {"exchange", schema.exchange},
                            {"region", schema.region},
                            {"category", schema.category},
                            {"floor", schema.floor},
                            {"bid", schema.bid},
                            {"payment", schema.payment},
                            {"filled", schema.filled}}}};
  }
  j["catalog"] = json{{"preset", catalog_preset}, {"file", catalog_file}};
  {
    json dims = json::array();
    for (SegmentDimension d : segment_dimensions)
      dims.push_back(segment_dimension_name(d));
    json edges = json::array();
    for (MicroMoney e : gap_bucket_edges) edges.push_back(format_micro(e));
    j["segments"] = json{{"dimensions", dims},
                         {"min_rows", segment_min_rows},
                         {"gap_bucket_edges", edges},
                         {"L_s", L_s},
                         {"cover_radius", cover_radius},
                         {"cover_radius_grid", cover_radius_grid}};
  }
  j["bootstrap"] = json{
      {"draws", bootstrap_draws},
      {"ranking",
       bootstrap_ranking == BootstrapRanking::kFullReplay ? "full-replay" : "lcb"},
      {"unit", bootstrap_unit == BootstrapUnit::kDay ? "day" : "row"}};
  return j.dump(2);
}

// --- stages -----------------------------------------------------------------

void stage_synth(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  if (!config.use_synth)
    throw Error(ErrorKind::kConfig, "config has no synth section");
  fs::create_directories(out_dir);

  const Panel dev = synth::generate_log(config.synth_config);
  write_panel_csv(dev, path_join(out_dir, files::kPanel));

  // The holdout panel comes from the same generator on a shifted seed, so
  // frozen transfer always has an out-of-time panel to replay.
  synth::GeneratorConfig holdout_cfg = config.synth_config;
  holdout_cfg.seed = SplitMix64::mix(config.synth_config.seed ^ 0x0c0ffee0);
  holdout_cfg.n_rows = config.synth_holdout_rows > 0
                           ? config.synth_holdout_rows
                           : std::max<std::int64_t>(1, config.synth_config.n_rows / 2);
  const Panel holdout = synth::generate_log(holdout_cfg);
  write_panel_csv(holdout, path_join(out_dir, files::kHoldout));
}

void stage_ingest(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  if (config.use_synth) {
    stage_synth(config, out_dir);
    return;
  }
  fs::create_directories(out_dir);
  ParseOptions opts;
  opts.delimiter = config.delimiter;
  opts.strict = config.strict;

  IngestStats dev_stats;
  const Panel dev = parse_log(config.input_dev_path, config.schema, opts, &dev_stats);
  write_panel_csv(dev, path_join(out_dir, files::kPanel));

  json report{{"dev",
               json{{"rows_read", dev_stats.rows_read},
                    {"rows_dropped", dev_stats.rows_dropped},
                    {"first_drop_reason", dev_stats.first_drop_reason},
                    {"rows_kept", dev.size()}}}};
  if (!config.input_holdout_path.empty()) {
    IngestStats ho_stats;
    const Panel holdout =
        parse_log(config.input_holdout_path, config.schema, opts, &ho_stats);
    write_panel_csv(holdout, path_join(out_dir, files::kHoldout));
    report["holdout"] = json{{"rows_read", ho_stats.rows_read},
                             {"rows_dropped", ho_stats.rows_dropped},
                             {"first_drop_reason", ho_stats.first_drop_reason},
                             {"rows_kept", holdout.size()}};
  }
  write_json(path_join(out_dir, files::kIngestReport), report);
}

void stage_fit_quantiles(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  // Identify the source by its content so the anchors stay traceable to
  // the cached panel even if the configuration is edited between stages.
  const std::string source_id = "panel-rows-" + std::to_string(panel.size()) +
                                "-days-" + std::to_string(panel.days().size());
  const QuantileSet q = fit_quantiles(panel, source_id);
  write_json(path_join(out_dir, files::kQuantiles), quantiles_to_json(q));
}

void stage_replay(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  const Catalog catalog = load_catalog(config, out_dir);
  const auto summaries =
      replay_catalog(panel, catalog, nullptr, config.replay_options);

  json out = json::array();
  for (const auto& s : summaries) out.push_back(summary_to_json(s));
  write_json(path_join(out_dir, files::kReplaySummaries), out);

  std::ostringstream table;
  table << "policy_id,lift,mean_yield,retained_share,day,daily_lift\n";
  for (const auto& s : summaries)
    for (const auto& [day, lift] : s.daily_lifts)
      table << s.policy_id << ',' << fmt_double(s.lift) << ','
            << fmt_double(s.mean_yield) << ',' << fmt_double(s.retained_share)
            << ',' << day << ',' << fmt_double(lift) << '\n';
  write_text(path_join(out_dir, files::kReplayTable), table.str());
}

void stage_segment_safety(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  if (config.segment_dimensions.empty())
    throw Error(ErrorKind::kConfig, "no segment dimensions configured");
  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  const Catalog catalog = load_catalog(config, out_dir);
  const SegmentMap segmap =
      partition_segments(panel, config.segment_dimensions,
                         config.segment_min_rows, config.gap_bucket_edges);

  std::ostringstream table;
  table << "policy_id,dimension,value,n_rows,active_days,lift,se,lcb,"
           "lcb_unadjusted\n";
  json certificates = json::array();

  for (std::size_t p = 1; p < catalog.policies.size(); ++p) {
    const Policy& policy = catalog.policies[p];
    const auto bounds = segment_bounds(panel, policy, catalog.quantiles, segmap,
                                       config.alpha, config.replay_options);
    const auto cert =
        nonharm_certificate(bounds, policy.id, config.L_s, config.cover_radius);

    std::vector<double> lcbs;
    json segs = json::array();
    for (const SegmentBound& b : cert.segments) {
      lcbs.push_back(b.lcb);
      table << policy.id << ',' << segment_dimension_name(b.key.dimension) << ','
            << b.key.value << ',' << b.n_rows << ',' << b.active_days << ','
            << fmt_double(b.lift_hat) << ',' << fmt_double(b.se) << ','
            << fmt_double(b.lcb) << ',' << fmt_double(b.lcb_unadjusted) << '\n';
      segs.push_back(json{{"dimension", segment_dimension_name(b.key.dimension)},
                          {"value", b.key.value},
                          {"n_rows", b.n_rows},
                          {"active_days", b.active_days},
                          {"lift", b.lift_hat},
                          {"se", b.se},
                          {"lcb", b.lcb},
                          {"lcb_unadjusted", b.lcb_unadjusted}});
    }
    json sensitivity = json::array();
    if (!lcbs.empty())
      for (const auto& [radius, count] :
           coverage_sensitivity(lcbs, config.L_s, config.cover_radius_grid))
        sensitivity.push_back(json{{"cover_radius", radius}, {"certified", count}});

    json uncovered = json::array();
    for (const SegmentKey& k : cert.uncovered)
      uncovered.push_back(json{{"dimension", segment_dimension_name(k.dimension)},
                               {"value", k.value}});

    certificates.push_back(json{{"policy_id", cert.policy_id},
                                {"alpha", cert.alpha},
                                {"K", cert.K},
                                {"eta", cert.K > 0 ? json(cert.eta) : json()},
                                {"L_s", cert.L_s},
                                {"cover_radius", cert.cover_radius},
                                {"uniform_margin",
                                 cert.K > 0 ? json(cert.uniform_margin) : json()},
                                {"certified", cert.certified},
                                {"boundary", cert.boundary},
                                {"nonnegative_count", cert.nonnegative_count},
                                {"reason", cert.reason},
                                {"segments", segs},
                                {"coverage_sensitivity", sensitivity},
                                {"uncovered", uncovered}});
  }

  write_text(path_join(out_dir, files::kSegments), table.str());
  write_json(path_join(out_dir, files::kSegmentCertificates),
             json{{"alpha", config.alpha},
                  {"L_s", config.L_s},
                  {"cover_radius", config.cover_radius},
                  {"policies", certificates}});
}

void stage_decide(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const auto summaries = load_summaries(out_dir);
  const auto bounds = simultaneous_bounds(summaries, config.alpha, config.lambda);

  std::map<std::string, bool> segment_pass;
  json segments_doc;
  if (!config.segment_dimensions.empty()) {
    require_artifact(out_dir, files::kSegmentCertificates, "segment-safety");
    segments_doc = read_json(path_join(out_dir, files::kSegmentCertificates));
    for (const auto& cert : segments_doc.at("policies"))
      segment_pass[cert.at("policy_id").get<std::string>()] =
          cert.at("certified").get<bool>();
  }

  const DecisionObject decision = decide(bounds, config.tolerance, segment_pass);
  const auto sweep = tolerance_sweep(bounds, config.tolerance_grid, segment_pass);

  json jbounds = json::array();
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const PolicyBounds& b = bounds[i];
    jbounds.push_back(json{{"policy_id", b.policy_id},
                           {"baseline", b.baseline},
                           {"lift_hat", b.lift_hat},
                           {"se_daily", b.se_daily},
                           {"lcb", b.lcb},
                           {"ucb", b.ucb},
                           {"lcb_support", b.lcb_support},
                           {"z_crit", b.z_crit},
                           {"retained_share", summaries[i].retained_share},
                           {"mean_yield", summaries[i].mean_yield}});
  }

  json gate = json::object();
  for (const auto& [id, g] : decision.gate_report)
    gate[id] = json{{"segment_pass", g.segment_pass},
                    {"positive_lcb_support", g.positive_lcb_support},
                    {"label", g.label}};

  json jsweep = json::array();
  for (const auto& [rho, size] : sweep)
    jsweep.push_back(json{{"tolerance", rho}, {"shortlist_size", size}});

  // Response-gap planning diagnostic on the two leading support-adjusted
  // lower bounds.
  json response_gap;
  {
    const PolicyBounds* first = nullptr;
    const PolicyBounds* second = nullptr;
    for (const auto& b : bounds) {
      if (b.baseline) continue;
      if (!first || b.lcb_support > first->lcb_support) {
        second = first;
        first = &b;
      } else if (!second || b.lcb_support > second->lcb_support) {
        second = &b;
      }
    }
    if (first && second) {
      const auto gap =
          response_gap_threshold(first->lcb_support, second->lcb_support);
      response_gap = json{{"leader", first->policy_id},
                          {"runner_up", second->policy_id},
                          {"margin", gap.margin},
                          {"threshold", gap.threshold},
                          {"interpretation", gap.interpretation}};
    }
  }

  json d{{"alpha", config.alpha},
         {"lambda", config.lambda},
         {"tolerance", config.tolerance},
         {"leader", decision.leader_id},
         {"bounds", jbounds},
         {"certified", decision.certified},
         {"dominated", decision.dominated},
         {"unresolved", decision.unresolved},
         {"shortlist", decision.shortlist},
         {"gate_report", gate},
         {"tolerance_sweep", jsweep},
         {"rule_comparison",
          json{{"point_estimate", point_estimate_winner(bounds)},
               {"lower_bound", lcb_winner(bounds)},
               {"support_aware_shortlist", decision.shortlist}}},
         {"response_gap", response_gap}};
  if (!segments_doc.is_null()) d["segments"] = segments_doc;
  write_json(path_join(out_dir, files::kDecision), d);
}

void stage_diagnose_support(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  const Catalog catalog = load_catalog(config, out_dir);

  require_artifact(out_dir, files::kDecision, "decide");
  const json decision = read_json(path_join(out_dir, files::kDecision));
  std::vector<PolicyBounds> bounds;
  for (const auto& jb : decision.at("bounds")) {
    PolicyBounds b;
    b.policy_id = jb.at("policy_id").get<std::string>();
    b.baseline = jb.at("baseline").get<bool>();
    b.lift_hat = jb.at("lift_hat").get<double>();
    b.se_daily = jb.at("se_daily").get<double>();
    b.lcb = jb.at("lcb").get<double>();
    b.ucb = jb.at("ucb").get<double>();
    b.lcb_support = jb.at("lcb_support").get<double>();
    b.z_crit = jb.at("z_crit").get<double>();
    bounds.push_back(std::move(b));
  }

  const auto sweep =
      boundary_sweep(panel, catalog, config.h_grid, config.kappa, bounds);
  std::ostringstream btable;
  btable << "policy_id,h,n_boundary,penalty,penalized_lcb\n";
  for (const auto& d : sweep)
    btable << d.policy_id << ',' << format_micro(d.window_h) << ','
           << d.n_boundary << ',' << fmt_double(d.penalty) << ','
           << fmt_double(d.penalized_lcb) << '\n';
  write_text(path_join(out_dir, files::kBoundarySweep), btable.str());

  const auto selection = localized_selection(panel, catalog, config.q_grid,
                                             config.localized_draws, config.seed);
  std::ostringstream ltable;
  ltable << "policy_id,q,radius,mass,localized_lift,n_contrast,rank,"
            "winner_frequency\n";
  for (const auto& per : selection.per_q) {
    for (std::size_t r = 0; r < per.ranked.size(); ++r) {
      const LocalizedEstimate& e = per.ranked[r];
      ltable << e.policy_id << ',' << fmt_double(per.q) << ','
             << format_micro(e.radius) << ',' << fmt_double(e.boundary_mass)
             << ',' << fmt_double(e.localized_lift) << ',' << e.n_contrast << ','
             << (r + 1) << ',' << fmt_double(per.winner_frequency.at(e.policy_id))
             << '\n';
    }
  }
  write_text(path_join(out_dir, files::kLocalized), ltable.str());
}

void stage_transfer(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const Panel holdout = load_panel_file(out_dir, files::kHoldout, "ingest");
  const Catalog catalog = load_catalog(config, out_dir);
  const auto summaries = load_summaries(out_dir);

  const TransferReport report = frozen_transfer(catalog, holdout, summaries,
                                                config.topk, config.replay_options);

  std::ostringstream table;
  table << "policy_id,dev_lift,holdout_lift,holdout_retained_share\n";
  json rows = json::array();
  for (std::size_t i = 0; i < report.policy_ids.size(); ++i) {
    table << report.policy_ids[i] << ',' << fmt_double(report.dev_lifts[i]) << ','
          << fmt_double(report.holdout_lifts[i]) << ','
          << fmt_double(report.holdout_retained[i]) << '\n';
    rows.push_back(json{{"policy_id", report.policy_ids[i]},
                        {"dev_lift", report.dev_lifts[i]},
                        {"holdout_lift", report.holdout_lifts[i]},
                        {"holdout_retained_share", report.holdout_retained[i]}});
  }
  write_text(path_join(out_dir, files::kTransfer), table.str());
  update_decision(out_dir, "transfer",
                  json{{"spearman", report.spearman},
                       {"k", report.k},
                       {"topk_overlap", report.topk_overlap},
                       {"holdout_leader", report.holdout_leader},
                       {"holdout_rows", holdout.size()},
                       {"policies", rows}});
}

void stage_bootstrap(const RunConfig& config, const std::string& out_dir) {
  apply_workers(config);
  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  const Catalog catalog = load_catalog(config, out_dir);
  const int draws = config.bootstrap_draws > 0 ? config.bootstrap_draws : 1000;

  const BootstrapResult result =
      day_bootstrap(panel, catalog, draws, config.seed, config.bootstrap_ranking,
                    config.bootstrap_unit, config.alpha);

  std::ostringstream table;
  table << "policy_id,winner_frequency\n";
  json freq = json::object();
  for (const auto& [id, f] : result.winner_frequency) {
    table << id << ',' << fmt_double(f) << '\n';
    freq[id] = f;
  }
  write_text(path_join(out_dir, files::kBootstrap), table.str());
  update_decision(
      out_dir, "bootstrap",
      json{{"draws", result.draws},
           {"ranking", result.ranking == BootstrapRanking::kFullReplay
                           ? "full-replay"
                           : "lcb"},
           {"unit", result.unit == BootstrapUnit::kDay ? "day" : "row"},
           {"winner_frequency", freq}});
}

void stage_report(const RunConfig& config, const std::string& out_dir) {
  (void)config;
  require_artifact(out_dir, files::kDecision, "decide");
  const json d = read_json(path_join(out_dir, files::kDecision));

  // Plot-ready panels. The report renders decision.json; it never
  // recomputes statistics.
  {
    std::ostringstream fig;
    fig << "policy_id,lift,retained_share\n";
    for (const auto& b : d.at("bounds"))
      if (!b.at("baseline").get<bool>())
        fig << b.at("policy_id").get<std::string>() << ','
            << fmt_double(b.at("lift_hat").get<double>()) << ','
            << fmt_double(b.at("retained_share").get<double>()) << '\n';
    write_text(path_join(out_dir, "fig_frontier.csv"), fig.str());
  }
  {
    std::ostringstream fig;
    fig << "policy_id,lift_hat,lcb,ucb,lcb_support,label\n";
    for (const auto& b : d.at("bounds")) {
      const std::string id = b.at("policy_id").get<std::string>();
      if (b.at("baseline").get<bool>()) continue;
      fig << id << ',' << fmt_double(b.at("lift_hat").get<double>()) << ','
          << fmt_double(b.at("lcb").get<double>()) << ','
          << fmt_double(b.at("ucb").get<double>()) << ','
          << fmt_double(b.at("lcb_support").get<double>()) << ','
          << d.at("gate_report").at(id).at("label").get<std::string>() << '\n';
    }
    write_text(path_join(out_dir, "fig_bounds.csv"), fig.str());
  }
  if (d.contains("transfer")) {
    std::ostringstream fig;
    fig << "policy_id,dev_lift,holdout_lift\n";
    for (const auto& row : d.at("transfer").at("policies"))
      fig << row.at("policy_id").get<std::string>() << ','
          << fmt_double(row.at("dev_lift").get<double>()) << ','
          << fmt_double(row.at("holdout_lift").get<double>()) << '\n';
    write_text(path_join(out_dir, "fig_transfer.csv"), fig.str());
  }
  if (d.contains("segments")) {
    const std::string leader = d.at("leader").get<std::string>();
    std::ostringstream fig;
    fig << "dimension,value,lift,lcb,lcb_unadjusted\n";
    for (const auto& cert : d.at("segments").at("policies")) {
      if (cert.at("policy_id").get<std::string>() != leader) continue;
      for (const auto& s : cert.at("segments"))
        fig << s.at("dimension").get<std::string>() << ','
            << s.at("value").get<std::string>() << ','
            << fmt_double(s.at("lift").get<double>()) << ','
            << fmt_double(s.at("lcb").get<double>()) << ','
            << fmt_double(s.at("lcb_unadjusted").get<double>()) << '\n';
    }
    write_text(path_join(out_dir, "fig_segments.csv"), fig.str());
  }

  std::ostringstream text;
  text << "decision summary\n";
  text << "  leader:     " << d.at("leader").get<std::string>() << "\n";
  text << "  certified:  " << d.at("certified").size() << "\n";
  text << "  dominated:  " << d.at("dominated").size() << "\n";
  text << "  unresolved: " << d.at("unresolved").size() << "\n";
  text << "  shortlist:";
  for (const auto& id : d.at("shortlist"))
    text << ' ' << id.get<std::string>();
  text << "\n";
  if (d.contains("rule_comparison")) {
    text << "rule comparison\n";
    text << "  point-estimate winner: "
         << d.at("rule_comparison").at("point_estimate").get<std::string>() << "\n";
    text << "  lower-bound winner:    "
         << d.at("rule_comparison").at("lower_bound").get<std::string>() << "\n";
  }
  if (d.contains("transfer")) {
    text << "transfer\n";
    text << "  spearman:     "
         << fmt_double(d.at("transfer").at("spearman").get<double>()) << "\n";
    text << "  top-" << d.at("transfer").at("k").get<int>() << " overlap: "
         << d.at("transfer").at("topk_overlap").get<int>() << "\n";
    text << "  holdout lead: "
         << d.at("transfer").at("holdout_leader").get<std::string>() << "\n";
  }
  if (d.contains("bootstrap")) {
    text << "bootstrap\n  draws: " << d.at("bootstrap").at("draws").get<int>()
         << "\n";
  }
  write_text(path_join(out_dir, files::kReport), text.str());
}

void run_pipeline(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  apply_workers(config);
  fs::create_directories(out_dir);

  if (config.use_synth)
    stage_synth(config, out_dir);
  else
    stage_ingest(config, out_dir);

  // Quantile anchors are fit whenever any catalog policy references them;
  // otherwise an unfrozen placeholder is recorded.
  bool catalog_needs_quantiles = false;
  {
    const auto spec = config.catalog_file.empty()
                          ? paper19_spec()
                          : parse_catalog_spec_file(config.catalog_file);
    for (const auto& e : spec) {
      const PolicyFamily f = policy_family_from_name(e.family);
      catalog_needs_quantiles = catalog_needs_quantiles ||
                                f == PolicyFamily::kPositiveFloorQuantile ||
                                f == PolicyFamily::kAllFloorQuantile ||
                                f == PolicyFamily::kHybridQuantileMargin;
    }
  }
  if (catalog_needs_quantiles) {
    stage_fit_quantiles(config, out_dir);
  } else {
    try {
      stage_fit_quantiles(config, out_dir);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDomain) throw;
      write_json(path_join(out_dir, files::kQuantiles),
                 quantiles_to_json(QuantileSet{}));
    }
  }

  stage_replay(config, out_dir);
  if (!config.segment_dimensions.empty()) stage_segment_safety(config, out_dir);
  stage_decide(config, out_dir);
  stage_diagnose_support(config, out_dir);
  if (fs::exists(fs::path(out_dir) / files::kHoldout))
    stage_transfer(config, out_dir);
  if (config.bootstrap_draws > 0) stage_bootstrap(config, out_dir);

  const Panel panel = load_panel_file(out_dir, files::kPanel, "ingest");
  const std::string config_echo = config.to_json_string();
  json manifest{
      {"tool", "floorcert"},
      {"version", "0.1.0"},
      {"config_hash", hex64(fnv1a64(config_echo))},
      {"seed", config.seed},
      {"config", json::parse(config_echo)},
      {"panel", json{{"rows", panel.size()},
                     {"days", panel.days().size()}}},
      {"flags",
       json{{"daily_baseline", config.replay_options.daily_baseline ==
                                       ReplayOptions::DailyBaseline::kDayLocal
                                   ? "day-local"
                                   : "global"},
            {"quantile_estimator", "order-statistic linear interpolation"},
            {"retention_comparison", "exact integer micro units"},
            {"strict_ingestion", config.strict},
            {"kappa", config.kappa},
            {"lambda", config.lambda}}}};
  if (fs::exists(fs::path(out_dir) / files::kHoldout)) {
    const Panel holdout =
        load_panel_file(out_dir, files::kHoldout, "ingest");
    manifest["holdout"] =
        json{{"rows", holdout.size()}, {"days", holdout.days().size()}};
  }
  write_json(path_join(out_dir, files::kManifest), manifest);
}

}  // namespace floorcert
