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

#include "floorcert/synth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "floorcert/error.hpp"
#include "floorcert/reference_replay.hpp"
#include "floorcert/rng.hpp"
#include "floorcert/uncertainty_decision.hpp"

namespace floorcert::synth {

namespace {

constexpr std::int64_t kGenChunkRows = 8192;

// Distinct stream families for panel rows vs oracle populations, so a
// panel and its ground-truth population never share draws.
constexpr std::uint64_t kPanelTag = 0;
constexpr std::uint64_t kOracleTag = 1;

std::uint64_t stream_id(std::uint64_t tag, std::int64_t chunk) {
  return (tag << 48) + static_cast<std::uint64_t>(chunk);
}

int label_width(int cardinality) {
  int w = 1;
  for (int v = cardinality - 1; v >= 10; v /= 10) ++w;
  return std::max(w, 2);
}

std::string padded_label(const char* prefix, int value, int width) {
  std::string digits = std::to_string(value);
  digits.insert(0, width - static_cast<int>(digits.size()), '0');
  return prefix + digits;
}

Money clamp_price(double v) {
  if (!(v >= 0)) return 0;
  if (v >= static_cast<double>(kMaxLoggedMoney))
    return kMaxLoggedMoney;
  return static_cast<Money>(std::llround(v));
}

struct RawRow {
  Money floor, bid, payment;
  bool filled;
  int adv, exch, reg, cat;
};

// One row from its chunk stream. Every row consumes a fixed number of
// draws so the layout never depends on branch outcomes.
RawRow draw_row(const GeneratorConfig& cfg, SplitMix64& rng) {
  const double u_zero = rng.next_double();
  const double z_floor = normal_quantile(rng.next_open01());
  const double z_over = normal_quantile(rng.next_open01());
  const double u_fill = rng.next_double();
  const std::uint64_t u_adv = rng.next_below(cfg.advertisers);
  const std::uint64_t u_exch = rng.next_below(cfg.exchanges);
  const std::uint64_t u_reg = rng.next_below(cfg.regions);
  const std::uint64_t u_cat =
      cfg.categories > 0 ? rng.next_below(cfg.categories) : 0;

  RawRow r{};
  if (u_zero < cfg.zero_floor_prob) {
    r.floor = 0;
  } else {
    r.floor = std::max<Money>(
        1, clamp_price(std::exp(cfg.floor_log_location + cfg.floor_log_scale * z_floor)));
  }
  const Money overshoot =
      clamp_price(std::exp(cfg.overshoot_log_location + cfg.overshoot_log_scale * z_over));
  r.bid = std::min<Money>(r.floor + overshoot, kMaxLoggedMoney);

  const double gap = static_cast<double>(r.bid - r.floor);
  const double logit = cfg.fill_intercept + cfg.fill_slope * gap;
  const double p_fill = 1.0 / (1.0 + std::exp(-logit));
  // A fill requires a clearing bid regardless of the logistic draw.
  r.filled = r.bid >= r.floor && u_fill < p_fill;
  r.payment = r.filled
                  ? r.floor + std::llround(cfg.payment_fraction *
                                           static_cast<double>(r.bid - r.floor))
                  : 0;
  r.adv = static_cast<int>(u_adv);
  r.exch = static_cast<int>(u_exch);
  r.reg = static_cast<int>(u_reg);
  r.cat = static_cast<int>(u_cat);
  return r;
}

}  // namespace

void GeneratorConfig::validate() const {
  const auto check = [](bool ok, const char* why) {
    if (!ok) throw Error(ErrorKind::kConfig, std::string("synth config: ") + why);
  };
  check(n_rows >= 1, "n_rows must be positive");
  check(n_days >= 2, "n_days must be at least 2");
  check(advertisers >= 1 && exchanges >= 1 && regions >= 1 && categories >= 0,
        "segment cardinalities must be positive");
  check(zero_floor_prob >= 0 && zero_floor_prob <= 1,
        "zero_floor_prob must be in [0,1]");
  check(floor_log_scale > 0 && overshoot_log_scale > 0,
        "lognormal scales must be positive");
  check(payment_fraction >= 0 && payment_fraction <= 1,
        "payment_fraction must be in [0,1]");
  check(std::isfinite(fill_slope) && std::isfinite(fill_intercept),
        "fill model parameters must be finite");
}

Panel generate_log(const GeneratorConfig& config) {
  config.validate();
  const std::int64_t n = config.n_rows;
  const std::int64_t n_chunks = (n + kGenChunkRows - 1) / kGenChunkRows;
  const int day_width = label_width(config.n_days);
  const int adv_width = label_width(config.advertisers);
  const int exch_width = label_width(config.exchanges);
  const int reg_width = label_width(config.regions);
  const int cat_width = config.categories > 0 ? label_width(config.categories) : 2;

  std::vector<AuctionRow> rows(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    SplitMix64 rng(config.seed, stream_id(kPanelTag, c));
    const std::int64_t begin = c * kGenChunkRows;
    const std::int64_t end = std::min(begin + kGenChunkRows, n);
    for (std::int64_t i = begin; i < end; ++i) {
      const RawRow raw = draw_row(config, rng);
      AuctionRow& r = rows[i];
      r.day = padded_label("d", static_cast<int>(i % config.n_days), day_width);
      r.advertiser = padded_label("adv", raw.adv, adv_width);
      r.exchange = padded_label("ex", raw.exch, exch_width);
      r.region = padded_label("reg", raw.reg, reg_width);
      r.category =
          config.categories > 0 ? padded_label("cat", raw.cat, cat_width) : "";
      r.floor = raw.floor;
      r.bid = raw.bid;
      r.payment = raw.payment;
      r.filled = raw.filled;
    }
  }
  return Panel::from_rows(std::move(rows));
}

OracleEstimate true_lift_oracle(const GeneratorConfig& config, const Policy& policy,
                                const QuantileSet& quantiles,
                                std::int64_t n_oracle) {
  config.validate();
  if (n_oracle < 1)
    throw Error(ErrorKind::kConfig, "oracle population size must be positive");
  if (policy.uses_quantiles() && !quantiles.frozen)
    throw Error(ErrorKind::kContract, "oracle requires frozen quantiles");

  const std::int64_t n_chunks = (n_oracle + kGenChunkRows - 1) / kGenChunkRows;
  std::vector<__int128> chunk_z(n_chunks, 0);
  std::vector<__int128> chunk_y0(n_chunks, 0);
  std::vector<double> chunk_z2(n_chunks, 0.0);  // (minor units)^2

#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    SplitMix64 rng(config.seed, stream_id(kOracleTag, c));
    const std::int64_t begin = c * kGenChunkRows;
    const std::int64_t end = std::min(begin + kGenChunkRows, n_oracle);
    __int128 sum_z = 0;
    __int128 sum_y0 = 0;
    double sum_z2 = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      const RawRow r = draw_row(config, rng);
      const MicroMoney cand =
          reference_candidate_floor(policy, r.floor, r.bid, quantiles);
      const MicroMoney y = reference_replay_row(r.filled, r.bid, r.payment, cand);
      const MicroMoney y0 = reference_replay_row(r.filled, r.bid, r.payment,
                                                 r.floor * kMicroScale);
      sum_z += y - y0;
      sum_y0 += y0;
      const double z_minor = micro_to_double(y - y0);
      sum_z2 += z_minor * z_minor;
    }
    chunk_z[c] = sum_z;
    chunk_y0[c] = sum_y0;
    chunk_z2[c] = sum_z2;
  }

  __int128 total_z = 0;
  __int128 total_y0 = 0;
  double total_z2 = 0;
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    total_z += chunk_z[c];
    total_y0 += chunk_y0[c];
    total_z2 += chunk_z2[c];
  }
  if (total_y0 <= 0)
    throw Error(ErrorKind::kDomain, "oracle baseline mean yield is zero");

  OracleEstimate est;
  est.n = n_oracle;
  est.mu0 = static_cast<double>(total_y0) /
            (static_cast<double>(kMicroScale) * static_cast<double>(n_oracle));
  est.lift = static_cast<double>(total_z) / static_cast<double>(total_y0);
  const double nd = static_cast<double>(n_oracle);
  const double mean_z = static_cast<double>(total_z) /
                        (static_cast<double>(kMicroScale) * nd);
  const double var_z =
      std::max(0.0, (total_z2 - nd * mean_z * mean_z) / std::max(1.0, nd - 1));
  est.se = std::sqrt(var_z / nd) / est.mu0;
  return est;
}

}  // namespace floorcert::synth
