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

#include "floorcert/auction_log.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "floorcert/error.hpp"

namespace floorcert {

const char* row_violation(const AuctionRow& row) {
  if (row.floor < 0 || row.bid < 0 || row.payment < 0)
    return "negative price";
  if (row.floor > kMaxLoggedMoney || row.bid > kMaxLoggedMoney ||
      row.payment > kMaxLoggedMoney)
    return "price exceeds supported range";
  if (row.day.empty()) return "empty day label";
  if (row.filled) {
    if (row.bid < row.floor) return "filled row with bid below floor";
    if (row.payment > row.bid) return "filled row with payment above bid";
  } else {
    if (row.payment != 0) return "unfilled row with nonzero payment";
  }
  return nullptr;
}

namespace {

// Interns `value` into `table`, returning its code.
std::int32_t intern(const std::string& value, std::vector<std::string>& table,
                    std::unordered_map<std::string, std::int32_t>& index) {
  auto it = index.find(value);
  if (it != index.end()) return it->second;
  std::int32_t code = static_cast<std::int32_t>(table.size());
  table.push_back(value);
  index.emplace(value, code);
  return code;
}

}  // namespace

Panel Panel::from_rows(std::vector<AuctionRow> rows) {
  if (rows.empty())
    throw Error(ErrorKind::kEmptyPanel, "panel has no rows");
  Panel p;
  const std::size_t n = rows.size();
  p.day_idx_.reserve(n);
  p.adv_idx_.reserve(n);
  p.exch_idx_.reserve(n);
  p.region_idx_.reserve(n);
  p.cat_idx_.reserve(n);
  p.floor_.reserve(n);
  p.bid_.reserve(n);
  p.payment_.reserve(n);
  p.filled_.reserve(n);

  // Days get sorted codes so the day partition is ordered; the other
  // dictionaries keep first-appearance order (only identity matters).
  std::map<std::string, std::int32_t> day_codes;
  for (const auto& r : rows) day_codes.emplace(r.day, 0);
  p.days_.reserve(day_codes.size());
  for (auto& [label, code] : day_codes) {
    code = static_cast<std::int32_t>(p.days_.size());
    p.days_.push_back(label);
  }

  std::unordered_map<std::string, std::int32_t> adv_ix, exch_ix, region_ix, cat_ix;
  for (auto& r : rows) {
    if (const char* why = row_violation(r))
      throw Error(ErrorKind::kRow, std::string("invalid row: ") + why);
    p.day_idx_.push_back(day_codes.at(r.day));
    p.adv_idx_.push_back(intern(r.advertiser, p.advertisers_, adv_ix));
    p.exch_idx_.push_back(intern(r.exchange, p.exchanges_, exch_ix));
    p.region_idx_.push_back(intern(r.region, p.regions_, region_ix));
    p.cat_idx_.push_back(intern(r.category, p.categories_, cat_ix));
    p.floor_.push_back(r.floor);
    p.bid_.push_back(r.bid);
    p.payment_.push_back(r.payment);
    p.filled_.push_back(r.filled ? 1 : 0);
  }
  return p;
}

AuctionRow Panel::row(std::int64_t i) const {
  AuctionRow r;
  r.day = days_[day_idx_[i]];
  r.advertiser = advertisers_[adv_idx_[i]];
  r.exchange = exchanges_[exch_idx_[i]];
  r.region = regions_[region_idx_[i]];
  r.category = categories_[cat_idx_[i]];
  r.floor = floor_[i];
  r.bid = bid_[i];
  r.payment = payment_[i];
  r.filled = filled_[i] != 0;
  return r;
}

void Panel::write_csv(std::ostream& out) const {
  out << "day,advertiser,exchange,region,category,floor,bid,payment,filled\n";
  for (std::int64_t i = 0; i < size(); ++i) {
    out << days_[day_idx_[i]] << ',' << advertisers_[adv_idx_[i]] << ','
        << exchanges_[exch_idx_[i]] << ',' << regions_[region_idx_[i]] << ','
        << categories_[cat_idx_[i]] << ',' << floor_[i] << ',' << bid_[i]
        << ',' << payment_[i] << ',' << int(filled_[i]) << '\n';
  }
}

SchemaMapping SchemaMapping::ipinyou() {
  SchemaMapping m;
  m.day = "day";
  m.advertiser = "advertiser";
  m.exchange = "adexchange";
  m.region = "region";
  m.category = "slotvisibility";
  m.floor = "slotprice";
  m.bid = "bidprice";
  m.payment = "payprice";
  m.filled = "filled";
  return m;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

struct ColumnIndices {
  int day, advertiser, exchange, region, category, floor, bid, payment, filled;
};

int find_column(const std::vector<std::string>& header, const std::string& name,
                bool required) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    if (required)
      throw Error(ErrorKind::kSchema, "input is missing column '" + name + "'");
    return -1;
  }
  return static_cast<int>(it - header.begin());
}

bool parse_money(const std::string& s, Money* out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

Panel parse_log(std::istream& in, const SchemaMapping& schema,
                const ParseOptions& options, IngestStats* stats) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorKind::kSchema, "input has no header row");
  const auto header = split_line(line, options.delimiter);

  ColumnIndices ix{};
  ix.day = find_column(header, schema.day, true);
  ix.advertiser = find_column(header, schema.advertiser, true);
  ix.exchange = find_column(header, schema.exchange, true);
  ix.region = find_column(header, schema.region, true);
  ix.category = find_column(header, schema.category, false);  // optional column
  ix.floor = find_column(header, schema.floor, true);
  ix.bid = find_column(header, schema.bid, true);
  ix.payment = find_column(header, schema.payment, true);
  ix.filled = find_column(header, schema.filled, true);

  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  st = IngestStats{};

  std::vector<AuctionRow> rows;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    ++st.rows_read;
    const auto fields = split_line(line, options.delimiter);
    const auto fail = [&](const std::string& why) {
      if (options.strict)
        throw Error(ErrorKind::kRow,
                    "line " + std::to_string(line_no) + ": " + why);
      ++st.rows_dropped;
      if (st.first_drop_reason.empty())
        st.first_drop_reason = "line " + std::to_string(line_no) + ": " + why;
    };
    const int max_ix = std::max({ix.day, ix.advertiser, ix.exchange, ix.region,
                                 ix.category, ix.floor, ix.bid, ix.payment,
                                 ix.filled});
    if (static_cast<int>(fields.size()) <= max_ix) {
      fail("too few fields");
      continue;
    }

    AuctionRow r;
    r.day = fields[ix.day];
    r.advertiser = fields[ix.advertiser];
    r.exchange = fields[ix.exchange];
    r.region = fields[ix.region];
    r.category = ix.category >= 0 ? fields[ix.category] : "";
    if (!parse_money(fields[ix.floor], &r.floor)) {
      fail("unparseable floor '" + fields[ix.floor] + "'");
      continue;
    }
    if (!parse_money(fields[ix.bid], &r.bid)) {
      fail("unparseable bid '" + fields[ix.bid] + "'");
      continue;
    }
    if (!parse_money(fields[ix.payment], &r.payment)) {
      fail("unparseable payment '" + fields[ix.payment] + "'");
      continue;
    }
    const std::string& f = fields[ix.filled];
    if (f == "0") {
      r.filled = false;
    } else if (f == "1") {
      r.filled = true;
    } else {
      fail("filled must be 0 or 1, got '" + f + "'");
      continue;
    }
    if (const char* why = row_violation(r)) {
      fail(why);
      continue;
    }
    rows.push_back(std::move(r));
  }

  if (rows.empty())
    throw Error(ErrorKind::kEmptyPanel, "no valid rows after ingestion");
  return Panel::from_rows(std::move(rows));
}

Panel parse_log(const std::string& path, const SchemaMapping& schema,
                const ParseOptions& options, IngestStats* stats) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::kIo, "cannot open input file '" + path + "'");
  return parse_log(in, schema, options, stats);
}

const char* segment_dimension_name(SegmentDimension d) {
  switch (d) {
    case SegmentDimension::kAdvertiser: return "advertiser";
    case SegmentDimension::kExchange: return "exchange";
    case SegmentDimension::kRegion: return "region";
    case SegmentDimension::kCategory: return "category";
    case SegmentDimension::kBidGapBucket: return "bid-gap-bucket";
  }
  return "unknown";
}

SegmentDimension segment_dimension_from_name(const std::string& name) {
  if (name == "advertiser") return SegmentDimension::kAdvertiser;
  if (name == "exchange") return SegmentDimension::kExchange;
  if (name == "region") return SegmentDimension::kRegion;
  if (name == "category") return SegmentDimension::kCategory;
  if (name == "bid-gap-bucket") return SegmentDimension::kBidGapBucket;
  throw Error(ErrorKind::kConfig, "unknown segment dimension '" + name + "'");
}

namespace {

std::string bucket_label(const std::vector<MicroMoney>& edges, std::size_t k) {
  // k in [0, edges.size()): bucket [e_k, e_{k+1}), final bucket [e_last, inf).
  if (k + 1 < edges.size())
    return "[" + format_micro(edges[k]) + "," + format_micro(edges[k + 1]) + ")";
  return "[" + format_micro(edges[k]) + ",inf)";
}

}  // namespace

SegmentMap partition_segments(const Panel& panel,
                              const std::vector<SegmentDimension>& dimensions,
                              std::int64_t min_rows,
                              const std::vector<MicroMoney>& gap_bucket_edges) {
  if (dimensions.empty())
    throw Error(ErrorKind::kConfig, "no segment dimensions requested");
  if (min_rows < 1)
    throw Error(ErrorKind::kConfig, "min_rows must be at least 1");

  SegmentMap out;
  const std::int64_t n = panel.size();

  for (SegmentDimension dim : dimensions) {
    std::map<std::string, std::vector<std::int64_t>> groups;
    std::vector<std::int64_t> below_range;  // gaps left of the first edge

    if (dim == SegmentDimension::kBidGapBucket) {
      if (gap_bucket_edges.empty())
        throw Error(ErrorKind::kConfig,
                    "bid-gap-bucket dimension requires bucket edges");
      if (!std::is_sorted(gap_bucket_edges.begin(), gap_bucket_edges.end()) ||
          std::adjacent_find(gap_bucket_edges.begin(), gap_bucket_edges.end()) !=
              gap_bucket_edges.end())
        throw Error(ErrorKind::kConfig,
                    "gap bucket edges must be strictly increasing");
      const auto& bids = panel.bids();
      const auto& floors = panel.floors();
      for (std::int64_t i = 0; i < n; ++i) {
        const MicroMoney gap = to_micro(bids[i] - floors[i]);
        auto it = std::upper_bound(gap_bucket_edges.begin(),
                                   gap_bucket_edges.end(), gap);
        if (it == gap_bucket_edges.begin()) {
          below_range.push_back(i);
          continue;
        }
        const std::size_t k = static_cast<std::size_t>(it - gap_bucket_edges.begin()) - 1;
        groups[bucket_label(gap_bucket_edges, k)].push_back(i);
      }
    } else {
      const std::vector<std::int32_t>* codes = nullptr;
      const std::vector<std::string>* table = nullptr;
      switch (dim) {
        case SegmentDimension::kAdvertiser:
          codes = &panel.advertiser_index(); table = &panel.advertisers(); break;
        case SegmentDimension::kExchange:
          codes = &panel.exchange_index(); table = &panel.exchanges(); break;
        case SegmentDimension::kRegion:
          codes = &panel.region_index(); table = &panel.regions(); break;
        case SegmentDimension::kCategory:
          codes = &panel.category_index(); table = &panel.categories(); break;
        case SegmentDimension::kBidGapBucket: break;  // handled above
      }
      for (std::int64_t i = 0; i < n; ++i)
        groups[(*table)[(*codes)[i]]].push_back(i);
    }

    for (auto& [value, rows] : groups) {
      SegmentGroup g{SegmentKey{dim, value}, std::move(rows)};
      // Empty keys mark a missing attribute, never a certifiable segment.
      const bool covered =
          !g.key.value.empty() &&
          static_cast<std::int64_t>(g.rows.size()) >= min_rows;
      (covered ? out.covered : out.uncovered).push_back(std::move(g));
    }
    if (!below_range.empty())
      out.uncovered.push_back(SegmentGroup{
          SegmentKey{dim, "(-inf," + format_micro(gap_bucket_edges.front()) + ")"},
          std::move(below_range)});
  }
  return out;
}

}  // namespace floorcert
