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

#ifndef FLOORCERT_AUCTION_LOG_HPP_
#define FLOORCERT_AUCTION_LOG_HPP_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "floorcert/money.hpp"

namespace floorcert {

// One logged auction opportunity. Row invariants:
//   floor, bid, payment >= 0;
//   filled  implies bid >= floor and payment <= bid;
//   !filled implies payment == 0.
struct AuctionRow {
  std::string day;         // opaque sortable label, ISO dates recommended
  std::string advertiser;
  std::string exchange;
  std::string region;
  std::string category;    // optional, empty allowed
  Money floor = 0;
  Money bid = 0;
  Money payment = 0;       // meaningful only when filled
  bool filled = false;
};

// Returns nullptr if the row is valid, else a short reason.
const char* row_violation(const AuctionRow& row);

// Logged bid-floor gap b - f0. Negative gaps occur only on unfilled rows.
inline Money bid_gap(const AuctionRow& row) { return row.bid - row.floor; }

// Day-partitioned, column-oriented panel. Immutable after construction and
// safe for concurrent read-only access; ingestion is single-threaded.
// Row order is the ingestion order of the input file.
class Panel {
 public:
  static Panel from_rows(std::vector<AuctionRow> rows);

  std::int64_t size() const { return static_cast<std::int64_t>(floor_.size()); }
  const std::vector<std::string>& days() const { return days_; }

  const std::vector<Money>& floors() const { return floor_; }
  const std::vector<Money>& bids() const { return bid_; }
  const std::vector<Money>& payments() const { return payment_; }
  const std::vector<std::uint8_t>& filled() const { return filled_; }
  const std::vector<std::int32_t>& day_index() const { return day_idx_; }

  const std::vector<std::int32_t>& advertiser_index() const { return adv_idx_; }
  const std::vector<std::int32_t>& exchange_index() const { return exch_idx_; }
  const std::vector<std::int32_t>& region_index() const { return region_idx_; }
  const std::vector<std::int32_t>& category_index() const { return cat_idx_; }
  const std::vector<std::string>& advertisers() const { return advertisers_; }
  const std::vector<std::string>& exchanges() const { return exchanges_; }
  const std::vector<std::string>& regions() const { return regions_; }
  const std::vector<std::string>& categories() const { return categories_; }

  AuctionRow row(std::int64_t i) const;

  // Canonical serialization: fixed header and column order, one line per row
  // in ingestion order. Identical panels serialize to identical bytes.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> days_;  // sorted ascending, distinct
  std::vector<std::string> advertisers_, exchanges_, regions_, categories_;
  std::vector<std::int32_t> day_idx_, adv_idx_, exch_idx_, region_idx_, cat_idx_;
  std::vector<Money> floor_, bid_, payment_;
  std::vector<std::uint8_t> filled_;
};

// Maps canonical column roles to header names in the input file.
struct SchemaMapping {
  std::string day = "day";
  std::string advertiser = "advertiser";
  std::string exchange = "exchange";
  std::string region = "region";
  std::string category = "category";
  std::string floor = "floor";
  std::string bid = "bid";
  std::string payment = "payment";
  std::string filled = "filled";

  // Column names for iPinYou-style logs. The public archive never labels
  // which price column plays the payment role; this preset maps payprice
  // to payment and bidprice to bid, and is overridable per run.
  static SchemaMapping ipinyou();
};

struct ParseOptions {
  char delimiter = ',';
  bool strict = true;  // strict: first invalid row aborts; lenient: drop + count
};

struct IngestStats {
  std::int64_t rows_read = 0;
  std::int64_t rows_dropped = 0;
  std::string first_drop_reason;
};

Panel parse_log(const std::string& path, const SchemaMapping& schema,
                const ParseOptions& options = {}, IngestStats* stats = nullptr);
Panel parse_log(std::istream& in, const SchemaMapping& schema,
                const ParseOptions& options = {}, IngestStats* stats = nullptr);

enum class SegmentDimension { kAdvertiser, kExchange, kRegion, kCategory, kBidGapBucket };

const char* segment_dimension_name(SegmentDimension d);
SegmentDimension segment_dimension_from_name(const std::string& name);

struct SegmentKey {
  SegmentDimension dimension;
  std::string value;
  auto operator<=>(const SegmentKey&) const = default;
};

struct SegmentGroup {
  SegmentKey key;
  std::vector<std::int64_t> rows;
};

// covered: groups meeting min_rows. uncovered: groups below min_rows, rows
// with an empty key for the requested dimension, and bid gaps falling left
// of the first bucket edge. Within one dimension the covered and uncovered
// row counts always sum to the panel size.
struct SegmentMap {
  std::vector<SegmentGroup> covered;
  std::vector<SegmentGroup> uncovered;
};

// Bid-gap buckets are half-open [e_k, e_{k+1}) with a final [e_last, inf);
// edges are micro units, strictly increasing, and only consulted when the
// bid-gap-bucket dimension is requested.
SegmentMap partition_segments(const Panel& panel,
                              const std::vector<SegmentDimension>& dimensions,
                              std::int64_t min_rows,
                              const std::vector<MicroMoney>& gap_bucket_edges = {});

}  // namespace floorcert

#endif  // FLOORCERT_AUCTION_LOG_HPP_
