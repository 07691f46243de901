#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "omba/core.hpp"

namespace omba::ingest {

/// Exact header of the canonical interchange file.
inline constexpr std::string_view kCanonicalHeader =
    "basket_id,timestamp,user_id,product_id,price";

/// Rows with an empty user id are assigned this reserved user unit.
inline constexpr std::string_view kAnonymousUser = "__anon__";

enum class TimestampConvention { Iso8601, DayNumber, EpochSeconds };

/// Maps the five logical columns onto physical column names of a
/// delimiter-separated source. The price column may be absent entirely, in
/// which case every item gets a unit price of 1.0.
struct TransactionRecordFormat {
  std::string basket_id = "basket_id";
  std::string timestamp = "timestamp";
  std::string user_id = "user_id";
  std::string product_id = "product_id";
  std::string price = "price";  // empty string = no price column
  char delimiter = ',';
  TimestampConvention convention = TimestampConvention::EpochSeconds;

  static TransactionRecordFormat canonical();
  /// Complete Journey transaction layout (day-number timestamps).
  static TransactionRecordFormat complete_journey();
};

/// Looks up a named preset: "canonical" or "cj". Throws on unknown names.
TransactionRecordFormat format_by_name(const std::string& name);

struct ParseDiagnostics {
  std::size_t rows_total = 0;
  std::size_t rows_parsed = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> messages;  // capped at 100 entries
};

struct ParseResult {
  std::vector<Basket> baskets;  // sorted by (timestamp, basket_id)
  ParseDiagnostics diagnostics;
};

/// Parses delimiter-separated text with a mandatory header row into the
/// canonical basket stream. Rows sharing a basket_id are grouped (contiguous
/// or not); duplicate (basket_id, product_id) rows collapse to the first
/// price seen. Malformed rows are skipped and counted; a missing required
/// column throws.
ParseResult parse_transactions(std::istream& source, const TransactionRecordFormat& format);

/// Partitions a timestamp-sorted basket stream into windows of
/// `window_days` days anchored at the local midnight of the earliest basket.
/// Empty windows are emitted so indices stay contiguous. Throws on unsorted
/// input, naming the first inversion.
std::vector<Window> window_stream(const std::vector<Basket>& baskets, int window_days = 1);

/// Writes baskets in the canonical interchange format (one row per item).
/// Missing prices are written as an empty field.
void write_canonical_csv(std::ostream& out, std::span<const Basket> baskets);

/// Parses an ISO-8601 date or date-time ("YYYY-MM-DD[ T]HH:MM:SS") as naive
/// local time into seconds since epoch. Throws on malformed input.
std::int64_t parse_iso8601(std::string_view text);

}  // namespace omba::ingest
