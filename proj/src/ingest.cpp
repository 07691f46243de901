#include "omba/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace omba::ingest {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::size_t kMaxDiagnostics = 100;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Howard Hinnant's civil-date algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_int(std::string_view s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

struct PendingBasket {
  std::int64_t timestamp = 0;
  std::string user;
  std::vector<BasketItem> items;
  std::unordered_set<std::string> seen_products;
  std::size_t first_row = 0;  // file order, for stable iteration
};

}  // namespace

TransactionRecordFormat TransactionRecordFormat::canonical() {
  return TransactionRecordFormat{};
}

TransactionRecordFormat TransactionRecordFormat::complete_journey() {
  TransactionRecordFormat f;
  f.basket_id = "BASKET_ID";
  f.timestamp = "DAY";
  f.user_id = "household_key";
  f.product_id = "PRODUCT_ID";
  f.price = "SALES_VALUE";
  f.convention = TimestampConvention::DayNumber;
  return f;
}

TransactionRecordFormat format_by_name(const std::string& name) {
  if (name == "canonical") return TransactionRecordFormat::canonical();
  if (name == "cj") return TransactionRecordFormat::complete_journey();
  throw std::invalid_argument("unknown transaction format: " + name);
}

std::int64_t parse_iso8601(std::string_view text) {
  // YYYY-MM-DD optionally followed by [T or space]HH:MM:SS
  auto fail = [&] { throw std::invalid_argument("malformed ISO-8601 timestamp: " + std::string(text)); };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') fail();
  std::int64_t y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d))
    fail();
  if (mo < 1 || mo > 12 || d < 1 || d > 31) fail();
  if (text.size() > 10) {
    if (text.size() != 19 || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':')
      fail();
    if (!parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
        !parse_int(text.substr(17, 2), ss))
      fail();
    if (hh > 23 || mm > 59 || ss > 60) fail();
  }
  return days_from_civil(static_cast<int>(y), static_cast<int>(mo), static_cast<int>(d)) *
             kSecondsPerDay +
         hh * 3600 + mm * 60 + ss;
}

ParseResult parse_transactions(std::istream& source, const TransactionRecordFormat& format) {
  ParseResult result;
  auto& diag = result.diagnostics;

  std::string line;
  if (!std::getline(source, line))
    throw std::invalid_argument("transaction source is empty (header row is mandatory)");
  strip_cr(line);
  const auto header = split_fields(line, format.delimiter);

  auto column_of = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return -1;
    return static_cast<int>(it - header.begin());
  };

  const int col_basket = column_of(format.basket_id);
  const int col_time = column_of(format.timestamp);
  const int col_user = column_of(format.user_id);
  const int col_product = column_of(format.product_id);
  const int col_price = format.price.empty() ? -1 : column_of(format.price);

  {
    std::vector<std::string> missing;
    if (col_basket < 0) missing.push_back(format.basket_id);
    if (col_time < 0) missing.push_back(format.timestamp);
    if (col_user < 0) missing.push_back(format.user_id);
    if (col_product < 0) missing.push_back(format.product_id);
    if (!format.price.empty() && col_price < 0) missing.push_back(format.price);
    if (!missing.empty()) {
      std::string msg = "missing required column(s):";
      for (const auto& m : missing) msg += " " + m;
      throw std::invalid_argument(msg);
    }
  }

  std::unordered_map<std::string, PendingBasket> pending;
  std::size_t line_no = 1;

  auto skip_row = [&](std::size_t row_line, const std::string& why) {
    ++diag.rows_skipped;
    if (diag.messages.size() < kMaxDiagnostics) {
      diag.messages.push_back("line " + std::to_string(row_line) + ": " + why);
    }
  };

  while (std::getline(source, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    ++diag.rows_total;

    const auto fields = split_fields(line, format.delimiter);
    if (fields.size() != header.size()) {
      skip_row(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
      continue;
    }

    const std::string& basket_id = fields[col_basket];
    if (basket_id.empty()) {
      skip_row(line_no, "empty basket_id");
      continue;
    }
    const std::string& product_id = fields[col_product];
    if (product_id.empty()) {
      skip_row(line_no, "empty product_id");
      continue;
    }

    std::int64_t ts = 0;
    const std::string& raw_ts = fields[col_time];
    bool ts_ok = true;
    switch (format.convention) {
      case TimestampConvention::Iso8601:
        try {
          ts = parse_iso8601(raw_ts);
        } catch (const std::invalid_argument&) {
          ts_ok = false;
        }
        break;
      case TimestampConvention::DayNumber: {
        std::int64_t day = 0;
        ts_ok = parse_int(raw_ts, day);
        ts = day * kSecondsPerDay;
        break;
      }
      case TimestampConvention::EpochSeconds:
        ts_ok = parse_int(raw_ts, ts);
        break;
    }
    if (!ts_ok) {
      skip_row(line_no, "malformed timestamp '" + raw_ts + "'");
      continue;
    }

    std::optional<double> price;
    if (col_price >= 0) {
      const std::string& raw_price = fields[col_price];
      if (!raw_price.empty()) {
        double p = 0.0;
        if (!parse_double(raw_price, p) || p < 0.0) {
          skip_row(line_no, "malformed price '" + raw_price + "'");
          continue;
        }
        price = p;
      }
      // empty cell: price stays missing; the trainer weighs it neutrally
    } else {
      price = 1.0;
    }

    auto [it, inserted] = pending.try_emplace(basket_id);
    PendingBasket& b = it->second;
    if (inserted) {
      b.timestamp = ts;
      b.user = fields[col_user].empty() ? std::string(kAnonymousUser) : fields[col_user];
      b.first_row = diag.rows_total;
    }
    if (b.seen_products.insert(product_id).second) {
      b.items.push_back(BasketItem{product_id, price});
    }
    ++diag.rows_parsed;
  }

  result.baskets.reserve(pending.size());
  std::vector<std::pair<std::string, PendingBasket*>> ordered;
  ordered.reserve(pending.size());
  for (auto& [id, b] : pending) ordered.emplace_back(id, &b);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second->timestamp != b.second->timestamp)
      return a.second->timestamp < b.second->timestamp;
    return a.first < b.first;
  });
  for (auto& [id, b] : ordered) {
    Basket basket;
    basket.id = id;
    basket.timestamp = b->timestamp;
    basket.user = std::move(b->user);
    basket.items = std::move(b->items);
    result.baskets.push_back(std::move(basket));
  }
  return result;
}

std::vector<Window> window_stream(const std::vector<Basket>& baskets, int window_days) {
  if (window_days <= 0) throw std::invalid_argument("window_days must be positive");
  std::vector<Window> windows;
  if (baskets.empty()) return windows;

  for (std::size_t i = 1; i < baskets.size(); ++i) {
    if (baskets[i].timestamp < baskets[i - 1].timestamp) {
      throw std::invalid_argument(
          "basket stream is not sorted by timestamp: inversion at position " +
          std::to_string(i) + " (t=" + std::to_string(baskets[i].timestamp) +
          " after t=" + std::to_string(baskets[i - 1].timestamp) + ")");
    }
  }

  const std::int64_t origin =
      floor_div(baskets.front().timestamp, kSecondsPerDay) * kSecondsPerDay;
  const std::int64_t span = kSecondsPerDay * window_days;

  for (const Basket& b : baskets) {
    const std::int64_t index = floor_div(b.timestamp - origin, span);
    while (static_cast<std::int64_t>(windows.size()) <= index) {
      windows.push_back(Window{static_cast<std::int64_t>(windows.size()), {}});
    }
    windows[static_cast<std::size_t>(index)].baskets.push_back(b);
  }
  return windows;
}

void write_canonical_csv(std::ostream& out, std::span<const Basket> baskets) {
  out << kCanonicalHeader << "\n";
  std::size_t basket_no = 0;
  char buf[64];
  for (const Basket& b : baskets) {
    ++basket_no;
    std::string basket_id = b.id;
    if (basket_id.empty()) {
      std::snprintf(buf, sizeof buf, "b%08zu", basket_no);
      basket_id = buf;
    }
    for (const BasketItem& item : b.items) {
      out << basket_id << ',' << b.timestamp << ',' << b.user << ',' << item.product << ',';
      if (item.price.has_value()) {
        // shortest representation that round-trips
        double p = *item.price;
        for (int prec = 1; prec <= 17; ++prec) {
          std::snprintf(buf, sizeof buf, "%.*g", prec, p);
          double back = 0.0;
          if (parse_double(buf, back) && back == p) break;
        }
        out << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace omba::ingest
