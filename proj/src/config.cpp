#include "omba/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace omba::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    auto [p, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
    if (ec == std::errc() && back == v) break;
  }
  return buf;
}

// One entry per key: getter (serialize) + setter (parse). Declarative so the
// round-trip property holds by construction.
struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<bool(RunConfig&, const std::string&)> set;  // false = bad value
};

bool set_int(int& slot, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) return false;
  slot = out;
  return true;
}

bool set_i64(std::int64_t& slot, const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) return false;
  slot = out;
  return true;
}

bool set_u64(std::uint64_t& slot, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) return false;
  slot = out;
  return true;
}

bool set_double(double& slot, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) return false;
  slot = out;
  return true;
}

bool set_bool(bool& slot, const std::string& v) {
  if (v == "true" || v == "1") { slot = true; return true; }
  if (v == "false" || v == "0") { slot = false; return true; }
  return false;
}

template <typename T, typename Setter>
bool set_list(std::vector<T>& slot, const std::string& v, Setter setter) {
  std::vector<T> out;
  if (!trim(v).empty()) {
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
      T item{};
      if (!setter(item, trim(part))) return false;
      out.push_back(item);
    }
  }
  slot = std::move(out);
  return true;
}

template <typename T>
std::string join_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

const std::map<std::string, Field>& field_table() {
  static const std::map<std::string, Field> table = {
      {"dataset", {[](const RunConfig& c) { return c.dataset; },
                   [](RunConfig& c, const std::string& v) { c.dataset = v; return true; }}},
      {"format", {[](const RunConfig& c) { return c.format; },
                  [](RunConfig& c, const std::string& v) {
                    if (v != "canonical" && v != "cj" && v != "custom") return false;
                    c.format = v;
                    return true;
                  }}},
      {"delimiter", {[](const RunConfig& c) { return c.delimiter; },
                     [](RunConfig& c, const std::string& v) {
                       if (v.size() != 1) return false;
                       c.delimiter = v;
                       return true;
                     }}},
      {"timestamp_convention",
       {[](const RunConfig& c) { return c.timestamp_convention; },
        [](RunConfig& c, const std::string& v) {
          if (v != "iso8601" && v != "day_number" && v != "epoch_seconds") return false;
          c.timestamp_convention = v;
          return true;
        }}},
      {"col.basket_id", {[](const RunConfig& c) { return c.col_basket_id; },
                         [](RunConfig& c, const std::string& v) { c.col_basket_id = v; return true; }}},
      {"col.timestamp", {[](const RunConfig& c) { return c.col_timestamp; },
                         [](RunConfig& c, const std::string& v) { c.col_timestamp = v; return true; }}},
      {"col.user_id", {[](const RunConfig& c) { return c.col_user_id; },
                       [](RunConfig& c, const std::string& v) { c.col_user_id = v; return true; }}},
      {"col.product_id", {[](const RunConfig& c) { return c.col_product_id; },
                          [](RunConfig& c, const std::string& v) { c.col_product_id = v; return true; }}},
      {"col.price", {[](const RunConfig& c) { return c.col_price; },
                     [](RunConfig& c, const std::string& v) { c.col_price = v; return true; }}},
      {"window_days", {[](const RunConfig& c) { return std::to_string(c.window_days); },
                       [](RunConfig& c, const std::string& v) {
                         return set_int(c.window_days, v) && c.window_days > 0;
                       }}},
      {"d", {[](const RunConfig& c) { return std::to_string(c.d); },
             [](RunConfig& c, const std::string& v) { return set_int(c.d, v) && c.d > 0; }}},
      {"eta", {[](const RunConfig& c) { return format_double(c.eta); },
               [](RunConfig& c, const std::string& v) { return set_double(c.eta, v) && c.eta > 0; }}},
      {"negatives", {[](const RunConfig& c) { return std::to_string(c.negatives); },
                     [](RunConfig& c, const std::string& v) {
                       return set_int(c.negatives, v) && c.negatives >= 1;
                     }}},
      {"epochs", {[](const RunConfig& c) { return std::to_string(c.epochs); },
                  [](RunConfig& c, const std::string& v) {
                    return set_int(c.epochs, v) && c.epochs >= 1;
                  }}},
      {"tau", {[](const RunConfig& c) { return format_double(c.tau); },
               [](RunConfig& c, const std::string& v) { return set_double(c.tau, v) && c.tau >= 0; }}},
      {"price_clip", {[](const RunConfig& c) { return format_double(c.price_clip); },
                      [](RunConfig& c, const std::string& v) {
                        return set_double(c.price_clip, v) && c.price_clip > 0;
                      }}},
      {"seed", {[](const RunConfig& c) { return std::to_string(c.seed); },
                [](RunConfig& c, const std::string& v) { return set_u64(c.seed, v); }}},
      {"value_weighting", {[](const RunConfig& c) { return c.value_weighting ? "true" : "false"; },
                           [](RunConfig& c, const std::string& v) { return set_bool(c.value_weighting, v); }}},
      {"uniform_negatives", {[](const RunConfig& c) { return c.uniform_negatives ? "true" : "false"; },
                             [](RunConfig& c, const std::string& v) { return set_bool(c.uniform_negatives, v); }}},
      {"mode", {[](const RunConfig& c) { return c.mode; },
                [](RunConfig& c, const std::string& v) {
                  if (v != "deterministic" && v != "parallel") return false;
                  c.mode = v;
                  return true;
                }}},
      {"threads", {[](const RunConfig& c) { return std::to_string(c.threads); },
                   [](RunConfig& c, const std::string& v) {
                     return set_int(c.threads, v) && c.threads >= 0;
                   }}},
      {"arm.functions", {[](const RunConfig& c) { return std::to_string(c.arm_functions); },
                         [](RunConfig& c, const std::string& v) {
                           return set_int(c.arm_functions, v) && c.arm_functions >= 1 &&
                                  c.arm_functions <= 32;
                         }}},
      {"arm.tables", {[](const RunConfig& c) { return std::to_string(c.arm_tables); },
                      [](RunConfig& c, const std::string& v) {
                        return set_int(c.arm_tables, v) && c.arm_tables >= 1;
                      }}},
      {"arm.scale", {[](const RunConfig& c) { return format_double(c.arm_scale); },
                     [](RunConfig& c, const std::string& v) { return set_double(c.arm_scale, v); }}},
      {"arm.top_k", {[](const RunConfig& c) { return std::to_string(c.arm_top_k); },
                     [](RunConfig& c, const std::string& v) {
                       return set_int(c.arm_top_k, v) && c.arm_top_k >= 1;
                     }}},
      {"arm.min_appearances",
       {[](const RunConfig& c) { return std::to_string(c.arm_min_appearances); },
        [](RunConfig& c, const std::string& v) {
          return set_i64(c.arm_min_appearances, v) && c.arm_min_appearances >= 0;
        }}},
      {"eval.m", {[](const RunConfig& c) { return std::to_string(c.eval_m); },
                  [](RunConfig& c, const std::string& v) { return set_int(c.eval_m, v) && c.eval_m >= 1; }}},
      {"eval.query_windows",
       {[](const RunConfig& c) { return join_list(c.eval_query_windows); },
        [](RunConfig& c, const std::string& v) {
          return set_list<std::int64_t>(c.eval_query_windows, v,
                                        [](std::int64_t& s, const std::string& p) { return set_i64(s, p); });
        }}},
      {"eval.query_window_count",
       {[](const RunConfig& c) { return std::to_string(c.eval_query_window_count); },
        [](RunConfig& c, const std::string& v) {
          return set_int(c.eval_query_window_count, v) && c.eval_query_window_count >= 1;
        }}},
      {"eval.ks", {[](const RunConfig& c) { return join_list(c.eval_ks); },
                   [](RunConfig& c, const std::string& v) {
                     return set_list<int>(c.eval_ks, v,
                                          [](int& s, const std::string& p) { return set_int(s, p) && s >= 1; });
                   }}},
      {"eval.uniform_negatives",
       {[](const RunConfig& c) { return c.eval_uniform_negatives ? "true" : "false"; },
        [](RunConfig& c, const std::string& v) { return set_bool(c.eval_uniform_negatives, v); }}},
      {"eval.single_target", {[](const RunConfig& c) { return c.eval_single_target ? "true" : "false"; },
                              [](RunConfig& c, const std::string& v) { return set_bool(c.eval_single_target, v); }}},
      {"analyze.pairs", {[](const RunConfig& c) { return std::to_string(c.analyze_pairs); },
                         [](RunConfig& c, const std::string& v) {
                           return set_int(c.analyze_pairs, v) && c.analyze_pairs >= 2;
                         }}},
      {"output_dir", {[](const RunConfig& c) { return c.output_dir; },
                      [](RunConfig& c, const std::string& v) { c.output_dir = v; return true; }}},
  };
  return table;
}

}  // namespace

Hyperparameters RunConfig::hyperparameters() const {
  Hyperparameters hp;
  hp.dimension = d;
  hp.eta = eta;
  hp.negatives = negatives;
  hp.epochs = epochs;
  hp.tau = tau;
  hp.price_clip = price_clip;
  hp.seed = seed;
  return hp;
}

ingest::TransactionRecordFormat RunConfig::record_format() const {
  if (format != "custom") return ingest::format_by_name(format);
  ingest::TransactionRecordFormat f;
  f.basket_id = col_basket_id;
  f.timestamp = col_timestamp;
  f.user_id = col_user_id;
  f.product_id = col_product_id;
  f.price = col_price;
  f.delimiter = delimiter[0];
  f.convention = timestamp_convention == "iso8601"      ? ingest::TimestampConvention::Iso8601
                 : timestamp_convention == "day_number" ? ingest::TimestampConvention::DayNumber
                                                        : ingest::TimestampConvention::EpochSeconds;
  return f;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::vector<std::string> errors;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    auto it = field_table().find(key);
    if (it == field_table().end()) {
      errors.push_back("unknown key '" + key + "' (line " + std::to_string(line_no) + ")");
      continue;
    }
    if (!it->second.set(config, value)) {
      errors.push_back("invalid value for '" + key + "': '" + value + "' (line " +
                       std::to_string(line_no) + ")");
    }
  }
  if (!errors.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, field] : field_table()) {
    out += key;
    out += " = ";
    out += field.get(config);
    out += "\n";
  }
  return out;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  auto it = field_table().find(key);
  if (it == field_table().end()) throw ConfigError("unknown config key: " + key);
  if (!it->second.set(config, value))
    throw ConfigError("invalid value for '" + key + "': '" + value + "'");
}

std::string config_hash(const RunConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace omba::config
