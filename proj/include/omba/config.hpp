#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "omba/core.hpp"
#include "omba/ingest.hpp"

namespace omba::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` run configuration. Every field defaults to the
/// reference parameter settings; unknown keys are fatal and reported all at
/// once. One master seed fans out to named sub-streams (init, negatives,
/// shuffle, ensemble, eval) via sub_seed(), so components are independently
/// reproducible.
struct RunConfig {
  // dataset
  std::string dataset;                 // transaction file path
  std::string format = "canonical";    // canonical | cj | custom
  std::string delimiter = ",";
  std::string timestamp_convention = "epoch_seconds";  // iso8601 | day_number | epoch_seconds
  std::string col_basket_id = "basket_id";
  std::string col_timestamp = "timestamp";
  std::string col_user_id = "user_id";
  std::string col_product_id = "product_id";
  std::string col_price = "price";     // empty = no price column
  int window_days = 1;

  // embedding trainer
  int d = 300;
  double eta = 0.05;
  int negatives = 3;
  int epochs = 50;
  double tau = 0.1;
  double price_clip = 10.0;
  std::uint64_t seed = 42;
  bool value_weighting = true;
  bool uniform_negatives = false;
  std::string mode = "deterministic";  // deterministic | parallel
  int threads = 0;                     // 0 = runtime default (parallel mode)

  // rule mining
  int arm_functions = 4;    // |F|
  int arm_tables = 11;      // |H|
  double arm_scale = 4.3;   // A
  int arm_top_k = 100;
  std::int64_t arm_min_appearances = 0;

  // evaluation
  int eval_m = 10;
  std::vector<std::int64_t> eval_query_windows;  // empty = auto-pick from the second half
  int eval_query_window_count = 20;              // used by the auto pick
  std::vector<int> eval_ks = {1, 2, 3, 4, 5};
  bool eval_uniform_negatives = false;
  bool eval_single_target = false;
  int analyze_pairs = 100000;  // k of the user-repetition test

  std::string output_dir = "out";

  Hyperparameters hyperparameters() const;
  ingest::TransactionRecordFormat record_format() const;
};

/// Parses config text. Collects every offending key (unknown keys, bad
/// values) into one ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c exactly.
std::string serialize_config(const RunConfig& config);

/// Applies one `key=value` override (CLI flags win over file values).
/// Unknown keys throw ConfigError.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace omba::config
