#include "omba/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "omba/arm.hpp"
#include "omba/eval.hpp"
#include "omba/ingest.hpp"
#include "omba/ome.hpp"
#include "omba/snapshot.hpp"
#include "omba/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace omba::cli {

namespace {

constexpr std::string_view kVersion = "0.1.0";

void write_manifest(const std::string& output, const config::RunConfig& config,
                    const std::string& command) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = config::config_hash(config);
  manifest["seed"] = config.seed;
  manifest["versions"] = {{"omba", std::string(kVersion)},
                          {"snapshot_format", "OMBA-EMB-v1"},
                          {"rules_format", 1},
                          {"report_format", 1}};
  std::ofstream out(output + ".manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest beside " + output);
  out << manifest.dump(2) << "\n";
}

std::vector<Basket> load_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config::ConfigError("cannot open transactions: " + path);
  auto parsed = ingest::parse_transactions(in, ingest::TransactionRecordFormat::canonical());
  return std::move(parsed.baskets);
}

void apply_thread_setting(const config::RunConfig& config) {
#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#else
  (void)config;
#endif
}

ome::TrainerOptions trainer_options(const config::RunConfig& config) {
  ome::TrainerOptions options;
  options.hp = config.hyperparameters();
  options.value_weighting = config.value_weighting;
  options.uniform_negatives = config.uniform_negatives;
  options.parallel = config.mode == "parallel";
  return options;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

void cmd_ingest(const config::RunConfig& config, const std::string& input,
                const std::string& output) {
  std::ifstream in(input);
  if (!in) throw config::ConfigError("cannot open input: " + input);
  auto parsed = ingest::parse_transactions(in, config.record_format());

  ensure_parent_dir(output);
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open output: " + output);
  ingest::write_canonical_csv(out, parsed.baskets);

  std::set<std::string> users, products;
  std::size_t rows = 0;
  for (const Basket& b : parsed.baskets) {
    users.insert(b.user);
    for (const BasketItem& item : b.items) {
      products.insert(item.product);
      ++rows;
    }
  }
  std::printf("baskets: %zu\nusers: %zu\nproducts: %zu\ntransactions: %zu\nrows skipped: %zu\n",
              parsed.baskets.size(), users.size(), products.size(), rows,
              parsed.diagnostics.rows_skipped);
  for (const std::string& msg : parsed.diagnostics.messages)
    std::fprintf(stderr, "warning: %s\n", msg.c_str());

  write_manifest(output, config, "ingest");
}

void cmd_train(const config::RunConfig& config, const std::string& input,
               const std::string& output) {
  apply_thread_setting(config);
  const auto baskets = load_canonical(input);
  const auto windows = ingest::window_stream(baskets, config.window_days);

  EmbeddingStore store(config.d);
  ome::NoiseDistribution noise;
  ome::OnlineTrainer trainer(store, noise, trainer_options(config), config.seed);

  ensure_parent_dir(output);
  std::ofstream log(output + ".trainlog.jsonl");
  if (!log) throw std::runtime_error("cannot open train log beside " + output);
  for (const Window& window : windows) {
    const auto report = trainer.train_window(window);
    nlohmann::json line;
    line["window"] = report.window_index;
    line["baskets"] = report.baskets;
    line["tasks"] = report.tasks;
    line["mean_loss"] = report.mean_loss;
    line["units_initialized"] = report.units_initialized;
    line["skipped_updates"] = report.skipped_updates;
    log << line.dump() << "\n";
  }

  snapshot::save_file(output, store);
  write_manifest(output, config, "train");
}

void cmd_mine(const config::RunConfig& config, const std::string& snapshot_path,
              const std::string& output, const std::string& transactions, bool dump_buckets) {
  apply_thread_setting(config);
  if (!std::filesystem::exists(snapshot_path))
    throw config::ConfigError("cannot open snapshot: " + snapshot_path);
  EmbeddingStore store = snapshot::load_file(snapshot_path);

  arm::HashEnsemble ensemble(config.arm_functions, config.arm_tables, store.dimension(),
                             config.seed);
  arm::MineOptions options;
  options.top_k = config.arm_top_k;
  options.min_appearances = config.arm_min_appearances;

  stats::CooccurrenceIndex index;
  ome::NoiseDistribution appearances;
  const stats::CooccurrenceIndex* index_ptr = nullptr;
  const ome::NoiseDistribution* appearances_ptr = nullptr;
  if (!transactions.empty()) {
    for (const Basket& b : load_canonical(transactions)) {
      index.add_basket(b);
      for (const BasketItem& item : b.items)
        appearances.add(UnitKind::Product, store.intern(UnitKind::Product, item.product));
    }
    index_ptr = &index;
    appearances_ptr = &appearances;
  } else if (config.arm_min_appearances > 0) {
    throw config::ConfigError("arm.min_appearances requires a transactions file for counts");
  }

  const auto result =
      arm::mine_rules(store, ensemble, options, index_ptr, appearances_ptr, dump_buckets);

  ensure_parent_dir(output);
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open output: " + output);
  arm::write_rules_jsonl(out, result.rules);

  if (dump_buckets) {
    std::ofstream buckets(output + ".buckets.jsonl");
    for (const auto& group : result.buckets) {
      nlohmann::json line;
      line["table"] = group.table;
      line["signature"] = group.signature;
      line["products"] = group.products;
      buckets << line.dump() << "\n";
    }
  }

  std::fprintf(stderr,
               "rules: %zu\nproducts considered: %zu\ndegenerate excluded: %zu\ngiant buckets skipped: %zu\n",
               result.rules.size(), result.diagnostics.products_considered,
               result.diagnostics.degenerate_excluded, result.diagnostics.giant_buckets_skipped);
  write_manifest(output, config, "mine");
}

void cmd_eval(const config::RunConfig& config, const std::string& input,
              const std::string& output, const std::string& ranks_csv) {
  apply_thread_setting(config);
  const auto baskets = load_canonical(input);
  const auto windows = ingest::window_stream(baskets, config.window_days);

  std::vector<std::int64_t> query_windows = config.eval_query_windows;
  if (query_windows.empty()) {
    // default schedule: random one-day windows from the second half
    const std::int64_t half = static_cast<std::int64_t>(windows.size()) / 2;
    std::vector<std::int64_t> pool;
    for (std::int64_t w = half; w < static_cast<std::int64_t>(windows.size()); ++w)
      pool.push_back(w);
    Rng rng(sub_seed(config.seed, "eval-schedule"));
    rng.shuffle(pool);
    const std::size_t want =
        std::min(pool.size(), static_cast<std::size_t>(config.eval_query_window_count));
    query_windows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
    std::sort(query_windows.begin(), query_windows.end());
    if (query_windows.empty())
      throw std::runtime_error("eval: stream has no windows to query");
  }

  eval::ProtocolOptions options;
  options.trainer = trainer_options(config);
  options.num_negatives = config.eval_m;
  options.ks = config.eval_ks;
  options.uniform_eval_negatives = config.eval_uniform_negatives;
  options.single_target_per_basket = config.eval_single_target;
  options.keep_per_query_ranks = !ranks_csv.empty();

  const auto result = eval::run_protocol(windows, query_windows, options, config.seed);

  if (!ranks_csv.empty()) {
    ensure_parent_dir(ranks_csv);
    std::ofstream csv(ranks_csv);
    if (!csv) throw std::runtime_error("cannot open output: " + ranks_csv);
    csv << "window,query,scorer,rank\n";
    for (const auto& [window, query, scorer, rank] : result.per_query_ranks)
      csv << window << ',' << query << ',' << eval::scorer_name(scorer) << ',' << rank << '\n';
  }

  nlohmann::json doc;
  for (const auto& [scorer, report] : result.reports) {
    nlohmann::json entry;
    entry["mrr"] = report.mrr;
    entry["dcg"] = report.dcg;
    entry["queries"] = report.query_count;
    nlohmann::json recall;
    for (const auto& [k, r] : report.recall_at) recall[std::to_string(k)] = r;
    entry["recall"] = recall;
    doc[eval::scorer_name(scorer)] = entry;
  }
  doc["query_windows"] = query_windows;
  doc["skipped_small_baskets"] = result.skipped_small_baskets;

  ensure_parent_dir(output);
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open output: " + output);
  out << doc.dump(2) << "\n";
  write_manifest(output, config, "eval");
}

void cmd_analyze(const config::RunConfig& config, const std::string& input,
                 const std::string& output) {
  const auto baskets = load_canonical(input);
  Rng rng(sub_seed(config.seed, "analyze"));
  const auto result = eval::user_repetition_test(baskets, config.analyze_pairs, rng);

  nlohmann::json doc;
  doc["t_stat"] = result.t_stat;
  doc["p_value"] = result.p_value;
  doc["mean_same"] = result.mean_same;
  doc["mean_diff"] = result.mean_diff;
  doc["pairs"] = result.pairs;

  ensure_parent_dir(output);
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open output: " + output);
  out << doc.dump(2) << "\n";
  write_manifest(output, config, "analyze");
}

}  // namespace omba::cli
