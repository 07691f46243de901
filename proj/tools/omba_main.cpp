// omba: ingest -> train -> mine -> eval -> analyze over transaction streams.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "omba/cli.hpp"
#include "omba/config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value, win over file values
};

omba::config::RunConfig resolve_config(const CommonArgs& args) {
  omba::config::RunConfig config;
  if (!args.config_path.empty())
    config = omba::config::load_config_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw omba::config::ConfigError("override must be key=value: " + kv);
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    auto strip = [](std::string& s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    };
    strip(key);
    strip(value);
    omba::config::apply_override(config, key, value);
  }
  return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "flat key = value config file");
  cmd->add_option("-s,--set", args.overrides, "config override key=value (repeatable, wins over the file)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online market-basket analysis: joint product/user embeddings with LSH rule mining"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string input, output, snapshot_path, transactions;
  bool dump_buckets = false;

  auto* ingest = app.add_subcommand("ingest", "parse raw transactions into the canonical CSV");
  add_common(ingest, common);
  ingest->add_option("-i,--input", input, "raw transaction file")->required();
  ingest->add_option("-o,--output", output, "canonical CSV path")->required();

  auto* train = app.add_subcommand("train", "train embeddings over the windowed stream");
  add_common(train, common);
  train->add_option("-i,--input", input, "canonical CSV")->required();
  train->add_option("-o,--output", output, "embedding snapshot path")->required();

  auto* mine = app.add_subcommand("mine", "mine association rules from a snapshot");
  add_common(mine, common);
  mine->add_option("--snapshot", snapshot_path, "embedding snapshot")->required();
  mine->add_option("-o,--output", output, "rules JSONL path")->required();
  mine->add_option("--transactions", transactions, "canonical CSV for empirical lift");
  mine->add_flag("--dump-buckets", dump_buckets, "also write raw bucket groups");

  std::string ranks_csv;
  auto* evaluate = app.add_subcommand("eval", "run the intra-basket retrieval protocol");
  add_common(evaluate, common);
  evaluate->add_option("-i,--input", input, "canonical CSV")->required();
  evaluate->add_option("-o,--output", output, "report JSON path")->required();
  evaluate->add_option("--ranks-csv", ranks_csv, "also dump per-query ranks as CSV");

  auto* analyze = app.add_subcommand("analyze", "user-repetition t-test over the stream");
  add_common(analyze, common);
  analyze->add_option("-i,--input", input, "canonical CSV")->required();
  analyze->add_option("-o,--output", output, "result JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : omba::cli::kUsageError;
  }

  try {
    const auto config = resolve_config(common);
    if (ingest->parsed()) omba::cli::cmd_ingest(config, input, output);
    if (train->parsed()) omba::cli::cmd_train(config, input, output);
    if (mine->parsed()) omba::cli::cmd_mine(config, snapshot_path, output, transactions, dump_buckets);
    if (evaluate->parsed()) omba::cli::cmd_eval(config, input, output, ranks_csv);
    if (analyze->parsed()) omba::cli::cmd_analyze(config, input, output);
    return omba::cli::kOk;
  } catch (const omba::config::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return omba::cli::kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return omba::cli::kRuntimeError;
  }
}
