#pragma once

#include <string>

#include "omba/config.hpp"

namespace omba::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

/// Each command is re-runnable and writes nothing outside the given output
/// paths (plus a `<output>.manifest.json` beside each artifact carrying the
/// config hash, master seed, and format versions).

/// Raw transactions -> canonical CSV + a basket/user/product/row summary on
/// stdout.
void cmd_ingest(const config::RunConfig& config, const std::string& input,
                const std::string& output);

/// Canonical stream -> embedding snapshot + per-window JSONL training log
/// (`<output>.trainlog.jsonl`).
void cmd_train(const config::RunConfig& config, const std::string& input,
               const std::string& output);

/// Snapshot -> ranked rules JSONL. `transactions` (optional) attaches
/// empirical lift and enables the min-appearances filter.
void cmd_mine(const config::RunConfig& config, const std::string& snapshot_path,
              const std::string& output, const std::string& transactions = "",
              bool dump_buckets = false);

/// Canonical stream -> retrieval report JSON over the configured (or
/// auto-picked) query windows. `ranks_csv`, when nonempty, also dumps one
/// `window,query,scorer,rank` row per evaluated query.
void cmd_eval(const config::RunConfig& config, const std::string& input,
              const std::string& output, const std::string& ranks_csv = "");

/// Canonical stream -> user-repetition test result JSON.
void cmd_analyze(const config::RunConfig& config, const std::string& input,
                 const std::string& output);

}  // namespace omba::cli
