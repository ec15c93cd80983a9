#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rgnn {

/// Process exit codes of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,    // ConfigError, InvalidArgument, unknown failures
  kExitData = 2,      // InvalidData, FormatError, unreadable inputs
  kExitNumeric = 3,   // NumericFailure, InvalidState
  kExitArtifact = 4,  // VersionError, ChecksumError
};

/// Runs `body`, mapping exceptions to exit codes; the message goes to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

struct CommandContext {
  std::vector<std::string> overrides;     // `key=value`, applied to the config
  std::optional<std::filesystem::path> out;  // replaces the config's out dir
  std::ostream* log = nullptr;            // progress; deterministic content only
};

/// Writes the graph text format to `out_file`, or to ctx.log when empty.
int cmd_gen_graph(std::uint32_t n, double p, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_file, const CommandContext& ctx);

/// Trains one RGNN. Writes model.rgnn, trace.csv and report.json; when a
/// test set is configured also confusion.csv, roc.csv, pr.csv and
/// class_stats.csv for it.
int cmd_train(const std::filesystem::path& config_path, const CommandContext& ctx);

struct EvalDataset {
  // Either a config (its train or test split) or explicit files.
  std::optional<std::filesystem::path> config;
  bool use_train_split = false;
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> csv;
  int label_column = -1;
  bool has_header = true;
};

/// Writes confusion.csv, roc.csv, pr.csv, class_stats.csv and
/// eval_report.json under ctx.out (default: the model's directory).
int cmd_eval(const std::filesystem::path& model_path, const EvalDataset& data,
             const CommandContext& ctx);

/// Trains the ensemble and writes ensemble.csv, ensemble_report.json and,
/// when ensemble.sweep_counts is set, sweep.csv.
int cmd_ensemble(const std::filesystem::path& config_path, const CommandContext& ctx);

/// Like cmd_ensemble, but always writes sweep.csv; counts default to
/// {5, 10, 25} clipped to the member count, plus the member count itself.
int cmd_sweep(const std::filesystem::path& config_path, const CommandContext& ctx);

}  // namespace rgnn
