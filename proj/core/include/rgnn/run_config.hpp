#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rgnn/data.hpp"
#include "rgnn/ensemble.hpp"
#include "rgnn/network.hpp"

namespace rgnn {

struct IdxSource {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::optional<std::filesystem::path> test_images;
  std::optional<std::filesystem::path> test_labels;
};

struct CsvSource {
  std::filesystem::path train;
  std::optional<std::filesystem::path> test;
  int label_column = -1;
  bool has_header = true;
};

struct DatasetConfig {
  std::variant<IdxSource, CsvSource> source;
  // Without an explicit test set, this fraction of the training file is held
  // out (0 = no test set).
  double test_fraction = 0.0;
  bool stratified = true;
  std::optional<Index> limit_train;  // keep the first n training rows
  std::optional<Index> limit_test;
};

/// One experiment. JSON schema (all keys except dataset and
/// architecture.graphs are optional):
///
///   {
///     "dataset": {"format": "idx", "train_images": "...", "train_labels": "...",
///                 "test_images": "...", "test_labels": "...",
///                 "limit_train": 10000, "limit_test": 10000}
///              | {"format": "csv", "train": "...", "test": "...",
///                 "label_column": -1, "has_header": true,
///                 "test_fraction": 0.2, "stratified": true},
///     "architecture": {"graphs": [{"neurons": 20, "p": 0.5}, ...],
///                      "d": 10, "m": 5, "sigma": 1.0, "sigma_hidden": 1.0,
///                      "combiner_scale": 1.0, "enhancement_scale": 1.0,
///                      "activation": "tanh", "sae_hidden": 128, "sae_lambda": 0.001},
///     "solver": {"rho": 1.0, "lambda": 0.001, "max_iter": 100, "tail_window": 10,
///                "ema": true, "regularizer": "l2", "tolerance": 1e-6,
///                "batch_size": 0, "epochs": 1, "iters_per_batch": 0},
///     "ensemble": {"member_count": 25, "p_low": 0.1, "p_high": 0.9,
///                  "shared_sae": true, "threads": 1, "sweep_counts": [5, 10, 25]},
///     "seed": 1,
///     "chunk_rows": 2048,
///     "out": "runs/example"
///   }
///
/// Relative paths are resolved against the directory of the config file.
/// batch_size 0 selects the streamed full-batch solve.
struct RunConfig {
  DatasetConfig dataset;
  ArchitectureConfig architecture;
  AdmmConfig solver;
  std::optional<MinibatchOptions> minibatch;
  EnsembleConfig ensemble;
  std::vector<std::size_t> sweep_counts;
  std::uint64_t seed = 1;
  Index chunk_rows = 2048;
  std::filesystem::path out = "out";

  TrainOptions train_options() const;
};

/// Parses JSON text. `overrides` are `dotted.key=value` strings applied
/// before validation; the value is parsed as JSON, or taken as a string when
/// that fails. Throws ConfigError with a line/column for syntax errors and
/// the dotted key for constraint violations.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::span<const std::string> overrides = {});

/// Reads the file (missing file: ConfigError) and parses it relative to its
/// directory.
RunConfig load_run_config(const std::filesystem::path& path,
                          std::span<const std::string> overrides = {});

struct LoadedData {
  LabeledDataset train;
  std::optional<LabeledDataset> test;
};

/// Loads, splits and truncates as configured. Train and test share the
/// class count of the larger of the two.
LoadedData load_data(const DatasetConfig& cfg, std::uint64_t seed);

}  // namespace rgnn
