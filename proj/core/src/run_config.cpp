#include "rgnn/run_config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json_io.hpp"
#include "rgnn/error.hpp"

namespace rgnn {
namespace {

using json_io::json;
using json_io::ObjectReader;

constexpr std::uint64_t kSplitStream = 7;

std::string locate(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(fmt::format("override `{}` is not of the form key=value", assignment));
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError(fmt::format("override key `{}` is malformed", key));
    if (node->is_null()) *node = json::object();
    if (!node->is_object())
      throw ConfigError(fmt::format("override `{}`: parent of `{}` is not an object", key, part));
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const auto parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<Index> read_limit(ObjectReader& r, std::string_view key) {
  const auto v = r.integer(key, 0);
  if (v < 0) throw ConfigError(fmt::format("{} must be non-negative", r.key_path(key)));
  if (v == 0) return std::nullopt;
  return static_cast<Index>(v);
}

DatasetConfig dataset_from_json(ObjectReader r, const std::filesystem::path& base) {
  DatasetConfig cfg;
  const auto format = r.text("format");
  if (format == "idx") {
    IdxSource src;
    src.train_images = resolve(base, r.text("train_images"));
    src.train_labels = resolve(base, r.text("train_labels"));
    if (r.has("test_images") != r.has("test_labels"))
      throw ConfigError(fmt::format("{} and {} must be given together", r.key_path("test_images"),
                                    r.key_path("test_labels")));
    if (r.has("test_images")) {
      src.test_images = resolve(base, r.text("test_images"));
      src.test_labels = resolve(base, r.text("test_labels"));
    }
    cfg.source = src;
  } else if (format == "csv") {
    CsvSource src;
    src.train = resolve(base, r.text("train"));
    if (r.has("test")) src.test = resolve(base, r.text("test"));
    src.label_column = static_cast<int>(r.integer("label_column", -1));
    src.has_header = r.flag("has_header", true);
    cfg.source = src;
  } else {
    throw ConfigError(fmt::format("{} must be \"idx\" or \"csv\", got \"{}\"", r.key_path("format"),
                                  format));
  }
  cfg.test_fraction = r.number("test_fraction", 0.0);
  if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0))
    throw ConfigError(fmt::format("{} must lie in [0, 1)", r.key_path("test_fraction")));
  cfg.stratified = r.flag("stratified", true);
  cfg.limit_train = read_limit(r, "limit_train");
  cfg.limit_test = read_limit(r, "limit_test");
  r.finish();
  return cfg;
}

RunConfig config_from_json(const json& root, const std::filesystem::path& base) {
  RunConfig cfg;
  ObjectReader r(root, "");
  cfg.dataset = dataset_from_json(r.object("dataset"), base);

  auto arch = r.object("architecture");
  cfg.architecture = json_io::architecture_from_json(arch);
  arch.finish();

  if (r.has("solver")) {
    auto solver = r.object("solver");
    cfg.solver = json_io::solver_from_json(solver);
    const auto batch = solver.count("batch_size", 0);
    const auto epochs = solver.count("epochs", 1);
    const auto iters = solver.count("iters_per_batch", 0);
    if (epochs < 1) throw ConfigError("solver.epochs must be at least 1");
    if (batch > 0) cfg.minibatch = MinibatchOptions{batch, epochs, iters, 0};
    solver.finish();
  }

  cfg.seed = r.seed("seed", cfg.seed);
  if (r.has("ensemble")) {
    auto e = r.object("ensemble");
    cfg.ensemble.member_count = e.count("member_count", cfg.ensemble.member_count);
    cfg.ensemble.p_low = e.number("p_low", cfg.ensemble.p_low);
    cfg.ensemble.p_high = e.number("p_high", cfg.ensemble.p_high);
    cfg.ensemble.shared_sae = e.flag("shared_sae", cfg.ensemble.shared_sae);
    cfg.ensemble.threads = e.count("threads", cfg.ensemble.threads);
    if (e.has("sweep_counts")) {
      const auto& counts = e.raw("sweep_counts");
      if (!counts.is_array())
        throw ConfigError(fmt::format("{} must be an array", e.key_path("sweep_counts")));
      for (const auto& c : counts) {
        if (!c.is_number_integer() || c.get<std::int64_t>() < 1 ||
            c.get<std::size_t>() > cfg.ensemble.member_count)
          throw ConfigError(fmt::format("{} entries must lie in 1..ensemble.member_count",
                                        e.key_path("sweep_counts")));
        cfg.sweep_counts.push_back(c.get<std::size_t>());
      }
    }
    e.finish();
  }
  cfg.ensemble.master_seed = cfg.seed;
  try {
    cfg.ensemble.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  const auto chunk = r.integer("chunk_rows", cfg.chunk_rows);
  if (chunk < 1) throw ConfigError("chunk_rows must be positive");
  cfg.chunk_rows = static_cast<Index>(chunk);
  cfg.out = resolve(base, r.text("out", "out"));
  if (cfg.minibatch) cfg.minibatch->shuffle_seed = derive_seed(cfg.seed, kSplitStream + 1);
  r.finish();
  return cfg;
}

LabeledDataset with_class_count(LabeledDataset ds, int class_count) {
  if (ds.class_count == class_count) return ds;
  return make_dataset(std::move(ds.samples), std::move(ds.labels), class_count);
}

}  // namespace

TrainOptions RunConfig::train_options() const {
  TrainOptions options;
  options.chunk_rows = chunk_rows;
  options.minibatch = minibatch;
  return options;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::span<const std::string> overrides) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann prefixes its own location; keep only the description.
    std::string detail = e.what();
    if (const auto at = detail.find(": ", detail.find("column")); at != std::string::npos)
      detail = detail.substr(at + 2);
    throw ConfigError(fmt::format("config syntax error at {}: {}", locate(text, e.byte), detail));
  }
  for (const auto& o : overrides) apply_override(root, o);
  try {
    return config_from_json(root, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path(), overrides);
}

LoadedData load_data(const DatasetConfig& cfg, std::uint64_t seed) {
  LoadedData data;
  if (const auto* idx = std::get_if<IdxSource>(&cfg.source)) {
    data.train = load_idx(idx->train_images, idx->train_labels);
    if (idx->test_images) data.test = load_idx(*idx->test_images, *idx->test_labels);
  } else {
    const auto& csv = std::get<CsvSource>(cfg.source);
    data.train = load_csv(csv.train, csv.label_column, csv.has_header);
    if (csv.test) {
      data.test = load_csv(*csv.test, csv.label_column, csv.has_header);
      if (data.test->class_count != data.train.class_count)
        throw InvalidData(fmt::format("test CSV has {} classes, training CSV has {}",
                                      data.test->class_count, data.train.class_count));
    }
  }
  if (!data.test && cfg.test_fraction > 0.0) {
    auto [train, test] = split(data.train, cfg.test_fraction, derive_seed(seed, kSplitStream),
                               cfg.stratified);
    data.train = std::move(train);
    data.test = std::move(test);
  }
  if (cfg.limit_train) data.train = head(data.train, *cfg.limit_train);
  if (data.test && cfg.limit_test) data.test = head(*data.test, *cfg.limit_test);
  if (data.test) {
    const int classes = std::max(data.train.class_count, data.test->class_count);
    data.train = with_class_count(std::move(data.train), classes);
    data.test = with_class_count(std::move(*data.test), classes);
  }
  return data;
}

}  // namespace rgnn
