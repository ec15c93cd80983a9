#include "rgnn/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "json_io.hpp"
#include "rgnn/ensemble.hpp"
#include "rgnn/error.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/metrics.hpp"
#include "rgnn/model_io.hpp"
#include "rgnn/run_config.hpp"

namespace rgnn {
namespace {

using nlohmann::json;

std::ostream& log_of(const CommandContext& ctx) { return ctx.log ? *ctx.log : std::cout; }

std::filesystem::path prepare_out(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(),
                                        ec.message()));
  return dir;
}

template <typename Write>
void write_file(const std::filesystem::path& path, Write write) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  write(out);
  if (!out) throw ConfigError(fmt::format("write to {} failed", path.string()));
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

RunConfig load_config(const std::filesystem::path& path, const CommandContext& ctx) {
  auto cfg = load_run_config(path, ctx.overrides);
  if (ctx.out) cfg.out = *ctx.out;
  return cfg;
}

json class_stats_json(std::span<const ClassStats> stats) {
  json rows = json::array();
  for (std::size_t c = 0; c < stats.size(); ++c)
    rows.push_back({{"class", c},
                    {"precision", stats[c].precision},
                    {"sensitivity", stats[c].sensitivity},
                    {"precision_undefined", stats[c].precision_undefined},
                    {"sensitivity_undefined", stats[c].sensitivity_undefined}});
  return rows;
}

// Writes the metric CSVs for one evaluated set and returns its report entry.
json write_evaluation(const std::filesystem::path& dir, const Prediction& prediction,
                      const LabeledDataset& ds) {
  const auto cm = confusion(ds.labels, prediction.labels, ds.class_count);
  const auto stats = per_class_stats(cm);
  const auto curves = one_vs_rest(softmax_rows(prediction.scores), ds.labels);
  write_file(dir / "confusion.csv", [&](std::ostream& out) { write_confusion_csv(out, cm); });
  write_file(dir / "roc.csv", [&](std::ostream& out) { write_curves_csv(out, curves.roc); });
  write_file(dir / "pr.csv", [&](std::ostream& out) { write_curves_csv(out, curves.pr); });
  write_file(dir / "class_stats.csv",
             [&](std::ostream& out) { write_class_stats_csv(out, stats); });
  json auc = json::array();
  for (const auto& roc : curves.roc) auc.push_back(roc ? json(trapezoid_auc(*roc)) : json(nullptr));
  return {{"samples", ds.size()},
          {"accuracy", overall_accuracy(cm)},
          {"per_class", class_stats_json(stats)},
          {"roc_auc", auc}};
}

double accuracy_of(const Prediction& prediction, const LabeledDataset& ds) {
  return overall_accuracy(confusion(ds.labels, prediction.labels, ds.class_count));
}

json config_snapshot(const RunConfig& cfg) {
  return {{"architecture", json_io::to_json(cfg.architecture)},
          {"solver", json_io::to_json(cfg.solver)},
          {"seed", cfg.seed}};
}

LabeledDataset require_test(const LoadedData& data) {
  if (!data.test)
    throw InvalidData(
        "no test set: set dataset.test_images/test_labels, dataset.test or dataset.test_fraction");
  return *data.test;
}

int run_ensemble(const std::filesystem::path& config_path, const CommandContext& ctx,
                 bool force_sweep) {
  auto cfg = load_config(config_path, ctx);
  const auto data = load_data(cfg.dataset, cfg.seed);
  const auto test = require_test(data);
  const auto dir = prepare_out(cfg.out);
  auto& log = log_of(ctx);

  const auto trained = train_ensemble(data.train.samples, data.train.labels,
                                      data.train.class_count, cfg.architecture, cfg.solver,
                                      cfg.ensemble, cfg.train_options());
  std::vector<std::vector<int>> votes;
  for (std::size_t m = 0; m < trained.models.size(); ++m) {
    votes.push_back(predict(trained.models[m], test.samples, cfg.chunk_rows).labels);
    log << fmt::format("member {} p={:.4f}\n", m, trained.p_values[m]);
  }
  const auto report = summarize_votes(votes, test.labels, trained.p_values);
  write_file(dir / "ensemble.csv", [&](std::ostream& out) { write_ensemble_csv(out, report); });

  auto counts = cfg.sweep_counts;
  if (force_sweep && counts.empty()) {
    for (std::size_t c : {5, 10, 25})
      if (c < cfg.ensemble.member_count) counts.push_back(c);
    counts.push_back(cfg.ensemble.member_count);
  }
  json sweep = json::array();
  if (!counts.empty()) {
    const auto rows = sweep_member_counts(votes, test.labels, counts);
    write_file(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, rows); });
    for (const auto& row : rows)
      sweep.push_back({{"count", row.count}, {"ate", row.ate}, {"mte", row.mte},
                       {"joint_accuracy", row.joint_accuracy}});
  }
  write_json(dir / "ensemble_report.json",
             {{"config", config_snapshot(cfg)},
              {"members", report.member_accuracy.size()},
              {"p_values", report.p_values},
              {"member_accuracy", report.member_accuracy},
              {"ate", report.ate},
              {"mte", report.mte},
              {"joint_accuracy", report.joint_accuracy},
              {"outperformed_fraction", report.outperformed_fraction},
              {"sweep", sweep}});
  log << fmt::format("ATE {:.2f}%  MTE {:.2f}%  joint accuracy {:.4f}\n", report.ate, report.mte,
                     report.joint_accuracy);
  return kExitOk;
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidData& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InvalidState& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const VersionError& e) {
    err << "model version error: " << e.what() << '\n';
    return kExitArtifact;
  } catch (const ChecksumError& e) {
    err << "model checksum error: " << e.what() << '\n';
    return kExitArtifact;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::bad_alloc&) {
    err << "out of memory\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_gen_graph(std::uint32_t n, double p, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_file,
                  const CommandContext& ctx) {
  const auto text = to_text(generate_random_dag(n, p, seed));
  if (out_file) {
    write_file(*out_file, [&](std::ostream& out) { out << text; });
  } else {
    log_of(ctx) << text;
  }
  return kExitOk;
}

int cmd_train(const std::filesystem::path& config_path, const CommandContext& ctx) {
  const auto cfg = load_config(config_path, ctx);
  const auto data = load_data(cfg.dataset, cfg.seed);
  const auto dir = prepare_out(cfg.out);
  auto& log = log_of(ctx);

  const auto result = train_rgnn(data.train.samples, data.train.labels, data.train.class_count,
                                 cfg.architecture, cfg.solver, cfg.seed, cfg.train_options());
  save_model(dir / "model.rgnn", result.model);
  write_file(dir / "trace.csv", [&](std::ostream& out) { write_trace_csv(out, result.trace); });

  const auto train_prediction = predict(result.model, data.train.samples, cfg.chunk_rows);
  json report = {{"config", config_snapshot(cfg)},
                 {"iterations", result.trace.size()},
                 {"epoch_costs", result.epoch_costs},
                 {"train", {{"samples", data.train.size()},
                            {"accuracy", accuracy_of(train_prediction, data.train)}}}};
  log << fmt::format("train accuracy {:.4f} on {} samples\n",
                     report["train"]["accuracy"].get<double>(), data.train.size());
  if (data.test) {
    const auto prediction = predict(result.model, data.test->samples, cfg.chunk_rows);
    report["test"] = write_evaluation(dir, prediction, *data.test);
    log << fmt::format("test accuracy {:.4f} on {} samples\n",
                       report["test"]["accuracy"].get<double>(), data.test->size());
  }
  write_json(dir / "report.json", report);
  return kExitOk;
}

int cmd_eval(const std::filesystem::path& model_path, const EvalDataset& data,
             const CommandContext& ctx) {
  const auto model = load_model(model_path);
  LabeledDataset ds;
  if (data.config) {
    const auto cfg = load_run_config(*data.config, ctx.overrides);
    auto loaded = load_data(cfg.dataset, cfg.seed);
    ds = data.use_train_split ? std::move(loaded.train) : require_test(loaded);
  } else if (data.images && data.labels) {
    ds = load_idx(*data.images, *data.labels);
  } else if (data.csv) {
    ds = load_csv(*data.csv, data.label_column, data.has_header);
  } else {
    throw ConfigError("eval needs --config, --images with --labels, or --csv");
  }
  if (ds.class_count > model.class_count)
    throw InvalidData(fmt::format("dataset has {} classes, model was trained on {}",
                                  ds.class_count, model.class_count));
  if (ds.class_count < model.class_count)
    ds = make_dataset(std::move(ds.samples), std::move(ds.labels),
                      static_cast<int>(model.class_count));
  if (ds.features() != model.input_dim())
    throw InvalidData(fmt::format("dataset has {} features, model expects {}", ds.features(),
                                  model.input_dim()));

  const auto dir = prepare_out(ctx.out ? *ctx.out : model_path.parent_path());
  const auto prediction = predict(model, ds.samples);
  const auto report = write_evaluation(dir, prediction, ds);
  write_json(dir / "eval_report.json", report);
  log_of(ctx) << fmt::format("accuracy {:.4f} on {} samples\n", report["accuracy"].get<double>(),
                             ds.size());
  return kExitOk;
}

int cmd_ensemble(const std::filesystem::path& config_path, const CommandContext& ctx) {
  return run_ensemble(config_path, ctx, false);
}

int cmd_sweep(const std::filesystem::path& config_path, const CommandContext& ctx) {
  return run_ensemble(config_path, ctx, true);
}

}  // namespace rgnn
