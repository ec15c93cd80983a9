#include "rgnn/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "rgnn/error.hpp"
#include "rgnn/random.hpp"

namespace rgnn {
namespace {

constexpr std::uint64_t kProbabilityStream = 1;
constexpr std::uint64_t kSharedSaeStream = 2;
constexpr std::uint64_t kMemberStream = 1000;
constexpr double kDuplicateResolution = 1e-9;

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

void check_votes(std::span<const std::vector<int>> votes, std::size_t samples) {
  if (votes.empty()) throw InvalidArgument("no member predictions");
  for (std::size_t m = 0; m < votes.size(); ++m)
    if (votes[m].size() != samples)
      throw InvalidArgument(fmt::format("member {} has {} predictions, expected {}", m,
                                        votes[m].size(), samples));
}

}  // namespace

void EnsembleConfig::validate() const {
  if (member_count == 0) throw InvalidArgument("ensemble.member_count must be at least 1");
  if (!(p_low > 0.0 && p_low < p_high && p_high < 1.0))
    throw InvalidArgument(fmt::format(
        "ensemble.p_low/p_high must satisfy 0 < p_low < p_high < 1, got {} and {}", p_low,
        p_high));
}

std::vector<double> sample_probabilities(const EnsembleConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(derive_seed(cfg.master_seed, kProbabilityStream));
  std::vector<double> values;
  values.reserve(cfg.member_count);
  while (values.size() < cfg.member_count) {
    const double p = rng.uniform(cfg.p_low, cfg.p_high);
    const bool duplicate = std::any_of(values.begin(), values.end(), [p](double q) {
      return std::abs(p - q) <= kDuplicateResolution;
    });
    if (!duplicate) values.push_back(p);
  }
  return values;
}

std::uint64_t member_seed(std::uint64_t master_seed, std::size_t member) {
  return derive_seed(master_seed, kMemberStream + member);
}

EnsembleTraining train_ensemble(const Matrix& x, std::span<const int> labels, int class_count,
                                const ArchitectureConfig& arch, const AdmmConfig& solver,
                                const EnsembleConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  arch.validate();
  solver.validate();
  EnsembleTraining out;
  out.p_values = sample_probabilities(cfg);
  const std::size_t members = cfg.member_count;

  TrainOptions member_options = options;
  if (cfg.shared_sae && !member_options.shared_sae)
    member_options.shared_sae = fit_sae(x, arch.sae_hidden, arch.sae_lambda,
                                        derive_seed(cfg.master_seed, kSharedSaeStream), solver);

  std::vector<std::optional<RgnnModel>> trained(members);
  std::vector<std::exception_ptr> errors(members);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t m = next++; m < members && !failed; m = next++) {
      try {
        ArchitectureConfig member_arch = arch;
        for (auto& g : member_arch.graphs) g.p = out.p_values[m];
        trained[m] = train_rgnn(x, labels, class_count, member_arch, solver,
                                member_seed(cfg.master_seed, m), member_options)
                         .model;
      } catch (...) {
        errors[m] = std::current_exception();
        failed = true;
      }
    }
  };

  std::size_t threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  threads = std::clamp<std::size_t>(threads, 1, members);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);
  for (auto& model : trained) out.models.push_back(std::move(*model));
  return out;
}

std::vector<int> majority_vote(std::span<const std::vector<int>> member_predictions) {
  if (member_predictions.empty()) throw InvalidArgument("majority_vote needs at least one member");
  const std::size_t samples = member_predictions.front().size();
  check_votes(member_predictions, samples);

  std::vector<int> joint(samples);
  std::vector<std::size_t> tally;
  for (std::size_t i = 0; i < samples; ++i) {
    int top = 0;
    for (const auto& votes : member_predictions) {
      if (votes[i] < 0) throw InvalidArgument(fmt::format("negative label {}", votes[i]));
      top = std::max(top, votes[i]);
    }
    tally.assign(static_cast<std::size_t>(top) + 1, 0);
    for (const auto& votes : member_predictions) ++tally[static_cast<std::size_t>(votes[i])];
    joint[i] = static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  }
  return joint;
}

EnsembleReport summarize_votes(std::span<const std::vector<int>> member_predictions,
                               std::span<const int> truth, std::span<const double> p_values) {
  if (truth.empty()) throw InvalidData("ensemble evaluation on an empty test set");
  check_votes(member_predictions, truth.size());
  if (!p_values.empty() && p_values.size() != member_predictions.size())
    throw InvalidArgument("one p value per member expected");

  EnsembleReport report;
  report.p_values.assign(p_values.begin(), p_values.end());
  for (const auto& votes : member_predictions)
    report.member_accuracy.push_back(accuracy(votes, truth));
  const auto& acc = report.member_accuracy;
  const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
  report.ate = 100.0 * (1.0 - mean);
  report.mte = 100.0 * (1.0 - *std::max_element(acc.begin(), acc.end()));
  report.joint_accuracy = accuracy(majority_vote(member_predictions), truth);
  const auto beaten = std::count_if(acc.begin(), acc.end(),
                                    [&](double a) { return a < report.joint_accuracy; });
  report.outperformed_fraction = static_cast<double>(beaten) / static_cast<double>(acc.size());
  return report;
}

EnsembleReport evaluate_ensemble(std::span<const RgnnModel> models, const Matrix& x_test,
                                 std::span<const int> labels_test,
                                 std::span<const double> p_values) {
  if (models.empty()) throw InvalidArgument("evaluate_ensemble needs at least one model");
  if (labels_test.empty()) throw InvalidData("ensemble evaluation on an empty test set");
  if (static_cast<std::size_t>(x_test.rows()) != labels_test.size())
    throw InvalidArgument(fmt::format("{} test samples but {} labels", x_test.rows(),
                                      labels_test.size()));
  std::vector<std::vector<int>> votes;
  votes.reserve(models.size());
  for (const auto& model : models) votes.push_back(predict(model, x_test).labels);
  return summarize_votes(votes, labels_test, p_values);
}

std::vector<SweepRow> sweep_member_counts(std::span<const std::vector<int>> member_predictions,
                                          std::span<const int> truth,
                                          std::span<const std::size_t> counts) {
  std::vector<SweepRow> rows;
  for (std::size_t count : counts) {
    if (count == 0 || count > member_predictions.size())
      throw InvalidArgument(fmt::format("sweep count {} outside 1..{}", count,
                                        member_predictions.size()));
    const auto report = summarize_votes(member_predictions.first(count), truth, {});
    rows.push_back({count, report.ate, report.mte, report.joint_accuracy});
  }
  return rows;
}

void write_ensemble_csv(std::ostream& out, const EnsembleReport& report) {
  out << "member,p,accuracy\n";
  for (std::size_t m = 0; m < report.member_accuracy.size(); ++m) {
    const std::string p = m < report.p_values.size() ? fmt::format("{}", report.p_values[m]) : "_";
    out << fmt::format("{},{},{}\n", m, p, report.member_accuracy[m]);
  }
  out << fmt::format("JOINT,_,{}\n", report.joint_accuracy);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "count,ate,mte,joint\n";
  for (const auto& row : rows)
    out << fmt::format("{},{},{},{}\n", row.count, row.ate, row.mte, row.joint_accuracy);
}

}  // namespace rgnn
