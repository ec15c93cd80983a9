#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rgnn/network.hpp"

namespace rgnn {

struct EnsembleConfig {
  std::size_t member_count = 25;
  double p_low = 0.1;
  double p_high = 0.9;
  std::uint64_t master_seed = 0;
  bool shared_sae = true;   // one SAE fit reused by every member
  std::size_t threads = 1;  // 0 = hardware concurrency

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// i.i.d. U[p_low, p_high] draws; a value within 1e-9 of an earlier one is
/// redrawn. Deterministic under master_seed.
std::vector<double> sample_probabilities(const EnsembleConfig& cfg);

/// Seed of member m (0-based), independent of scheduling.
std::uint64_t member_seed(std::uint64_t master_seed, std::size_t member);

struct EnsembleTraining {
  std::vector<RgnnModel> models;
  std::vector<double> p_values;
};

/// Member m uses `arch` with every graph's p set to p_values[m]. The first
/// failing member (in member order) aborts the run with its exception.
EnsembleTraining train_ensemble(const Matrix& x, std::span<const int> labels, int class_count,
                                const ArchitectureConfig& arch, const AdmmConfig& solver,
                                const EnsembleConfig& cfg, const TrainOptions& options = {});

/// Per-sample modal label over members (rows = members). Ties go to the
/// lowest label. Throws InvalidArgument on empty or ragged input.
std::vector<int> majority_vote(std::span<const std::vector<int>> member_predictions);

/// Accuracies are fractions in [0, 1]; ATE and MTE are error percentages.
struct EnsembleReport {
  std::vector<double> p_values;
  std::vector<double> member_accuracy;
  double ate = 0.0;
  double mte = 0.0;
  double joint_accuracy = 0.0;
  double outperformed_fraction = 0.0;  // members with accuracy < joint accuracy
};

/// Builds the report from stored member predictions.
EnsembleReport summarize_votes(std::span<const std::vector<int>> member_predictions,
                               std::span<const int> truth, std::span<const double> p_values);

/// Predicts with every member and summarizes. Throws InvalidData on an
/// empty test set.
EnsembleReport evaluate_ensemble(std::span<const RgnnModel> models, const Matrix& x_test,
                                 std::span<const int> labels_test,
                                 std::span<const double> p_values = {});

struct SweepRow {
  std::size_t count;
  double ate;
  double mte;
  double joint_accuracy;
};

/// Report over the first `count` members, for each requested count.
std::vector<SweepRow> sweep_member_counts(std::span<const std::vector<int>> member_predictions,
                                          std::span<const int> truth,
                                          std::span<const std::size_t> counts);

/// `member,p,accuracy` rows, then `JOINT,_,accuracy`.
void write_ensemble_csv(std::ostream& out, const EnsembleReport& report);

/// `count,ate,mte,joint`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace rgnn
