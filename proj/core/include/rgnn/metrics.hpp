#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rgnn/solver.hpp"

namespace rgnn {

/// counts(t, p): samples of true class t predicted as p.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  int class_count() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
  std::int64_t correct() const { return counts.diagonal().sum(); }
};

/// Throws InvalidArgument on length mismatch or a label outside 0..C-1.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int class_count);

/// trace / total. Throws InvalidData for an empty matrix.
double overall_accuracy(const ConfusionMatrix& cm);

struct ClassStats {
  double precision = 0.0;
  double sensitivity = 0.0;
  // Set when the denominator was zero and the value was defined as 0.
  bool precision_undefined = false;
  bool sensitivity_undefined = false;
};

std::vector<ClassStats> per_class_stats(const ConfusionMatrix& cm);

struct CurvePoint {
  double threshold;
  double x;
  double y;
};

/// Points ordered by strictly decreasing threshold. The first point has
/// threshold +inf; a sample counts as positive when score >= threshold.
using CurveSeries = std::vector<CurvePoint>;

/// (FPR, TPR) from (0, 0) to (1, 1). `positive` holds 0/1 truth values.
/// Throws InvalidData unless both classes occur.
CurveSeries roc_points(std::span<const double> scores, std::span<const int> positive);

/// (recall, precision), starting at (0, 1). Throws InvalidData when there
/// is no positive sample.
CurveSeries pr_points(std::span<const double> scores, std::span<const int> positive);

/// Trapezoidal area under the (x, y) polyline.
double trapezoid_auc(const CurveSeries& curve);

/// Row-wise softmax, shifted by the row maximum for stability. Curves are
/// computed on these probabilities rather than on raw ridge scores.
Matrix softmax_rows(const Matrix& scores);

/// One-vs-rest curves for each class column of `scores`. Classes that are
/// absent from `truth` or cover all of it have no curves.
struct OneVsRest {
  std::vector<std::optional<CurveSeries>> roc;
  std::vector<std::optional<CurveSeries>> pr;
};

OneVsRest one_vs_rest(const Matrix& scores, std::span<const int> truth);

/// `true,pred,count`, one row per cell in row-major order.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

/// `class,threshold,x,y`; classes without curves are skipped.
void write_curves_csv(std::ostream& out, std::span<const std::optional<CurveSeries>> curves);

/// `class,precision,sensitivity,precision_undefined,sensitivity_undefined`.
void write_class_stats_csv(std::ostream& out, std::span<const ClassStats> stats);

}  // namespace rgnn
