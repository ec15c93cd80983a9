#include "rgnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "rgnn/error.hpp"

namespace rgnn {
namespace {

struct Counts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

Counts count_truth(std::span<const double> scores, std::span<const int> positive) {
  if (scores.size() != positive.size())
    throw InvalidArgument(fmt::format("curve: {} scores but {} labels", scores.size(),
                                      positive.size()));
  Counts c;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    if (positive[i] != 0 && positive[i] != 1)
      throw InvalidArgument(fmt::format("curve: truth value {} is not 0/1", positive[i]));
    if (!std::isfinite(scores[i])) throw InvalidData("curve: non-finite score");
    (positive[i] == 1 ? c.positives : c.negatives)++;
  }
  return c;
}

// Calls visit(threshold, tp, fp) once per distinct score, highest first.
template <typename Visit>
void sweep(std::span<const double> scores, std::span<const int> positive, Visit visit) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (positive[order[k]] == 1 ? tp : fp)++;
      ++k;
    }
    visit(threshold, tp, fp);
  }
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int class_count) {
  if (class_count < 1) throw InvalidArgument("confusion: class_count must be positive");
  if (truth.size() != predicted.size())
    throw InvalidArgument(fmt::format("confusion: {} true labels but {} predictions",
                                      truth.size(), predicted.size()));
  ConfusionMatrix cm;
  cm.counts.setZero(class_count, class_count);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= class_count || p < 0 || p >= class_count)
      throw InvalidArgument(
          fmt::format("confusion: label pair ({}, {}) outside 0..{}", t, p, class_count - 1));
    ++cm.counts(t, p);
  }
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw InvalidData("overall accuracy of an empty confusion matrix");
  return static_cast<double>(cm.correct()) / static_cast<double>(total);
}

std::vector<ClassStats> per_class_stats(const ConfusionMatrix& cm) {
  std::vector<ClassStats> stats(static_cast<std::size_t>(cm.class_count()));
  for (int c = 0; c < cm.class_count(); ++c) {
    auto& s = stats[static_cast<std::size_t>(c)];
    const auto hit = static_cast<double>(cm.counts(c, c));
    const auto predicted = cm.counts.col(c).sum();
    const auto actual = cm.counts.row(c).sum();
    if (predicted == 0)
      s.precision_undefined = true;
    else
      s.precision = hit / static_cast<double>(predicted);
    if (actual == 0)
      s.sensitivity_undefined = true;
    else
      s.sensitivity = hit / static_cast<double>(actual);
  }
  return stats;
}

CurveSeries roc_points(std::span<const double> scores, std::span<const int> positive) {
  const auto counts = count_truth(scores, positive);
  if (counts.positives == 0 || counts.negatives == 0)
    throw InvalidData("ROC needs at least one positive and one negative sample");
  const auto p = static_cast<double>(counts.positives);
  const auto n = static_cast<double>(counts.negatives);
  CurveSeries curve{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  sweep(scores, positive, [&](double threshold, std::int64_t tp, std::int64_t fp) {
    curve.push_back({threshold, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  });
  return curve;
}

CurveSeries pr_points(std::span<const double> scores, std::span<const int> positive) {
  const auto counts = count_truth(scores, positive);
  if (counts.positives == 0) throw InvalidData("PR curve needs at least one positive sample");
  const auto p = static_cast<double>(counts.positives);
  CurveSeries curve{{std::numeric_limits<double>::infinity(), 0.0, 1.0}};
  sweep(scores, positive, [&](double threshold, std::int64_t tp, std::int64_t fp) {
    curve.push_back({threshold, static_cast<double>(tp) / p,
                     static_cast<double>(tp) / static_cast<double>(tp + fp)});
  });
  return curve;
}

double trapezoid_auc(const CurveSeries& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    area += (curve[k].x - curve[k - 1].x) * (curve[k].y + curve[k - 1].y) / 2.0;
  return area;
}

Matrix softmax_rows(const Matrix& scores) {
  Matrix p(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i) {
    const Eigen::Array<double, 1, Eigen::Dynamic> e =
        (scores.row(i).array() - scores.row(i).maxCoeff()).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

OneVsRest one_vs_rest(const Matrix& scores, std::span<const int> truth) {
  if (static_cast<std::size_t>(scores.rows()) != truth.size())
    throw InvalidArgument(fmt::format("one_vs_rest: {} score rows but {} labels", scores.rows(),
                                      truth.size()));
  OneVsRest result;
  const auto classes = static_cast<std::size_t>(scores.cols());
  result.roc.resize(classes);
  result.pr.resize(classes);
  std::vector<double> column(truth.size());
  std::vector<int> positive(truth.size());
  for (Index c = 0; c < scores.cols(); ++c) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      column[i] = scores(static_cast<Index>(i), c);
      positive[i] = truth[i] == c ? 1 : 0;
      hits += static_cast<std::size_t>(positive[i]);
    }
    if (hits == 0 || hits == truth.size()) continue;
    result.roc[static_cast<std::size_t>(c)] = roc_points(column, positive);
    result.pr[static_cast<std::size_t>(c)] = pr_points(column, positive);
  }
  return result;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true,pred,count\n";
  for (int t = 0; t < cm.class_count(); ++t)
    for (int p = 0; p < cm.class_count(); ++p) out << fmt::format("{},{},{}\n", t, p, cm.counts(t, p));
}

void write_curves_csv(std::ostream& out, std::span<const std::optional<CurveSeries>> curves) {
  out << "class,threshold,x,y\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    if (!curves[c]) continue;
    for (const auto& point : *curves[c])
      out << fmt::format("{},{},{},{}\n", c, point.threshold, point.x, point.y);
  }
}

void write_class_stats_csv(std::ostream& out, std::span<const ClassStats> stats) {
  out << "class,precision,sensitivity,precision_undefined,sensitivity_undefined\n";
  for (std::size_t c = 0; c < stats.size(); ++c)
    out << fmt::format("{},{},{},{},{}\n", c, stats[c].precision, stats[c].sensitivity,
                       int{stats[c].precision_undefined}, int{stats[c].sensitivity_undefined});
}

}  // namespace rgnn
