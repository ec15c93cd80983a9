#include "rgnn/solver.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "rgnn/error.hpp"
#include "rgnn/random.hpp"

namespace rgnn {
namespace {

Matrix tail_mean(const std::deque<Matrix>& tail) {
  Matrix mean = Matrix::Zero(tail.front().rows(), tail.front().cols());
  for (const auto& w : tail) mean += w;
  return mean / static_cast<double>(tail.size());
}

void push_tail(std::deque<Matrix>& tail, const Matrix& w, std::size_t window) {
  tail.push_back(w);
  if (tail.size() > window) tail.pop_front();
}

void check_shapes(const Matrix& z, const Matrix& t) {
  if (z.rows() == 0 || z.cols() == 0 || t.cols() == 0)
    throw InvalidArgument("solver: empty design or target matrix");
  if (z.rows() != t.rows())
    throw InvalidArgument(
        fmt::format("solver: Z has {} rows but T has {}", z.rows(), t.rows()));
}

// Shared iteration loop of solve() and the per-batch loop of solve_minibatch().
// Returns true when both residuals reached tolerance.
bool iterate(AdmmState& state, const LeastSquaresProblem& problem, const AdmmConfig& cfg,
             const Factorization& factorization, std::size_t max_steps,
             std::vector<TracePoint>& trace, std::deque<Matrix>& tail) {
  for (std::size_t step = 0; step < max_steps; ++step) {
    Matrix previous_aux = state.aux;
    state = admm_step(state, problem, cfg, factorization);
    TracePoint point;
    point.iter = trace.size() + 1;
    point.objective = objective(problem, state.w, cfg);
    point.primal_residual = (state.w - state.aux).norm();
    point.dual_residual = cfg.rho * (state.aux - previous_aux).norm();
    trace.push_back(point);
    push_tail(tail, state.w, cfg.tail_window);
    if (point.primal_residual <= cfg.tolerance && point.dual_residual <= cfg.tolerance) return true;
  }
  return false;
}

}  // namespace

void AdmmConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw InvalidArgument(fmt::format("rho must be positive, got {}", rho));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument(fmt::format("lambda must be non-negative, got {}", lambda));
  if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
  if (tail_window == 0) throw InvalidArgument("tail_window must be positive");
  if (tail_window > max_iter)
    throw InvalidArgument(
        fmt::format("tail_window ({}) exceeds max_iter ({})", tail_window, max_iter));
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
}

AdmmState AdmmState::zeros(Index rows, Index cols) {
  return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), 0};
}

LeastSquaresProblem LeastSquaresProblem::from_data(const Matrix& z, const Matrix& t) {
  check_shapes(z, t);
  auto problem = empty(z.cols(), t.cols());
  problem.accumulate(z, t);
  return problem;
}

LeastSquaresProblem LeastSquaresProblem::empty(Index features, Index targets) {
  LeastSquaresProblem problem;
  problem.gram = Matrix::Zero(features, features);
  problem.cross = Matrix::Zero(features, targets);
  return problem;
}

void LeastSquaresProblem::accumulate(const Matrix& z_block, const Matrix& t_block) {
  if (z_block.cols() != gram.rows() || t_block.cols() != cross.cols() ||
      z_block.rows() != t_block.rows())
    throw InvalidArgument("accumulate: block shape does not match the problem");
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z_block.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  cross.noalias() += z_block.transpose() * t_block;
  target_sq_norm += t_block.squaredNorm();
  rows += z_block.rows();
}

double LeastSquaresProblem::data_term(const Matrix& w) const {
  // ||ZW - T||^2 = tr(W^T G W) - 2 tr(W^T C) + ||T||^2
  const double quadratic = (w.transpose() * gram * w).trace();
  const double linear = (w.array() * cross.array()).sum();
  return 0.5 * std::max(0.0, quadratic - 2.0 * linear + target_sq_norm);
}

Factorization::Factorization(const LeastSquaresProblem& problem, double rho) : rho_(rho) {
  if (!(rho > 0.0)) throw InvalidArgument("factorization requires rho > 0");
  Matrix system = problem.gram;
  system.diagonal().array() += rho;
  llt_.compute(system);
  if (llt_.info() != Eigen::Success)
    throw NumericFailure("Cholesky factorization of Z^T Z + rho I failed");
}

Matrix Factorization::solve(const Matrix& rhs) const { return llt_.solve(rhs); }

double soft_threshold(double a, double kappa) {
  const double magnitude = std::abs(a) - kappa;
  if (magnitude <= 0.0) return 0.0;
  return std::copysign(magnitude, a);
}

Matrix soft_threshold(const Matrix& a, double kappa) {
  return a.unaryExpr([kappa](double x) { return soft_threshold(x, kappa); });
}

Matrix ema_blend(const Matrix& current, const Matrix& previous, std::size_t k) {
  if (current.rows() != previous.rows() || current.cols() != previous.cols())
    throw InvalidArgument("ema_blend: shape mismatch");
  if (k < 2) return current;
  const auto kd = static_cast<double>(k);
  return (2.0 * current + kd * previous) / (kd + 2.0);
}

Matrix prox(const Matrix& v, const AdmmConfig& cfg) {
  switch (cfg.regularizer) {
    case Regularizer::L1:
      return soft_threshold(v, cfg.lambda / cfg.rho);
    case Regularizer::L2:
      return v * (cfg.rho / (cfg.rho + 2.0 * cfg.lambda));
  }
  throw InvalidArgument("unknown regularizer");
}

double regularizer_value(const Matrix& w, const AdmmConfig& cfg) {
  return cfg.regularizer == Regularizer::L1 ? w.cwiseAbs().sum() : w.squaredNorm();
}

double objective(const LeastSquaresProblem& problem, const Matrix& w, const AdmmConfig& cfg) {
  return problem.data_term(w) + cfg.lambda * regularizer_value(w, cfg);
}

AdmmState admm_step(const AdmmState& state, const LeastSquaresProblem& problem,
                    const AdmmConfig& cfg, const Factorization& factorization) {
  const bool blend = cfg.ema_enabled && state.k >= 2;

  Matrix w = factorization.solve(problem.cross + cfg.rho * (state.aux - state.dual));
  if (blend) w = ema_blend(w, state.w, state.k);

  Matrix aux = prox(w + state.dual, cfg);
  if (blend) aux = ema_blend(aux, state.aux, state.k);

  Matrix dual = state.dual + w - aux;
  if (blend) dual = ema_blend(dual, state.dual, state.k);

  if (!w.allFinite() || !aux.allFinite() || !dual.allFinite())
    throw NumericFailure(fmt::format("non-finite ADMM iterate at k = {}", state.k + 1));
  return {std::move(w), std::move(aux), std::move(dual), state.k + 1};
}

SolveResult solve(const LeastSquaresProblem& problem, const AdmmConfig& cfg) {
  cfg.validate();
  if (problem.rows == 0 || problem.features() == 0 || problem.targets() == 0)
    throw InvalidArgument("solve: empty problem");
  const Factorization factorization(problem, cfg.rho);
  auto state = AdmmState::zeros(problem.features(), problem.targets());
  SolveResult result;
  std::deque<Matrix> tail;
  result.converged =
      iterate(state, problem, cfg, factorization, cfg.max_iter, result.trace, tail);
  result.iterations = result.trace.size();
  result.weights = tail_mean(tail);
  result.last_w = std::move(state.w);
  return result;
}

SolveResult solve(const Matrix& z, const Matrix& t, const AdmmConfig& cfg) {
  check_shapes(z, t);
  return solve(LeastSquaresProblem::from_data(z, t), cfg);
}

MinibatchResult solve_minibatch(const Matrix& z, const Matrix& t, const AdmmConfig& cfg,
                                const MinibatchOptions& options) {
  cfg.validate();
  check_shapes(z, t);
  const auto n = static_cast<std::size_t>(z.rows());
  if (options.batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (options.batch_size > n)
    throw InvalidArgument(
        fmt::format("batch_size ({}) exceeds the number of rows ({})", options.batch_size, n));
  if (options.epochs == 0) throw InvalidArgument("epochs must be positive");
  const std::size_t steps = options.iters_per_batch == 0 ? cfg.max_iter : options.iters_per_batch;

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Xoshiro256 rng(options.shuffle_seed);

  auto state = AdmmState::zeros(z.cols(), t.cols());
  MinibatchResult result;
  std::deque<Matrix> tail;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.batch_size < n) shuffle(std::span<Index>(order), rng);
    double cost = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      const std::vector<Index> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix zb = z(rows, Eigen::all);
      const Matrix tb = t(rows, Eigen::all);
      const auto problem = LeastSquaresProblem::from_data(zb, tb);
      const Factorization factorization(problem, cfg.rho);
      iterate(state, problem, cfg, factorization, steps, result.trace, tail);
      cost += objective(problem, state.w, cfg);
      ++batches;
    }
    result.epoch_costs.push_back(cost / static_cast<double>(batches));
  }
  result.weights = tail_mean(tail);
  return result;
}

Matrix ridge_closed_form(const Matrix& a, const Matrix& y, double lambda) {
  if (a.rows() != y.rows())
    throw InvalidArgument(fmt::format("ridge: A has {} rows but Y has {}", a.rows(), y.rows()));
  Matrix system = a.transpose() * a;
  system.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(system);
  const double eps = std::numeric_limits<double>::epsilon();
  if (llt.info() != Eigen::Success || llt.rcond() < eps * static_cast<double>(system.rows()))
    throw NumericFailure("ridge: A^T A + lambda I is numerically singular");
  return llt.solve(a.transpose() * y);
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "iter,objective,primal_residual,dual_residual\n";
  for (const auto& p : trace)
    out << fmt::format("{},{},{},{}\n", p.iter, p.objective, p.primal_residual, p.dual_residual);
}

}  // namespace rgnn
