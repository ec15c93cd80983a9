#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace rgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

enum class Regularizer { L1, L2 };

/// Hyperparameters of the EMA-ADMM solver.
///
/// Objective minimised:  1/2 ||Z W - T||_F^2 + lambda * R(W)
/// with R = ||W||_1 (L1) or ||W||_F^2 (L2).
struct AdmmConfig {
  double rho = 1.0;
  double lambda = 1e-3;
  std::size_t max_iter = 100;
  bool ema_enabled = true;
  std::size_t tail_window = 10;
  Regularizer regularizer = Regularizer::L2;
  double tolerance = 1e-6;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Iterate triple (W, O, u) plus the iteration counter k.
struct AdmmState {
  Matrix w;
  Matrix aux;
  Matrix dual;
  std::size_t k = 0;

  static AdmmState zeros(Index rows, Index cols);
};

/// Normal-equation form of 1/2 ||Z W - T||^2. Holding Z^T Z and Z^T T instead
/// of Z lets tall design matrices be streamed in row blocks.
struct LeastSquaresProblem {
  Matrix gram;   // Z^T Z
  Matrix cross;  // Z^T T
  double target_sq_norm = 0.0;
  Index rows = 0;

  static LeastSquaresProblem from_data(const Matrix& z, const Matrix& t);
  static LeastSquaresProblem empty(Index features, Index targets);

  /// Adds the rows of (z_block, t_block) to the accumulated system.
  void accumulate(const Matrix& z_block, const Matrix& t_block);

  Index features() const { return gram.rows(); }
  Index targets() const { return cross.cols(); }

  /// 1/2 ||Z W - T||_F^2 evaluated from the accumulated moments.
  double data_term(const Matrix& w) const;
};

/// Cached Cholesky factor of (Z^T Z + rho I).
class Factorization {
 public:
  Factorization(const LeastSquaresProblem& problem, double rho);
  Matrix solve(const Matrix& rhs) const;
  double rho() const { return rho_; }

 private:
  double rho_;
  Eigen::LLT<Matrix> llt_;
};

double soft_threshold(double a, double kappa);
Matrix soft_threshold(const Matrix& a, double kappa);

/// (2 current + k previous) / (k + 2) for k >= 2, otherwise `current`.
Matrix ema_blend(const Matrix& current, const Matrix& previous, std::size_t k);

/// The regulariser's proximal map for penalty rho.
Matrix prox(const Matrix& v, const AdmmConfig& cfg);

double regularizer_value(const Matrix& w, const AdmmConfig& cfg);
double objective(const LeastSquaresProblem& problem, const Matrix& w, const AdmmConfig& cfg);

/// One EMA-ADMM iteration: W-update (linear solve), O-update (prox), u-update
/// (dual ascent), each blended with its previous value when ema_enabled and
/// k >= 2. Throws NumericFailure on non-finite iterates.
AdmmState admm_step(const AdmmState& state, const LeastSquaresProblem& problem,
                    const AdmmConfig& cfg, const Factorization& factorization);

struct TracePoint {
  std::size_t iter = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct SolveResult {
  Matrix weights;  // tail-averaged W
  Matrix last_w;
  std::vector<TracePoint> trace;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Runs admm_step from zero until max_iter or until both the primal residual
/// ||W - O|| and the dual residual rho ||O_k+1 - O_k|| fall to tolerance.
/// Returns the mean of the last min(tail_window, iterations) W iterates.
SolveResult solve(const LeastSquaresProblem& problem, const AdmmConfig& cfg);
SolveResult solve(const Matrix& z, const Matrix& t, const AdmmConfig& cfg);

struct MinibatchOptions {
  std::size_t batch_size = 0;
  std::size_t epochs = 1;
  std::size_t iters_per_batch = 0;  // 0 = cfg.max_iter
  std::uint64_t shuffle_seed = 0;
};

struct MinibatchResult {
  Matrix weights;
  std::vector<double> epoch_costs;  // mean batch objective per epoch
  std::vector<TracePoint> trace;
};

/// Mini-batch EMA-ADMM. Each epoch partitions the rows into shuffled
/// batches (no shuffle when batch_size >= N) and runs up to iters_per_batch
/// steps per batch, warm-started from the running state with the batch's own
/// factorization.
MinibatchResult solve_minibatch(const Matrix& z, const Matrix& t, const AdmmConfig& cfg,
                                const MinibatchOptions& options);

/// (A^T A + lambda I)^{-1} A^T Y through a Cholesky solve. Throws
/// NumericFailure when the system is numerically singular.
Matrix ridge_closed_form(const Matrix& a, const Matrix& y, double lambda);

/// CSV with header `iter,objective,primal_residual,dual_residual`.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

}  // namespace rgnn
