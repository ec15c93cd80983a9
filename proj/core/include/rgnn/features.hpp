#pragma once

#include <cstdint>
#include <span>

#include "rgnn/random.hpp"
#include "rgnn/solver.hpp"

namespace rgnn {

/// Sparse auto-encoder. Z = X W_s is a random projection; W* solves
/// min 1/2 ||Z W - X||^2 + lambda ||W||_1 and the encoder output is X W*^T.
struct SaeEncoder {
  Matrix projection;  // W_s, N_f x h, entries U[-1, 1]
  Matrix weights;     // W*,  h x N_f
  double lambda = 0.0;

  Index input_dim() const { return weights.cols(); }
  Index hidden_dim() const { return weights.rows(); }
};

/// Fits the encoder with the EMA-ADMM solver (L1 path). `solver` supplies
/// rho, iteration budget and EMA settings; regularizer and lambda are
/// overridden. Throws InvalidData on non-finite input.
SaeEncoder fit_sae(const Matrix& x, Index hidden, double lambda, std::uint64_t seed,
                   const AdmmConfig& solver = {});

/// F = X W*^T (N x h).
Matrix encode(const SaeEncoder& encoder, const Matrix& x);

/// One mapping window of d Fourier random features.
struct FrfWindow {
  Matrix omega;     // in_dim x d; column m is the frequency vector of feature m
  RowVector phase;  // d entries in [0, 2 pi)

  Index in_dim() const { return omega.rows(); }
  Index width() const { return omega.cols(); }
};

/// omega ~ N(0, sigma^2) i.i.d., phase ~ U[0, 2 pi). omega is filled column by
/// column, then the phases.
FrfWindow sample_frf_window(Index in_dim, Index d, double sigma, Xoshiro256& rng);
FrfWindow sample_frf_window(Index in_dim, Index d, double sigma, std::uint64_t seed);

/// Row i, column m: sqrt(2/d) cos(omega_m . f_i + b_m).
Matrix apply_frf_window(const FrfWindow& window, const Matrix& f_in);

/// Horizontal concatenation of apply_frf_window over `windows`, in order.
Matrix composite_frf(std::span<const FrfWindow> windows, const Matrix& f_in);

}  // namespace rgnn
