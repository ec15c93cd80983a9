#include "rgnn/features.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "rgnn/error.hpp"

namespace rgnn {

SaeEncoder fit_sae(const Matrix& x, Index hidden, double lambda, std::uint64_t seed,
                   const AdmmConfig& solver) {
  if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("fit_sae: empty sample matrix");
  if (hidden < 1) throw InvalidArgument("fit_sae: hidden width must be positive");
  if (!x.allFinite()) throw InvalidData("fit_sae: sample matrix has non-finite entries");

  SaeEncoder encoder;
  encoder.lambda = lambda;
  Xoshiro256 rng(seed);
  encoder.projection.resize(x.cols(), hidden);
  for (Index c = 0; c < hidden; ++c)
    for (Index r = 0; r < x.cols(); ++r) encoder.projection(r, c) = rng.uniform(-1.0, 1.0);

  const Matrix z = x * encoder.projection;
  AdmmConfig cfg = solver;
  cfg.regularizer = Regularizer::L1;
  cfg.lambda = lambda;
  encoder.weights = solve(z, x, cfg).weights;
  return encoder;
}

Matrix encode(const SaeEncoder& encoder, const Matrix& x) {
  if (x.cols() != encoder.input_dim())
    throw InvalidArgument(fmt::format("encode: expected {} input columns, got {}",
                                      encoder.input_dim(), x.cols()));
  return x * encoder.weights.transpose();
}

FrfWindow sample_frf_window(Index in_dim, Index d, double sigma, Xoshiro256& rng) {
  if (in_dim < 1) throw InvalidArgument("FRF window: input dimension must be positive");
  if (d < 1) throw InvalidArgument("FRF window: width d must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument(fmt::format("FRF window: sigma must be positive, got {}", sigma));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  FrfWindow window{Matrix(in_dim, d), RowVector(d)};
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < in_dim; ++r) window.omega(r, c) = rng.normal(0.0, sigma);
  for (Index c = 0; c < d; ++c) {
    const double b = two_pi * rng.uniform01();
    window.phase(c) = b < two_pi ? b : 0.0;
  }
  return window;
}

FrfWindow sample_frf_window(Index in_dim, Index d, double sigma, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  return sample_frf_window(in_dim, d, sigma, rng);
}

Matrix apply_frf_window(const FrfWindow& window, const Matrix& f_in) {
  if (f_in.cols() != window.in_dim())
    throw InvalidArgument(fmt::format("FRF window expects {} input columns, got {}",
                                      window.in_dim(), f_in.cols()));
  Matrix projected = f_in * window.omega;
  projected.rowwise() += window.phase;
  const double scale = std::sqrt(2.0 / static_cast<double>(window.width()));
  return scale * projected.array().cos().matrix();
}

Matrix composite_frf(std::span<const FrfWindow> windows, const Matrix& f_in) {
  if (windows.empty()) throw InvalidArgument("composite_frf: no windows");
  const Index in_dim = windows.front().in_dim();
  const Index d = windows.front().width();
  for (const auto& w : windows) {
    if (w.in_dim() != in_dim || w.width() != d)
      throw InvalidArgument("composite_frf: windows disagree on input dimension or width");
  }
  Matrix out(f_in.rows(), d * static_cast<Index>(windows.size()));
  for (std::size_t m = 0; m < windows.size(); ++m)
    out.middleCols(static_cast<Index>(m) * d, d) = apply_frf_window(windows[m], f_in);
  return out;
}

}  // namespace rgnn
