#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rgnn/features.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/solver.hpp"

namespace rgnn {

enum class Activation { Tanh, Sigmoid };

Matrix activate(const Matrix& x, Activation activation);

struct GraphConfig {
  NodeId neurons = 0;
  double p = 0.5;
};

/// Shape and sampling hyperparameters of an RGNN.
struct ArchitectureConfig {
  std::vector<GraphConfig> graphs;
  Index window_width = 10;  // d
  Index window_count = 5;   // M
  double sigma = 1.0;       // frequency std of the first graph's initial neuron
  Activation activation = Activation::Tanh;
  Index sae_hidden = 128;
  double sae_lambda = 1e-3;

  // When set, every other window draws frequencies with std
  // sigma_hidden / sqrt(in_dim), so the kernel bandwidth does not shrink as
  // neuron and graph outputs get wider. Unset: all windows use sigma.
  std::optional<double> sigma_hidden;
  // Half-width of the uniform range of the combiner and enhancement
  // matrices (entries ~ U[-scale, scale]).
  double combiner_scale = 1.0;
  double enhancement_scale = 1.0;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;

  /// d * M, the output width of one neuron.
  Index neuron_width() const { return window_width * window_count; }

  /// Sum over graphs of 2 * neurons * d * M.
  Index pattern_width() const;
};

/// Frozen random parameters of one neuron. Its windows are shared by all of
/// its in-edges.
struct NeuronParams {
  std::vector<FrfWindow> windows;
  Matrix combiner;   // W_n, dM x dM
  RowVector bias;    // beta_n, dM
  Activation activation = Activation::Tanh;

  Index width() const { return combiner.cols(); }
};

/// One random graph with its neurons and the enhancement block.
struct GraphLayer {
  GraphSpec spec;
  std::vector<NeuronParams> neurons;  // neurons[i - 1] belongs to node i
  std::vector<NodeId> order;          // block b of the output holds node order[b]
  Matrix enhancement;                 // W-bar, (n dM) x (n dM)
  RowVector enhancement_bias;         // beta-bar, n dM
  Activation activation = Activation::Tanh;

  Index input_dim() const { return neurons.front().windows.front().in_dim(); }
  Index neuron_width() const { return neurons.front().width(); }
  Index output_width() const {
    return 2 * static_cast<Index>(spec.node_count()) * neuron_width();
  }

  /// Throws InvalidState when the parameter shapes or the permutation are
  /// inconsistent.
  void validate() const;
};

struct RgnnModel {
  SaeEncoder sae;
  std::vector<GraphLayer> layers;
  Matrix output_weights;  // pattern width x class count
  Index class_count = 0;
  ArchitectureConfig arch;
  AdmmConfig solver;
  std::uint64_t seed = 0;

  Index input_dim() const { return sae.input_dim(); }
  Index pattern_width() const;
};

/// phi(composite_frf(F) W_n + beta_n).
Matrix compute_initial_neuron(const NeuronParams& params, const Matrix& f);

/// Sum over in-neighbors k of phi(composite_frf(N_k) W_n + beta_n).
/// `outputs[k - 1]` holds the output of node k; throws InvalidState when an
/// in-neighbor of i has no output yet.
Matrix compute_neuron(const GraphSpec& graph, NodeId i, const NeuronParams& params,
                      std::span<const std::optional<Matrix>> outputs);

/// [N_Q | phi(N_Q W-bar + beta-bar)] where N_Q concatenates neuron outputs in
/// `order`. Neurons are evaluated in index order.
Matrix graph_forward(const GraphLayer& layer, const Matrix& input);

/// Samples neuron parameters, permutation and enhancement block for `spec`.
/// `first_layer` marks the graph whose initial neuron reads the SAE features.
GraphLayer sample_layer(const GraphSpec& spec, Index input_dim, const ArchitectureConfig& arch,
                        Xoshiro256& rng, bool first_layer = true);

/// Samples every graph and its random parameters from seed-derived streams.
/// Output weights are left empty.
RgnnModel sample_model(SaeEncoder sae, const ArchitectureConfig& arch, std::uint64_t seed);

/// A = [R_1 ... R_m]; graph 1 consumes encode(sae, X), graph j > 1 consumes R_{j-1}.
Matrix build_pattern_matrix(const RgnnModel& model, const Matrix& x);

struct TrainOptions {
  Index chunk_rows = 2048;                    // rows per streamed block
  std::optional<MinibatchOptions> minibatch;  // materialises A when set
  std::optional<SaeEncoder> shared_sae;       // skip fit_sae when provided
};

struct TrainResult {
  RgnnModel model;
  std::vector<TracePoint> trace;
  std::vector<double> epoch_costs;
};

/// Fits SAE and output weights against an arbitrary target matrix
/// (regression or one-hot classification).
TrainResult fit_targets(const Matrix& x, const Matrix& targets, const ArchitectureConfig& arch,
                        const AdmmConfig& solver, std::uint64_t seed,
                        const TrainOptions& options = {});

/// Classification training on labels 0..class_count-1. Throws InvalidData
/// when fewer than two classes occur, NumericFailure on non-finite values.
TrainResult train_rgnn(const Matrix& x, std::span<const int> labels, int class_count,
                       const ArchitectureConfig& arch, const AdmmConfig& solver,
                       std::uint64_t seed, const TrainOptions& options = {});

/// Y = A W, computed in row blocks.
Matrix predict_scores(const RgnnModel& model, const Matrix& x, Index chunk_rows = 2048);

struct Prediction {
  std::vector<int> labels;
  Matrix scores;
};

/// Argmax of the scores; ties go to the lowest class index.
Prediction predict(const RgnnModel& model, const Matrix& x, Index chunk_rows = 2048);

std::vector<int> argmax_rows(const Matrix& scores);

/// Root mean squared difference: the Monte Carlo estimate of the L2 distance
/// between a target function and its approximation on sample points.
double approximation_distance(std::span<const double> f_true, std::span<const double> f_model);

}  // namespace rgnn
