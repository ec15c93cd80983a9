#include "rgnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "rgnn/error.hpp"

namespace rgnn {
namespace {

// Seed streams derived from the model seed.
constexpr std::uint64_t kSaeStream = 1;
constexpr std::uint64_t kGraphStream = 100;
constexpr std::uint64_t kLayerStream = 200;

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Xoshiro256& rng) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

RowVector uniform_row(Index n, double lo, double hi, Xoshiro256& rng) {
  RowVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

Matrix affine_activate(const Matrix& x, const Matrix& w, const RowVector& b, Activation act) {
  Matrix pre = x * w;
  pre.rowwise() += b;
  return activate(pre, act);
}

// Pattern rows of one block of samples.
Matrix pattern_block(const RgnnModel& model, const Matrix& x_block) {
  Matrix a(x_block.rows(), model.pattern_width());
  Matrix input = encode(model.sae, x_block);
  Index col = 0;
  for (const auto& layer : model.layers) {
    Matrix r = graph_forward(layer, input);
    a.middleCols(col, r.cols()) = r;
    col += r.cols();
    input = std::move(r);
  }
  return a;
}

}  // namespace

Matrix activate(const Matrix& x, Activation activation) {
  switch (activation) {
    case Activation::Tanh:
      return x.array().tanh().matrix();
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  }
  throw InvalidArgument("unknown activation");
}

void ArchitectureConfig::validate() const {
  if (graphs.empty()) throw InvalidArgument("architecture.graphs must list at least one graph");
  for (std::size_t j = 0; j < graphs.size(); ++j) {
    if (graphs[j].neurons < 1)
      throw InvalidArgument(fmt::format("architecture.graphs[{}].neurons must be positive", j));
    if (!(graphs[j].p > 0.0 && graphs[j].p <= 1.0))
      throw InvalidArgument(fmt::format("architecture.graphs[{}].p must lie in (0, 1]", j));
  }
  if (window_width < 1) throw InvalidArgument("architecture.d must be positive");
  if (window_count < 1) throw InvalidArgument("architecture.m must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("architecture.sigma must be positive");
  if (sigma_hidden && !(*sigma_hidden > 0.0))
    throw InvalidArgument("architecture.sigma_hidden must be positive");
  if (sae_hidden < 1) throw InvalidArgument("architecture.sae_hidden must be positive");
  if (!(sae_lambda >= 0.0)) throw InvalidArgument("architecture.sae_lambda must be non-negative");
  if (!(combiner_scale > 0.0))
    throw InvalidArgument("architecture.combiner_scale must be positive");
  if (!(enhancement_scale > 0.0))
    throw InvalidArgument("architecture.enhancement_scale must be positive");
}

Index ArchitectureConfig::pattern_width() const {
  Index width = 0;
  for (const auto& g : graphs) width += 2 * static_cast<Index>(g.neurons) * neuron_width();
  return width;
}

void GraphLayer::validate() const {
  const auto n = static_cast<std::size_t>(spec.node_count());
  if (neurons.size() != n) throw InvalidState("graph layer: neuron count differs from node count");
  if (order.size() != n) throw InvalidState("graph layer: permutation has wrong length");
  std::vector<bool> seen(n + 1, false);
  for (NodeId q : order) {
    if (q < 1 || q > n || seen[q]) throw InvalidState("graph layer: order is not a permutation");
    seen[q] = true;
  }
  const Index width = neurons.front().width();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& neuron = neurons[i];
    if (neuron.combiner.rows() != width || neuron.combiner.cols() != width ||
        neuron.bias.size() != width)
      throw InvalidState(fmt::format("graph layer: neuron {} has inconsistent shapes", i + 1));
    Index window_total = 0;
    for (const auto& w : neuron.windows) window_total += w.width();
    if (window_total != width)
      throw InvalidState(fmt::format("graph layer: neuron {} windows do not span dM", i + 1));
    if (i > 0 && neuron.windows.front().in_dim() != width)
      throw InvalidState(fmt::format("graph layer: neuron {} expects width {}", i + 1, width));
  }
  const Index block = static_cast<Index>(n) * width;
  if (enhancement.rows() != block || enhancement.cols() != block ||
      enhancement_bias.size() != block)
    throw InvalidState("graph layer: enhancement block has wrong shape");
}

Index RgnnModel::pattern_width() const {
  Index width = 0;
  for (const auto& layer : layers) width += layer.output_width();
  return width;
}

Matrix compute_initial_neuron(const NeuronParams& params, const Matrix& f) {
  return affine_activate(composite_frf(params.windows, f), params.combiner, params.bias,
                         params.activation);
}

Matrix compute_neuron(const GraphSpec& graph, NodeId i, const NeuronParams& params,
                      std::span<const std::optional<Matrix>> outputs) {
  const auto sources = graph.in_neighbors(i);
  if (sources.empty()) throw InvalidState(fmt::format("neuron {} has no in-neighbors", i));
  Matrix sum;
  for (NodeId k : sources) {
    if (k > outputs.size() || !outputs[k - 1])
      throw InvalidState(fmt::format("neuron {} reads unset output of neuron {}", i, k));
    Matrix term = compute_initial_neuron(params, *outputs[k - 1]);
    if (sum.size() == 0)
      sum = std::move(term);
    else
      sum += term;
  }
  return sum;
}

Matrix graph_forward(const GraphLayer& layer, const Matrix& input) {
  const NodeId n = layer.spec.node_count();
  const Index width = layer.neuron_width();
  std::vector<std::optional<Matrix>> outputs(n);
  outputs[0] = compute_initial_neuron(layer.neurons[0], input);
  for (NodeId i = 2; i <= n; ++i)
    outputs[i - 1] = compute_neuron(layer.spec, i, layer.neurons[i - 1], outputs);

  const Index block = static_cast<Index>(n) * width;
  Matrix r(input.rows(), 2 * block);
  for (std::size_t b = 0; b < layer.order.size(); ++b)
    r.middleCols(static_cast<Index>(b) * width, width) = *outputs[layer.order[b] - 1];
  r.rightCols(block) =
      affine_activate(r.leftCols(block), layer.enhancement, layer.enhancement_bias, layer.activation);
  return r;
}

GraphLayer sample_layer(const GraphSpec& spec, Index input_dim, const ArchitectureConfig& arch,
                        Xoshiro256& rng, bool first_layer) {
  const Index d = arch.window_width;
  const Index width = arch.neuron_width();
  const NodeId n = spec.node_count();
  GraphLayer layer{spec, {}, {}, {}, {}, arch.activation};
  layer.neurons.reserve(n);
  for (NodeId i = 1; i <= n; ++i) {
    NeuronParams neuron;
    neuron.activation = arch.activation;
    const Index in_dim = i == 1 ? input_dim : width;
    double sigma = arch.sigma;
    if (arch.sigma_hidden && !(first_layer && i == 1))
      sigma = *arch.sigma_hidden / std::sqrt(static_cast<double>(in_dim));
    neuron.windows.reserve(static_cast<std::size_t>(arch.window_count));
    for (Index m = 0; m < arch.window_count; ++m)
      neuron.windows.push_back(sample_frf_window(in_dim, d, sigma, rng));
    neuron.combiner = uniform_matrix(width, width, -arch.combiner_scale, arch.combiner_scale, rng);
    neuron.bias = uniform_row(width, 0.0, 1.0, rng);
    layer.neurons.push_back(std::move(neuron));
  }
  layer.order.resize(n);
  std::iota(layer.order.begin(), layer.order.end(), NodeId{1});
  shuffle(std::span<NodeId>(layer.order), rng);
  const Index block = static_cast<Index>(n) * width;
  layer.enhancement =
      uniform_matrix(block, block, -arch.enhancement_scale, arch.enhancement_scale, rng);
  layer.enhancement_bias = uniform_row(block, 0.0, 1.0, rng);
  return layer;
}

RgnnModel sample_model(SaeEncoder sae, const ArchitectureConfig& arch, std::uint64_t seed) {
  arch.validate();
  RgnnModel model;
  model.arch = arch;
  model.seed = seed;
  Index input_dim = sae.hidden_dim();
  model.sae = std::move(sae);
  for (std::size_t j = 0; j < arch.graphs.size(); ++j) {
    const auto& g = arch.graphs[j];
    const std::uint64_t graph_seed = derive_seed(seed, kGraphStream + j);
    auto spec = g.neurons == 1 ? GraphSpec(1, g.p, graph_seed, {})
                               : generate_random_dag(g.neurons, g.p, graph_seed);
    Xoshiro256 rng(derive_seed(seed, kLayerStream + j));
    model.layers.push_back(sample_layer(spec, input_dim, arch, rng, j == 0));
    input_dim = model.layers.back().output_width();
  }
  return model;
}

Matrix build_pattern_matrix(const RgnnModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim())
    throw InvalidArgument(fmt::format("expected {} feature columns, got {}", model.input_dim(),
                                      x.cols()));
  return pattern_block(model, x);
}

TrainResult fit_targets(const Matrix& x, const Matrix& targets, const ArchitectureConfig& arch,
                        const AdmmConfig& solver, std::uint64_t seed,
                        const TrainOptions& options) {
  arch.validate();
  solver.validate();
  if (x.rows() == 0 || x.cols() == 0) throw InvalidArgument("training set is empty");
  if (x.rows() != targets.rows())
    throw InvalidArgument(fmt::format("{} samples but {} target rows", x.rows(), targets.rows()));
  if (!x.allFinite() || !targets.allFinite())
    throw NumericFailure("training data contains non-finite values");
  if (options.chunk_rows < 1) throw InvalidArgument("chunk_rows must be positive");

  SaeEncoder sae;
  if (options.shared_sae) {
    if (options.shared_sae->input_dim() != x.cols())
      throw InvalidArgument("shared SAE input dimension differs from the data");
    sae = *options.shared_sae;
  } else {
    sae = fit_sae(x, arch.sae_hidden, arch.sae_lambda, derive_seed(seed, kSaeStream), solver);
  }

  TrainResult result;
  result.model = sample_model(std::move(sae), arch, seed);
  result.model.solver = solver;
  result.model.class_count = targets.cols();
  auto& model = result.model;

  if (options.minibatch) {
    const Matrix a = pattern_block(model, x);
    if (!a.allFinite()) throw NumericFailure("pattern matrix contains non-finite values");
    auto solved = solve_minibatch(a, targets, solver, *options.minibatch);
    model.output_weights = std::move(solved.weights);
    result.trace = std::move(solved.trace);
    result.epoch_costs = std::move(solved.epoch_costs);
  } else {
    auto problem = LeastSquaresProblem::empty(model.pattern_width(), targets.cols());
    for (Index start = 0; start < x.rows(); start += options.chunk_rows) {
      const Index rows = std::min(options.chunk_rows, x.rows() - start);
      const Matrix a = pattern_block(model, x.middleRows(start, rows));
      if (!a.allFinite()) throw NumericFailure("pattern matrix contains non-finite values");
      problem.accumulate(a, targets.middleRows(start, rows));
    }
    auto solved = solve(problem, solver);
    model.output_weights = std::move(solved.weights);
    result.trace = std::move(solved.trace);
    if (!result.trace.empty()) result.epoch_costs.push_back(result.trace.back().objective);
  }
  if (!model.output_weights.allFinite()) throw NumericFailure("output weights are non-finite");
  return result;
}

TrainResult train_rgnn(const Matrix& x, std::span<const int> labels, int class_count,
                       const ArchitectureConfig& arch, const AdmmConfig& solver,
                       std::uint64_t seed, const TrainOptions& options) {
  if (static_cast<Index>(labels.size()) != x.rows())
    throw InvalidArgument(fmt::format("{} samples but {} labels", x.rows(), labels.size()));
  if (class_count < 1) throw InvalidArgument("class_count must be positive");
  std::set<int> present;
  for (int label : labels) {
    if (label < 0 || label >= class_count)
      throw InvalidData(fmt::format("label {} outside 0..{}", label, class_count - 1));
    present.insert(label);
  }
  if (present.size() < 2) throw InvalidData("training labels contain a single class");
  Matrix targets = Matrix::Zero(x.rows(), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) targets(static_cast<Index>(i), labels[i]) = 1.0;
  return fit_targets(x, targets, arch, solver, seed, options);
}

Matrix predict_scores(const RgnnModel& model, const Matrix& x, Index chunk_rows) {
  if (x.cols() != model.input_dim())
    throw InvalidArgument(fmt::format("model expects {} feature columns, got {}",
                                      model.input_dim(), x.cols()));
  if (model.output_weights.rows() != model.pattern_width())
    throw InvalidState("model has no trained output weights");
  if (chunk_rows < 1) throw InvalidArgument("chunk_rows must be positive");
  Matrix scores(x.rows(), model.output_weights.cols());
  for (Index start = 0; start < x.rows(); start += chunk_rows) {
    const Index rows = std::min(chunk_rows, x.rows() - start);
    scores.middleRows(start, rows) =
        pattern_block(model, x.middleRows(start, rows)) * model.output_weights;
  }
  return scores;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> labels(static_cast<std::size_t>(scores.rows()), 0);
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

Prediction predict(const RgnnModel& model, const Matrix& x, Index chunk_rows) {
  Prediction p;
  p.scores = predict_scores(model, x, chunk_rows);
  p.labels = argmax_rows(p.scores);
  return p;
}

double approximation_distance(std::span<const double> f_true, std::span<const double> f_model) {
  if (f_true.empty()) throw InvalidArgument("approximation_distance: empty input");
  if (f_true.size() != f_model.size())
    throw InvalidArgument("approximation_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < f_true.size(); ++i) {
    const double diff = f_true[i] - f_model[i];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(f_true.size()));
}

}  // namespace rgnn
