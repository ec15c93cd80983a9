#include "rgnn/graph.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "rgnn/error.hpp"
#include "rgnn/random.hpp"

namespace rgnn {
namespace {

void check_arguments(NodeId n, double p) {
  if (n < 2) throw InvalidArgument(fmt::format("graph needs at least 2 nodes, got {}", n));
  if (!(p > 0.0 && p <= 1.0))
    throw InvalidArgument(fmt::format("connection probability must lie in (0, 1], got {}", p));
}

}  // namespace

GraphSpec::GraphSpec(NodeId node_count, double connection_probability, std::uint64_t seed,
                     std::vector<Edge> edges)
    : node_count_(node_count),
      probability_(connection_probability),
      seed_(seed),
      edges_(std::move(edges)),
      in_(node_count),
      out_(node_count) {
  if (node_count_ < 1) throw InvalidArgument("graph needs at least 1 node");
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw InvalidArgument("duplicate edge");
  for (const auto& e : edges_) {
    if (e.from < 1 || e.to > node_count_ || e.from >= e.to)
      throw InvalidArgument(fmt::format("edge ({}, {}) violates 1 <= i < j <= {}", e.from, e.to,
                                        node_count_));
    in_[e.to - 1].push_back(e.from);
    out_[e.from - 1].push_back(e.to);
  }
}

void GraphSpec::check_node(NodeId i) const {
  if (i < 1 || i > node_count_)
    throw InvalidArgument(fmt::format("node {} outside 1..{}", i, node_count_));
}

std::span<const NodeId> GraphSpec::in_neighbors(NodeId i) const {
  check_node(i);
  return in_[i - 1];
}

std::span<const NodeId> GraphSpec::out_neighbors(NodeId i) const {
  check_node(i);
  return out_[i - 1];
}

bool GraphSpec::operator==(const GraphSpec& other) const {
  return node_count_ == other.node_count_ && probability_ == other.probability_ &&
         seed_ == other.seed_ && edges_ == other.edges_;
}

std::vector<Edge> sample_dag_edges(NodeId n, double p, std::uint64_t seed) {
  check_arguments(n, p);
  Xoshiro256 rng(seed);
  std::vector<Edge> edges;
  for (NodeId i = 1; i <= n; ++i) {
    for (NodeId j = i + 1; j <= n; ++j) {
      if (rng.uniform01() < p) edges.push_back({i, j});
    }
  }
  return edges;
}

std::vector<Edge> repair_orphans(std::vector<Edge> edges, NodeId n) {
  std::vector<bool> has_input(n + 1, false);
  for (const auto& e : edges) has_input[e.to] = true;
  for (NodeId j = 2; j <= n; ++j) {
    if (!has_input[j]) edges.push_back({1, j});
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

GraphSpec generate_random_dag(NodeId n, double p, std::uint64_t seed) {
  return GraphSpec(n, p, seed, repair_orphans(sample_dag_edges(n, p, seed), n));
}

std::span<const NodeId> in_neighbors(const GraphSpec& g, NodeId i) {
  return g.in_neighbors(i);
}

DegreeHistogram degree_histogram(const GraphSpec& g) {
  const NodeId n = g.node_count();
  DegreeHistogram h{std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0)};
  for (NodeId i = 1; i <= n; ++i) {
    ++h.in[g.in_neighbors(i).size()];
    ++h.out[g.out_neighbors(i).size()];
  }
  return h;
}

std::string to_text(const GraphSpec& g) {
  std::string text = fmt::format("{} {} {}\n", g.node_count(), g.connection_probability(), g.seed());
  for (const auto& e : g.edges()) text += fmt::format("{} {}\n", e.from, e.to);
  return text;
}

GraphSpec parse_graph_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  NodeId n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  if (!(in >> n >> p >> seed)) throw FormatError("graph text: malformed header, expected `n p seed`");
  std::vector<Edge> edges;
  NodeId i = 0;
  NodeId j = 0;
  while (in >> i >> j) edges.push_back({i, j});
  if (!in.eof()) throw FormatError("graph text: malformed edge line");
  try {
    return GraphSpec(n, p, seed, std::move(edges));
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("graph text: {}", e.what()));
  }
}

}  // namespace rgnn
