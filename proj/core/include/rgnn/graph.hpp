#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rgnn {

// Node ids are 1-based; node 1 is the initial node and never has in-edges.
using NodeId = std::uint32_t;

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  auto operator<=>(const Edge&) const = default;
};

/// An immutable random DAG. Every edge satisfies from < to, which makes
/// index order a topological order.
class GraphSpec {
 public:
  /// Validates and sorts `edges`; throws InvalidArgument on a pair that is
  /// out of range, a duplicate, or does not satisfy from < to.
  GraphSpec(NodeId node_count, double connection_probability, std::uint64_t seed,
            std::vector<Edge> edges);

  NodeId node_count() const { return node_count_; }
  double connection_probability() const { return probability_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const Edge> edges() const { return edges_; }

  /// In-neighbors of node i in ascending order; empty for node 1.
  std::span<const NodeId> in_neighbors(NodeId i) const;
  std::span<const NodeId> out_neighbors(NodeId i) const;

  bool operator==(const GraphSpec& other) const;

 private:
  void check_node(NodeId i) const;

  NodeId node_count_;
  double probability_;
  std::uint64_t seed_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> in_;
  std::vector<std::vector<NodeId>> out_;
};

/// Bernoulli(p) draw for every pair i < j in lexicographic order, one
/// uniform variate per pair, no repair.
std::vector<Edge> sample_dag_edges(NodeId n, double p, std::uint64_t seed);

/// Adds (1, j) for every node j >= 2 without an in-neighbor. Never removes.
std::vector<Edge> repair_orphans(std::vector<Edge> edges, NodeId n);

/// sample_dag_edges followed by repair_orphans.
GraphSpec generate_random_dag(NodeId n, double p, std::uint64_t seed);

std::span<const NodeId> in_neighbors(const GraphSpec& g, NodeId i);

struct DegreeHistogram {
  std::vector<std::size_t> in;   // in[k] = number of nodes with in-degree k
  std::vector<std::size_t> out;  // out[k] = number of nodes with out-degree k
};

/// Histograms over degrees 0..n-1.
DegreeHistogram degree_histogram(const GraphSpec& g);

/// Text form: header `n p seed`, then one `i j` line per edge in
/// lexicographic order. p is written with the shortest round-trip repr.
std::string to_text(const GraphSpec& g);
GraphSpec parse_graph_text(std::string_view text);

}  // namespace rgnn
