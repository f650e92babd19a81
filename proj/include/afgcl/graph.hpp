#pragma once

#include <span>
#include <utility>
#include <vector>

namespace afgcl {

/// Undirected graph in CSR form. Every undirected edge is stored in both
/// directions; neighbor lists are sorted, self-loop free and duplicate free.
struct Graph {
  int num_nodes = 0;
  long long num_edges = 0;       // undirected edge count
  std::vector<int> row_offsets;  // length num_nodes + 1
  std::vector<int> neighbor_ids; // length 2 * num_edges

  /// Builds from an arbitrary edge list: symmetrizes, deduplicates and drops
  /// self-loops. Throws on out-of-range node ids.
  static Graph build(int num_nodes, std::span<const std::pair<int, int>> edges);

  int degree(int v) const { return row_offsets[v + 1] - row_offsets[v]; }

  std::span<const int> neighbors(int v) const {
    return {neighbor_ids.data() + row_offsets[v],
            static_cast<std::size_t>(degree(v))};
  }

  bool has_edge(int u, int v) const;

  /// Each undirected edge once, as (u, v) with u < v, sorted.
  std::vector<std::pair<int, int>> undirected_edges() const;

  /// Throws std::runtime_error if any structural invariant is broken
  /// (asymmetry, self-loop, duplicate, bad offsets).
  void validate() const;

  bool operator==(const Graph&) const = default;
};

/// Fraction of undirected edges joining two nodes of the same class.
/// Throws if the graph has no edges.
double edge_homophily(const Graph& g, std::span<const int> labels);

/// Mean over non-isolated nodes of the same-label fraction of each
/// neighborhood. Degree-0 nodes are excluded from the mean; throws if every
/// node is isolated.
double node_homophily(const Graph& g, std::span<const int> labels);

/// Union of all nodes within `hops` edges of any seed (seeds included).
std::vector<int> khop_pool(const Graph& g, std::span<const int> seeds, int hops);

}  // namespace afgcl
