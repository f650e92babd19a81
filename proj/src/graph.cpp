#include "afgcl/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace afgcl {

Graph Graph::build(int num_nodes, std::span<const std::pair<int, int>> edges) {
  if (num_nodes < 0) throw std::invalid_argument("negative node count");
  std::vector<std::pair<int, int>> canon;
  canon.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      throw std::out_of_range("edge (" + std::to_string(u) + ", " +
                              std::to_string(v) + ") out of range for " +
                              std::to_string(num_nodes) + " nodes");
    if (u == v) continue;
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  Graph g;
  g.num_nodes = num_nodes;
  g.num_edges = static_cast<long long>(canon.size());
  g.row_offsets.assign(num_nodes + 1, 0);
  for (const auto& [u, v] : canon) {
    ++g.row_offsets[u + 1];
    ++g.row_offsets[v + 1];
  }
  for (int i = 0; i < num_nodes; ++i) g.row_offsets[i + 1] += g.row_offsets[i];
  g.neighbor_ids.resize(2 * canon.size());
  std::vector<int> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
  for (const auto& [u, v] : canon) {
    g.neighbor_ids[cursor[u]++] = v;
    g.neighbor_ids[cursor[v]++] = u;
  }
  // canon is sorted by (u, v), so rows for u come out sorted; rows for v get
  // entries in increasing u as well.
  for (int i = 0; i < num_nodes; ++i) {
    auto row = g.neighbor_ids.begin();
    std::sort(row + g.row_offsets[i], row + g.row_offsets[i + 1]);
  }
  return g;
}

bool Graph::has_edge(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<int, int>> Graph::undirected_edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(num_edges));
  for (int u = 0; u < num_nodes; ++u)
    for (int v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

void Graph::validate() const {
  if (static_cast<int>(row_offsets.size()) != num_nodes + 1)
    throw std::runtime_error("row_offsets has wrong length");
  if (row_offsets.front() != 0)
    throw std::runtime_error("row_offsets must start at 0");
  for (int i = 0; i < num_nodes; ++i)
    if (row_offsets[i + 1] < row_offsets[i])
      throw std::runtime_error("row_offsets must be non-decreasing");
  if (row_offsets[num_nodes] != static_cast<int>(neighbor_ids.size()) ||
      static_cast<long long>(neighbor_ids.size()) != 2 * num_edges)
    throw std::runtime_error("edge storage does not match 2E");
  for (int u = 0; u < num_nodes; ++u) {
    auto nb = neighbors(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      int v = nb[k];
      if (v < 0 || v >= num_nodes)
        throw std::runtime_error("neighbor id out of range");
      if (v == u) throw std::runtime_error("self-loop stored at node " +
                                           std::to_string(u));
      if (k > 0 && nb[k - 1] >= v)
        throw std::runtime_error("neighbor list of node " + std::to_string(u) +
                                 " not sorted/deduplicated");
      if (!has_edge(v, u))
        throw std::runtime_error("adjacency not symmetric at (" +
                                 std::to_string(u) + ", " + std::to_string(v) +
                                 ")");
    }
  }
}

double edge_homophily(const Graph& g, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != g.num_nodes)
    throw std::invalid_argument("labels length must equal node count");
  if (g.num_edges == 0)
    throw std::runtime_error("edge homophily undefined on an edgeless graph");
  long long same = 0;
  for (int u = 0; u < g.num_nodes; ++u)
    for (int v : g.neighbors(u))
      if (u < v && labels[u] == labels[v]) ++same;
  return static_cast<double>(same) / static_cast<double>(g.num_edges);
}

double node_homophily(const Graph& g, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != g.num_nodes)
    throw std::invalid_argument("labels length must equal node count");
  double sum = 0.0;
  int counted = 0;
  for (int u = 0; u < g.num_nodes; ++u) {
    const int deg = g.degree(u);
    if (deg == 0) continue;  // 0/0 is excluded from the mean
    int same = 0;
    for (int v : g.neighbors(u))
      if (labels[u] == labels[v]) ++same;
    sum += static_cast<double>(same) / static_cast<double>(deg);
    ++counted;
  }
  if (counted == 0)
    throw std::runtime_error("node homophily undefined: all nodes isolated");
  return sum / static_cast<double>(counted);
}

std::vector<int> khop_pool(const Graph& g, std::span<const int> seeds,
                           int hops) {
  if (hops < 1) throw std::invalid_argument("hop count must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("seed set must be non-empty");
  std::vector<int> dist(g.num_nodes, -1);
  std::queue<int> frontier;
  for (int s : seeds) {
    if (s < 0 || s >= g.num_nodes)
      throw std::out_of_range("seed node out of range");
    if (dist[s] == -1) {
      dist[s] = 0;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    if (dist[u] == hops) continue;
    for (int v : g.neighbors(u)) {
      if (dist[v] == -1) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  std::vector<int> pool;
  for (int v = 0; v < g.num_nodes; ++v)
    if (dist[v] >= 0) pool.push_back(v);
  return pool;
}

}  // namespace afgcl
