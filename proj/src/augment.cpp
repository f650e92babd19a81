#include "afgcl/augment.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "afgcl/rng.hpp"

namespace afgcl::aug {

namespace {

void check_fraction(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("fraction must lie in [0, 1]");
}

long long round_count(double x) {
  return static_cast<long long>(std::llround(x));  // half away from zero
}

/// First k entries of a partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

Graph drop_edges(const Graph& g, double p, std::uint64_t seed) {
  check_fraction(p);
  auto edges = g.undirected_edges();
  const std::size_t remove =
      static_cast<std::size_t>(round_count(p * static_cast<double>(g.num_edges)));
  Rng rng = Rng(seed).fork(0x64726f70);
  auto drop = sample_without_replacement(edges.size(), remove, rng);
  std::sort(drop.begin(), drop.end());
  std::vector<std::pair<int, int>> kept;
  kept.reserve(edges.size() - remove);
  std::size_t next = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (next < drop.size() && drop[next] == i) {
      ++next;
      continue;
    }
    kept.push_back(edges[i]);
  }
  return Graph::build(g.num_nodes, kept);
}

Graph add_edges(const Graph& g, double p, std::uint64_t seed) {
  check_fraction(p);
  const long long n = g.num_nodes;
  const long long total_pairs = n * (n - 1) / 2;
  const long long absent = total_pairs - g.num_edges;
  const long long add = round_count(p * static_cast<double>(g.num_edges));
  if (add > absent)
    throw std::runtime_error("add_edges: requested " + std::to_string(add) +
                             " new edges but only " + std::to_string(absent) +
                             " absent pairs exist");
  auto edges = g.undirected_edges();
  if (add == 0) return g;

  Rng rng = Rng(seed).fork(0x616464);
  if (absent <= 4 * add || total_pairs <= (1 << 22)) {
    // dense regime: enumerate the absent pairs and sample directly
    std::vector<std::pair<int, int>> pool;
    pool.reserve(static_cast<std::size_t>(absent));
    for (int u = 0; u < g.num_nodes; ++u)
      for (int v = u + 1; v < g.num_nodes; ++v)
        if (!g.has_edge(u, v)) pool.emplace_back(u, v);
    auto picks = sample_without_replacement(
        pool.size(), static_cast<std::size_t>(add), rng);
    for (std::size_t i : picks) edges.push_back(pool[i]);
  } else {
    // sparse regime: rejection sampling against existing and new pairs
    std::unordered_set<long long> chosen;
    auto key = [n](int u, int v) { return static_cast<long long>(u) * n + v; };
    while (chosen.size() < static_cast<std::size_t>(add)) {
      int u = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      int v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (g.has_edge(u, v)) continue;
      if (chosen.insert(key(u, v)).second) edges.emplace_back(u, v);
    }
  }
  return Graph::build(g.num_nodes, edges);
}

Eigen::MatrixXd mask_attributes(const Eigen::MatrixXd& x, double p,
                                std::uint64_t seed, bool per_node) {
  check_fraction(p);
  const std::size_t f = static_cast<std::size_t>(x.cols());
  const std::size_t k =
      static_cast<std::size_t>(round_count(p * static_cast<double>(f)));
  Eigen::MatrixXd out = x;
  Rng rng = Rng(seed).fork(0x6d61736b);
  if (per_node) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (std::size_t j : sample_without_replacement(f, k, rng))
        out(i, static_cast<Eigen::Index>(j)) = 0.0;
    }
  } else {
    for (std::size_t j : sample_without_replacement(f, k, rng))
      out.col(static_cast<Eigen::Index>(j)).setZero();
  }
  return out;
}

spectral::DenseSymMatrix ppr_diffusion(const Graph& g, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("diffusion factor must lie in (0, 1]");
  const Eigen::MatrixXd a_sym = spectral::sym_adjacency(g).values();
  const int n = g.num_nodes;
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * a_sym;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  // spectral radius of (1-alpha) A_sym is < 1 for alpha > 0, so the system is
  // invertible; the determinant check is a numerical backstop
  if (std::abs(lu.determinant()) < 1e-300)
    throw std::runtime_error("ppr_diffusion: singular system");
  Eigen::MatrixXd s = alpha * lu.solve(Eigen::MatrixXd::Identity(n, n));
  return spectral::DenseSymMatrix(std::move(s));
}

}  // namespace afgcl::aug
