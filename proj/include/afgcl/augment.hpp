#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "afgcl/graph.hpp"
#include "afgcl/spectral.hpp"

namespace afgcl::aug {

/// Removes round(p * E) undirected edges chosen uniformly without
/// replacement. Deterministic per seed.
Graph drop_edges(const Graph& g, double p, std::uint64_t seed);

/// Adds round(p * E) undirected edges sampled uniformly from the absent
/// non-equal node pairs. Throws when fewer absent pairs exist than requested.
Graph add_edges(const Graph& g, double p, std::uint64_t seed);

/// Zeroes round(p * F) feature dimensions. By default the same columns are
/// zeroed for every node; with per_node each row independently draws its own
/// set of dimensions.
Eigen::MatrixXd mask_attributes(const Eigen::MatrixXd& x, double p,
                                std::uint64_t seed, bool per_node = false);

/// Personalized PageRank diffusion alpha * (I - (1 - alpha) A_sym)^{-1},
/// computed by a direct solve. alpha in (0, 1].
spectral::DenseSymMatrix ppr_diffusion(const Graph& g, double alpha);

}  // namespace afgcl::aug
