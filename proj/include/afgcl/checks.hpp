#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afgcl/graph.hpp"
#include "afgcl/rng.hpp"

namespace afgcl::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;  // human-readable numbers behind the verdict
  std::string json;     // machine-readable report
  std::string csv;      // tabular payload, when the check produces one
};

/// Analytic gradients of the full contrastive objective through projector and
/// GCN versus central finite differences on 10 small random instances.
CheckResult gradcheck(std::uint64_t seed = 7);

/// Band components sum back to the Laplacian and the spectrum stays in
/// [0, 2], for random graphs up to 200 nodes and several band counts.
CheckResult band_reconstruction(std::uint64_t seed = 7);

/// Matrix-factorization loss equals the population contrastive loss up to a
/// constant on a regular transformed graph; the probability-adjacency and
/// plain adjacency agree after symmetric normalization.
CheckResult mf_equivalence(std::uint64_t seed = 7);

/// Mean embedding deviation scales like 1/sqrt(degree): degree 32 vs 8 gives
/// a ratio near 2.
CheckResult concentration(std::uint64_t seed = 7);

/// Empirical 0.95-quantile of the inner-product deviation stays below the
/// concentration bound.
CheckResult similarity_concentration(std::uint64_t seed = 7);

/// End-to-end bound check on a trained linear-mode synthetic run: the
/// unconstrained least-squares error must not exceed the bound whenever
/// lambda_{K+1} is non-vacuous.
CheckResult theorem2(std::uint64_t seed = 7);

/// Dispatch by CLI name (gradcheck, band-reconstruction, mf-equivalence,
/// concentration, similarity-concentration, theorem2). Throws on unknown
/// names.
CheckResult run_check(const std::string& name, std::uint64_t seed);

std::vector<std::string> check_names();

/// Erdos-Renyi helper shared by the checks and tests.
Graph random_er_graph(int num_nodes, double edge_prob, Rng& rng);

}  // namespace afgcl::checks
