#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "afgcl/dataset.hpp"

namespace afgcl {

/// Generator settings for label-conditioned random graphs with Gaussian
/// mixture features. Neighbor labels of a class-y node are drawn from
/// neighbor_label_distribution row y, which covers both homophilic
/// (diagonal-heavy) and heterophilic (off-diagonal) wiring.
struct SyntheticConfig {
  int num_nodes = 0;
  int feature_dim = 0;
  int num_classes = 2;
  double mean_degree = 0.0;
  Eigen::MatrixXd neighbor_label_distribution;  // c x c, rows sum to 1
  Eigen::VectorXd class_prior;                  // length c, sums to 1
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parses the JSON config (field names match the struct).
SyntheticConfig parse_synthetic_config(const std::string& json_text);
std::string synthetic_config_to_json(const SyntheticConfig& config);

/// Draws a dataset: labels from the class prior, features
/// x_i = s(y_i) * mu_{y_i} + q_i / sqrt(F) with mu ~ N(0, I/F) and q_i
/// standard normal, and edges wired by sampling ~mean_degree neighbor-label
/// targets per node and connecting to uniformly chosen members of that class
/// (symmetrized, deduplicated). With two classes a single mu is shared and
/// s(y) = ±1; with more classes each class has its own mu and s = 1.
///
/// Pure function of the config: the same config yields an identical dataset.
Dataset synthesize(const SyntheticConfig& config);

}  // namespace afgcl
