#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "afgcl/graph.hpp"

namespace afgcl {

/// Disjoint node partition. Nodes missing from all three sets are unassigned.
struct Splits {
  std::vector<int> train, valid, test;
};

struct Dataset {
  Graph graph;
  Eigen::MatrixXd features;  // N x F, row i = features of node i
  std::vector<int> labels;   // length N, values in [0, num_classes)
  int num_classes = 0;
  std::optional<Splits> splits;

  int num_nodes() const { return graph.num_nodes; }
  int feature_dim() const { return static_cast<int>(features.cols()); }

  void validate() const;
};

/// Loads the three mandatory files.
///
/// Graph file: first line "N E", then E lines "u v" (0-based, space
/// separated). Duplicate and reversed edges are tolerated; self-loops are
/// dropped. Features: CSV with N rows and F columns, no header. Labels: N
/// lines, one non-negative integer each. Errors carry file and line number.
Dataset load_dataset(const std::string& graph_path,
                     const std::string& features_path,
                     const std::string& labels_path);

/// Optional split assignment: N lines of train / valid / test / none.
Splits load_splits(const std::string& path, int num_nodes);

/// Writes the dataset back in the same formats (canonical edge order u < v,
/// features with 17 significant digits).
void save_dataset(const Dataset& ds, const std::string& graph_path,
                  const std::string& features_path,
                  const std::string& labels_path);

}  // namespace afgcl
