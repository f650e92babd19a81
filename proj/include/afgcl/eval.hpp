#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "afgcl/dataset.hpp"

namespace afgcl::eval {

/// Random disjoint partition with sizes round(ratio * N); the test set takes
/// the remainder. Throws if any part ends up empty. Deterministic per seed.
Splits make_splits(int num_nodes, double train_ratio, double valid_ratio,
                   double test_ratio, std::uint64_t seed);

struct ProbeOptions {
  int epochs = 1000;
  double learning_rate = 5e-4;
};

/// Trains a single linear softmax classifier on the frozen embeddings
/// (full batch, Adam, fixed epochs, final-epoch parameters) and returns test
/// accuracy. Throws if the training split contains a single class.
double linear_probe(const Eigen::MatrixXd& embeddings,
                    std::span<const int> labels, const Splits& splits,
                    int num_classes, const ProbeOptions& opts = {});

/// Per-class scores of the trained probe for every node (used for AUC).
Eigen::MatrixXd linear_probe_scores(const Eigen::MatrixXd& embeddings,
                                    std::span<const int> labels,
                                    const Splits& splits, int num_classes,
                                    const ProbeOptions& opts = {});

/// Rank-based (Mann-Whitney) AUC; ties contribute 1/2. Both classes must be
/// present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct EvalSummary {
  std::string metric;  // "accuracy" or "auc"
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<double> runs;
};

std::string eval_summary_to_json(const EvalSummary& summary);

}  // namespace afgcl::eval
