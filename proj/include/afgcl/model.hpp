#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "afgcl/dataset.hpp"

namespace afgcl::nn {

/// train: batch norm + ReLU in the encoder, ReLU + row L2 normalization in
/// the projector. linear: every nonlinearity and batch norm is the identity,
/// so the whole network collapses to one linear map (used by the theory
/// checks).
enum class ForwardMode { train, linear };

/// Two propagation layers plus an MLP projection head.
struct ModelParams {
  std::vector<Eigen::MatrixXd> gcn_weights;  // exactly 2
  std::vector<Eigen::VectorXd> bn_scale;     // one per GCN layer
  std::vector<Eigen::VectorXd> bn_shift;
  std::vector<Eigen::MatrixXd> proj_weights;  // >= 1, chained shapes
  std::vector<Eigen::VectorXd> proj_biases;

  int feature_dim() const { return static_cast<int>(gcn_weights[0].rows()); }
  int embed_dim() const { return static_cast<int>(gcn_weights[1].cols()); }
  int output_dim() const {
    return static_cast<int>(proj_weights.back().cols());
  }

  static ModelParams zeros_like(const ModelParams& shape);
  void check_finite() const;
};

/// Symmetric normalized adjacency with self-loops, CSR storage.
struct PropagationOperator {
  int num_nodes = 0;
  std::vector<int> offsets;
  std::vector<int> cols;
  std::vector<double> vals;

  static PropagationOperator build(const Graph& g);
  /// P * X (P is symmetric, so this also serves as the transpose product).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd dense() const;
};

/// Everything the exact backward pass needs, including a snapshot of the
/// parameters that produced it, so a trace is self-contained.
struct ForwardTrace {
  ForwardMode mode = ForwardMode::train;
  ModelParams params;
  PropagationOperator prop;
  Eigen::MatrixXd x_norm;  // row-normalized input features

  struct GcnLayer {
    Eigen::MatrixXd prop_out;  // P (in * W)
    Eigen::VectorXd bn_mean, bn_inv_std;
    Eigen::MatrixXd bn_xhat;
    Eigen::MatrixXd act;  // layer output
  };
  std::vector<GcnLayer> gcn;

  std::vector<Eigen::MatrixXd> proj_pre;  // affine outputs per projector layer
  Eigen::VectorXd row_norms;              // clamped norms, train mode only
  Eigen::MatrixXd z;

  const Eigen::MatrixXd& embedding() const { return gcn.back().act; }
};

/// Glorot-uniform weights, unit batch-norm scale, zero shifts and biases.
/// dims lists layer widths: the first three fix the two GCN layers, the rest
/// the projector chain (at least one projector layer). Deterministic per seed.
ModelParams init_params(std::uint64_t seed, const std::vector<int>& dims);

/// Input rows scaled to unit L2 norm; zero rows stay zero.
Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& x);

/// Runs the two GCN layers on the (internally row-normalized) features.
/// Returns the node embeddings H and the trace for backward().
std::pair<Eigen::MatrixXd, ForwardTrace> gcn_forward(const ModelParams& params,
                                                     const Dataset& dataset,
                                                     ForwardMode mode);

/// Applies the projection head to H and extends the trace. In train mode the
/// result has unit rows (rows whose pre-image is exactly zero stay zero).
Eigen::MatrixXd project(const ModelParams& params, const Eigen::MatrixXd& h,
                        ForwardTrace& trace);

/// Exact reverse-mode gradients of a scalar loss with the given d loss / dZ.
ModelParams backward(const Eigen::MatrixXd& loss_grad_z,
                     const ForwardTrace& trace);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step = 0;
  ModelParams first_moment;
  ModelParams second_moment;

  AdamState(const ModelParams& shape, double lr);
};

/// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, ModelParams& params,
               const ModelParams& grads);

/// Flat views over every parameter array, in a fixed order shared by params,
/// gradients and moments. Used by the optimizer and the gradient checks.
std::vector<Eigen::Map<Eigen::ArrayXd>> param_views(ModelParams& p);
std::vector<Eigen::Map<const Eigen::ArrayXd>> param_views(const ModelParams& p);

}  // namespace afgcl::nn
