#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "afgcl/contrastive.hpp"
#include "afgcl/dataset.hpp"
#include "afgcl/model.hpp"
#include "afgcl/spectral.hpp"
#include "afgcl/synth.hpp"

namespace afgcl::theory {

/// Graph over the original node set whose edges are the selected positive
/// pairs, symmetrized and deduplicated.
struct TransformedGraph {
  Graph graph;
};

TransformedGraph build_transformed_graph(const gcl::PositiveSelection& selection,
                                         int num_nodes);

/// Squared Frobenius norm of A_hat_sym - F F^T.
double mf_loss(const spectral::DenseSymMatrix& a_hat_sym,
               const Eigen::MatrixXd& f);

struct EquivalenceReport {
  double max_deviation = 0.0;   // spread of (mf loss - population loss)
  double constant = 0.0;        // the common difference, = ||A_hat_sym||_F^2
  double w_vs_a_max_abs = 0.0;  // max |W_hat_sym - A_hat_sym|
  int common_degree = 0;
};

/// Verifies that the matrix factorization loss and the population contrastive
/// loss over the transformed graph differ by a constant across random
/// embeddings. The embeddings are rescaled by 1/sqrt(w_i) (uniform on a
/// regular graph) before entering the contrastive side. Requires a regular
/// transformed graph; throws with a diagnosis otherwise.
EquivalenceReport check_equivalence(const TransformedGraph& transformed,
                                    int num_trials, std::uint64_t seed,
                                    int embed_dim = 8);

/// Population form of the contrastive objective on a graph: exact
/// expectations instead of sampled seeds and negatives.
double population_contrastive_loss(const Graph& g, const Eigen::MatrixXd& z);

struct ConcentrationOptions {
  int nodes_per_trial = 200;
  double noise_scale = 1.0;  // multiplies the q_i / sqrt(F) feature noise
  double delta = 0.05;       // confidence level for the reported bound
  Eigen::MatrixXd weight;    // aggregation weight W; empty means identity
};

struct ConcentrationRow {
  int degree = 0;
  double mean_deviation = 0.0;  // mean || Z_i - E[Z_i | y_i] ||_2
  double bound = 0.0;           // concentration bound at this degree
};

/// Monte-Carlo study of one-layer mean aggregation under the label-conditioned
/// neighborhood model: nodes draw a class, a fixed-size neighborhood with
/// labels from the class-conditional distribution, and Gaussian-mixture
/// features sharing one latent vector across the whole experiment. Per-class
/// expectations come from an independent sample 10x the size of the main one.
std::vector<ConcentrationRow> concentration_experiment(
    const SyntheticConfig& config, std::span<const int> degree_levels,
    int trials, const ConcentrationOptions& opts = {});

struct SimilarityConcentrationReport {
  double quantile = 0.0;  // empirical (1 - delta) quantile of |s - E[s]|
  double bound = 0.0;
  double mean_deviation = 0.0;
  double max_deviation = 0.0;
  int num_samples = 0;
};

/// Same generative model, applied to inner products Z_i^T Z_j of independent
/// node pairs. `trials` is the number of sampled pairs.
SimilarityConcentrationReport similarity_concentration_experiment(
    const SyntheticConfig& config, int trials,
    const ConcentrationOptions& opts = {});

struct BoundReport {
  double phi_bar = 0.0;           // 1 - edge homophily of transformed graph
  double lambda_k_plus_1 = 0.0;   // (K+1)-th smallest Laplacian eigenvalue
  double sigma_max_sq = 0.0;      // largest singular value of W^T W
  double psi1_norm = 0.0;         // estimated sub-exponential norm of x^2
  double delta = 0.0;
  double bound_value = 0.0;            // (phi_bar + sqrt-term) / lambda
  double bound_value_main_text = 0.0;  // algebraically equal alternate form
  double measured_error = 0.0;    // unconstrained least-squares one-hot error
  int min_degree = 0;             // min degree of the original graph
  bool vacuous = false;           // lambda_{K+1} <= 1e-10
};

/// Evaluates the downstream error bound for a linear-mode model against the
/// actual least-squares error of predicting one-hot labels from the learned
/// embedding. The unconstrained least-squares error lower-bounds the
/// norm-constrained one, so measured_error <= bound_value is the direction
/// the bound promises whenever it is non-vacuous.
BoundReport theorem2_report(const Dataset& dataset,
                            const nn::ModelParams& linear_params,
                            const gcl::PositiveSelection& selection,
                            int embed_dim, double delta);

/// Smallest t with mean(exp(|x|^p / t^p)) <= 2 over the samples, by
/// bisection. p = 2 gives the sub-gaussian norm, p = 1 (with squared samples)
/// the sub-exponential norm of the square.
double estimate_orlicz_norm(std::span<const double> samples, double p);

}  // namespace afgcl::theory
