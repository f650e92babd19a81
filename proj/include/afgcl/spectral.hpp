#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "afgcl/graph.hpp"

namespace afgcl::spectral {

/// Largest node count accepted by the dense routines.
inline constexpr int kDenseGuard = 10000;

/// Dense symmetric matrix. Construction rejects inputs that deviate from
/// symmetry by more than 1e-10 elementwise and stores (M + M^T) / 2.
class DenseSymMatrix {
 public:
  explicit DenseSymMatrix(Eigen::MatrixXd m);

  const Eigen::MatrixXd& values() const { return m_; }
  int order() const { return static_cast<int>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

/// Eigenvalues ascending; column i of eigenvectors pairs with eigenvalue i.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Frobenius distance between matched frequency-band components of two
/// matrices.
struct BandProfile {
  int num_bands = 0;
  std::vector<double> distances;
};

/// Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2}. Isolated nodes get
/// all-zero rows and columns (d^{-1/2} = 0 convention), so their diagonal is
/// 0 rather than 1.
DenseSymMatrix sym_laplacian(const Graph& g);

/// Same construction for a dense non-negative weighted adjacency (degrees are
/// row sums). Used for diffusion matrices.
DenseSymMatrix sym_laplacian_weighted(const DenseSymMatrix& weights);

/// D^{-1/2} A D^{-1/2} with the same isolated-node convention.
DenseSymMatrix sym_adjacency(const Graph& g);

EigenDecomposition eigendecompose(const DenseSymMatrix& m);

/// Spectral projection of the decomposed matrix onto eigenvalues falling in
/// the m-th of M equal sub-intervals of [0, lambda_max]. Intervals are
/// half-open except band M, which is closed on the right so lambda_max itself
/// is assigned. The components of all bands sum back to the input.
DenseSymMatrix band_component(const EigenDecomposition& eig, int band,
                              int num_bands);

/// Per-band Frobenius distance between the Laplacian band components of two
/// same-size graphs. Each side uses its own lambda_max for band boundaries
/// unless shared_lambda is set, in which case g's lambda_max is reused.
BandProfile band_distance_profile(const Graph& g, const Graph& g_aug,
                                  int num_bands, bool shared_lambda = false);

/// Dense variant for weighted adjacencies (e.g. diffusion output).
BandProfile band_distance_profile_dense(const DenseSymMatrix& laplacian,
                                        const DenseSymMatrix& laplacian_aug,
                                        int num_bands,
                                        bool shared_lambda = false);

/// Row-wise unitary DFT split along the feature axis. Keeps the first
/// `cutoff` frequency columns (1-based j <= R) in the low part; the outputs
/// are the real parts of the inverse transforms and always sum back to X.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> feature_dft_split(
    const Eigen::MatrixXd& x, int cutoff);

/// Frobenius distances between the low parts and the high parts of two
/// feature matrices of identical shape.
std::pair<double, double> feature_band_distance(const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& x_aug,
                                                int cutoff);

}  // namespace afgcl::spectral
