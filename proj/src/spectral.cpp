#include "afgcl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace afgcl::spectral {

namespace {

void check_dense_guard(int n) {
  if (n > kDenseGuard)
    throw std::invalid_argument("dense spectral routines are limited to " +
                                std::to_string(kDenseGuard) + " nodes, got " +
                                std::to_string(n));
}

}  // namespace

DenseSymMatrix::DenseSymMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("DenseSymMatrix requires a square matrix");
  const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-10))
    throw std::invalid_argument(
        "matrix is not symmetric (max |M - M^T| = " + std::to_string(dev) + ")");
  m_ = 0.5 * (m + m.transpose().eval());
}

DenseSymMatrix sym_laplacian(const Graph& g) {
  check_dense_guard(g.num_nodes);
  const int n = g.num_nodes;
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    const int d = g.degree(i);
    inv_sqrt[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (g.degree(i) > 0) l(i, i) = 1.0;
    for (int j : g.neighbors(i)) l(i, j) = -inv_sqrt[i] * inv_sqrt[j];
  }
  return DenseSymMatrix(std::move(l));
}

DenseSymMatrix sym_adjacency(const Graph& g) {
  check_dense_guard(g.num_nodes);
  const int n = g.num_nodes;
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    const int d = g.degree(i);
    inv_sqrt[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors(i)) a(i, j) = inv_sqrt[i] * inv_sqrt[j];
  return DenseSymMatrix(std::move(a));
}

DenseSymMatrix sym_laplacian_weighted(const DenseSymMatrix& weights) {
  const Eigen::MatrixXd& w = weights.values();
  check_dense_guard(weights.order());
  if ((w.array() < -1e-12).any())
    throw std::invalid_argument("weighted Laplacian requires non-negative weights");
  const int n = weights.order();
  Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i)
    inv_sqrt[i] = deg[i] > 1e-300 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  Eigen::MatrixXd l =
      -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  for (int i = 0; i < n; ++i) l(i, i) += deg[i] > 1e-300 ? 1.0 : 0.0;
  return DenseSymMatrix(std::move(l));
}

EigenDecomposition eigendecompose(const DenseSymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.values());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error(
        "symmetric eigendecomposition did not converge within the solver's "
        "internal iteration budget (order " +
        std::to_string(m.order()) + ")");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

DenseSymMatrix band_component_with_lambda(const EigenDecomposition& eig,
                                          int band, int num_bands,
                                          double lambda_max) {
  const int n = static_cast<int>(eig.eigenvalues.size());
  if (num_bands < 1) throw std::invalid_argument("need at least one band");
  if (band < 1 || band > num_bands)
    throw std::out_of_range("band index " + std::to_string(band) +
                            " outside [1, " + std::to_string(num_bands) + "]");
  const double width = lambda_max / static_cast<double>(num_bands);
  Eigen::VectorXd kept = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double lam = eig.eigenvalues[i];
    int idx;
    if (width > 0.0) {
      idx = static_cast<int>(std::floor(lam / width));
      idx = std::clamp(idx, 0, num_bands - 1);
    } else {
      idx = num_bands - 1;  // degenerate spectrum collapses into the top band
    }
    if (idx == band - 1) kept[i] = lam;
  }
  Eigen::MatrixXd out = eig.eigenvectors * kept.asDiagonal() *
                        eig.eigenvectors.transpose();
  return DenseSymMatrix(std::move(out));
}

double top_eigenvalue(const EigenDecomposition& eig) {
  const auto n = eig.eigenvalues.size();
  return n > 0 ? eig.eigenvalues[n - 1] : 0.0;
}

}  // namespace

DenseSymMatrix band_component(const EigenDecomposition& eig, int band,
                              int num_bands) {
  return band_component_with_lambda(eig, band, num_bands, top_eigenvalue(eig));
}

BandProfile band_distance_profile_dense(const DenseSymMatrix& laplacian,
                                        const DenseSymMatrix& laplacian_aug,
                                        int num_bands, bool shared_lambda) {
  if (laplacian.order() != laplacian_aug.order())
    throw std::invalid_argument("band profile requires equal matrix orders");
  const EigenDecomposition e1 = eigendecompose(laplacian);
  const EigenDecomposition e2 = eigendecompose(laplacian_aug);
  const double lambda1 = top_eigenvalue(e1);
  const double lambda2 = shared_lambda ? lambda1 : top_eigenvalue(e2);
  BandProfile profile;
  profile.num_bands = num_bands;
  profile.distances.resize(num_bands);
  for (int m = 1; m <= num_bands; ++m) {
    const Eigen::MatrixXd d =
        band_component_with_lambda(e1, m, num_bands, lambda1).values() -
        band_component_with_lambda(e2, m, num_bands, lambda2).values();
    profile.distances[m - 1] = d.norm();
  }
  return profile;
}

BandProfile band_distance_profile(const Graph& g, const Graph& g_aug,
                                  int num_bands, bool shared_lambda) {
  if (g.num_nodes != g_aug.num_nodes)
    throw std::invalid_argument("band profile requires equal node counts");
  return band_distance_profile_dense(sym_laplacian(g), sym_laplacian(g_aug),
                                     num_bands, shared_lambda);
}

namespace {

/// Unitary DFT matrix of order f; symmetric, so row and column transforms
/// coincide.
Eigen::MatrixXcd dft_matrix(int f) {
  Eigen::MatrixXcd d(f, f);
  const double scale = 1.0 / std::sqrt(static_cast<double>(f));
  const double base = -2.0 * 3.141592653589793238462643383279502884 /
                      static_cast<double>(f);
  for (int j = 0; j < f; ++j)
    for (int k = 0; k < f; ++k) {
      // reduce j*k mod f first to keep the angle well-conditioned
      const long long m = (static_cast<long long>(j) * k) % f;
      d(j, k) = std::polar(scale, base * static_cast<double>(m));
    }
  return d;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> feature_dft_split(
    const Eigen::MatrixXd& x, int cutoff) {
  const int f = static_cast<int>(x.cols());
  if (cutoff < 0 || cutoff > f)
    throw std::out_of_range("cutoff must lie in [0, F]");
  const Eigen::MatrixXcd d = dft_matrix(f);
  const Eigen::MatrixXcd h = x * d;  // row-wise transform
  Eigen::MatrixXcd h_low = Eigen::MatrixXcd::Zero(x.rows(), f);
  h_low.leftCols(cutoff) = h.leftCols(cutoff);
  const Eigen::MatrixXcd h_high = h - h_low;
  const Eigen::MatrixXcd inv = d.adjoint();
  Eigen::MatrixXd x_low = (h_low * inv).real();
  Eigen::MatrixXd x_high = (h_high * inv).real();
  return {std::move(x_low), std::move(x_high)};
}

std::pair<double, double> feature_band_distance(const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& x_aug,
                                                int cutoff) {
  if (x.rows() != x_aug.rows() || x.cols() != x_aug.cols())
    throw std::invalid_argument("feature matrices must have identical shape");
  const auto [low, high] = feature_dft_split(x, cutoff);
  const auto [low_aug, high_aug] = feature_dft_split(x_aug, cutoff);
  return {(low - low_aug).norm(), (high - high_aug).norm()};
}

}  // namespace afgcl::spectral
