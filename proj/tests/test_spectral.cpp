#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "afgcl/checks.hpp"
#include "afgcl/graph.hpp"
#include "afgcl/rng.hpp"
#include "afgcl/spectral.hpp"

using namespace afgcl;
using namespace afgcl::spectral;

namespace {

Graph make_graph(int n, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> e(edges);
  return Graph::build(n, e);
}

const Graph kP2 = make_graph(2, {{0, 1}});
const Graph kTriangle = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});

}  // namespace

TEST_CASE("DenseSymMatrix rejects asymmetry beyond the tolerance") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.5 + 1e-8, 1.0;
  CHECK_THROWS(DenseSymMatrix(m));
  m(1, 0) = 0.5 + 1e-12;
  CHECK_NOTHROW([&] { DenseSymMatrix ok(m); }());
}

TEST_CASE("sym_laplacian hand computations") {
  const Eigen::MatrixXd p2 = sym_laplacian(kP2).values();
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK((p2 - expected).norm() == 0.0);

  const Eigen::MatrixXd tri = sym_laplacian(kTriangle).values();
  CHECK(tri(0, 0) == 1.0);
  CHECK(tri(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
  const auto eig = eigendecompose(DenseSymMatrix(tri));
  CHECK(eig.eigenvalues[0] == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.5));
  CHECK(eig.eigenvalues[2] == doctest::Approx(1.5));

  // isolated node: all-zero row and column
  const Graph iso = make_graph(3, {{0, 1}});
  const Eigen::MatrixXd l = sym_laplacian(iso).values();
  CHECK(l.row(2).norm() == 0.0);
  CHECK(l.col(2).norm() == 0.0);
  CHECK(l(0, 0) == 1.0);
}

TEST_CASE("sym_laplacian enforces the dense-size guard") {
  Graph big;
  big.num_nodes = kDenseGuard + 1;
  big.num_edges = 0;
  big.row_offsets.assign(big.num_nodes + 1, 0);
  CHECK_THROWS(sym_laplacian(big));
}

TEST_CASE("eigendecompose basics") {
  const auto eig = eigendecompose(sym_laplacian(kP2));
  CHECK(eig.eigenvalues[0] == doctest::Approx(0.0).scale(1).epsilon(1e-14));
  CHECK(eig.eigenvalues[1] == doctest::Approx(2.0));

  const DenseSymMatrix identity(Eigen::MatrixXd::Identity(5, 5));
  const auto ei = eigendecompose(identity);
  CHECK((ei.eigenvalues.array() - 1.0).abs().maxCoeff() <= 1e-14);

  const DenseSymMatrix zero(Eigen::MatrixXd::Zero(4, 4));
  CHECK(eigendecompose(zero).eigenvalues.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigendecomposition reconstruction and orthonormality") {
  Rng rng(12);
  const Graph g = checks::random_er_graph(60, 0.1, rng);
  const auto lap = sym_laplacian(g);
  const auto eig = eigendecompose(lap);
  const Eigen::MatrixXd recon = eig.eigenvectors *
                                eig.eigenvalues.asDiagonal() *
                                eig.eigenvectors.transpose();
  CHECK((recon - lap.values()).norm() <= 1e-8 * std::max(1.0, lap.values().norm()));
  const Eigen::MatrixXd gram =
      eig.eigenvectors.transpose() * eig.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(60, 60)).norm() <= 1e-8);
}

TEST_CASE("band_component splits the spectrum") {
  const auto eig = eigendecompose(sym_laplacian(kP2));
  const Eigen::MatrixXd band1 = band_component(eig, 1, 2).values();
  const Eigen::MatrixXd band2 = band_component(eig, 2, 2).values();
  CHECK(band1.norm() == 0.0);  // eigenvalue 0 contributes nothing
  CHECK((band2 - sym_laplacian(kP2).values()).norm() <= 1e-14);

  // single band reproduces the full matrix
  const auto tri_eig = eigendecompose(sym_laplacian(kTriangle));
  CHECK((band_component(tri_eig, 1, 1).values() -
         sym_laplacian(kTriangle).values())
            .norm() <= 1e-14);

  // triangle with M = 10: all mass in the band containing 1.5 (the top band)
  for (int m = 1; m <= 9; ++m)
    CHECK(band_component(tri_eig, m, 10).values().norm() <= 1e-14);
  CHECK((band_component(tri_eig, 10, 10).values() -
         sym_laplacian(kTriangle).values())
            .norm() <= 1e-14);

  CHECK_THROWS_AS(band_component(tri_eig, 0, 10), std::out_of_range);
  CHECK_THROWS_AS(band_component(tri_eig, 11, 10), std::out_of_range);
}

TEST_CASE("band components reconstruct and have disjoint spectral support") {
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const Graph g = checks::random_er_graph(50, 0.08, rng);
    const auto lap = sym_laplacian(g);
    const auto eig = eigendecompose(lap);
    for (int m_count : {1, 2, 5, 10}) {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(50, 50);
      std::vector<Eigen::MatrixXd> bands;
      for (int m = 1; m <= m_count; ++m) {
        bands.push_back(band_component(eig, m, m_count).values());
        sum += bands.back();
      }
      CHECK((sum - lap.values()).norm() <= 1e-8);
      for (int a = 0; a < m_count; ++a)
        for (int b = a + 1; b < m_count; ++b)
          CHECK((bands[a] * bands[b]).norm() <= 1e-6);
    }
  }
}

TEST_CASE("band_distance_profile") {
  Rng rng(8);
  const Graph g = checks::random_er_graph(40, 0.15, rng);
  const auto self = band_distance_profile(g, g, 10);
  for (double d : self.distances) CHECK(d == 0.0);

  // P2 against the empty graph: all-zero spectrum on one side
  const Graph empty2 = make_graph(2, {});
  const auto prof = band_distance_profile(kP2, empty2, 2);
  CHECK(prof.distances[0] == doctest::Approx(0.0));
  CHECK(prof.distances[1] == doctest::Approx(2.0));

  const Graph other = make_graph(40, {{0, 1}});
  CHECK_THROWS(band_distance_profile(g, make_graph(39, {}), 10));
  CHECK(band_distance_profile(g, other, 10).distances.size() == 10);
}

TEST_CASE("feature_dft_split basics") {
  SUBCASE("constant rows carry only the zero frequency") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 8, 2.5);
    const auto [low, high] = feature_dft_split(x, 1);
    CHECK(high.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((low - x).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("zero input splits into zeros") {
    const auto [low, high] = feature_dft_split(Eigen::MatrixXd::Zero(2, 5), 3);
    CHECK(low.norm() == 0.0);
    CHECK(high.norm() == 0.0);
  }
  SUBCASE("cutoff F keeps everything in the low part") {
    Rng rng(2);
    Eigen::MatrixXd x(4, 6);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 6; ++j) x(i, j) = rng.normal();
    const auto [low, high] = feature_dft_split(x, 6);
    CHECK((low - x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(high.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("cutoff bounds") {
    CHECK_THROWS_AS(feature_dft_split(Eigen::MatrixXd::Zero(1, 4), 5),
                    std::out_of_range);
    CHECK_THROWS_AS(feature_dft_split(Eigen::MatrixXd::Zero(1, 4), -1),
                    std::out_of_range);
  }
}

TEST_CASE("feature_dft_split reconstruction and energy split") {
  Rng rng(6);
  Eigen::MatrixXd x(5, 12);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 12; ++j) x(i, j) = rng.normal();
  for (int cutoff : {0, 3, 7, 12}) {
    const auto [low, high] = feature_dft_split(x, cutoff);
    CHECK((low + high - x).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("feature_band_distance") {
  Rng rng(10);
  const int f = 8, cutoff = 2;
  Eigen::MatrixXd x(3, f);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < f; ++j) x(i, j) = rng.normal();

  SUBCASE("identical inputs give zero distances") {
    const auto [lo, hi] = feature_band_distance(x, x, cutoff);
    CHECK(lo == 0.0);
    CHECK(hi == 0.0);
  }

  SUBCASE("a perturbation built from high-frequency basis columns leaves the "
          "low distance at zero") {
    // mirror-closed spectral support {3, 5} (and the self-paired 4) keeps the
    // perturbation real with no leakage below the cutoff
    Eigen::MatrixXcd spectrum = Eigen::MatrixXcd::Zero(3, f);
    for (int i = 0; i < 3; ++i) {
      const std::complex<double> c(rng.normal(), rng.normal());
      spectrum(i, 3) = c;
      spectrum(i, 5) = std::conj(c);
      spectrum(i, 4) = rng.normal();
    }
    Eigen::MatrixXcd dft(f, f);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    for (int j = 0; j < f; ++j)
      for (int k = 0; k < f; ++k)
        dft(j, k) = std::polar(scale, -2.0 * M_PI * j * k / f);
    const Eigen::MatrixXd perturbation =
        (spectrum * dft.adjoint()).real();
    const auto [lo, hi] = feature_band_distance(x, x + perturbation, cutoff);
    CHECK(lo <= 1e-8);
    CHECK(hi > 0.0);
  }

  SUBCASE("shape mismatch throws") {
    CHECK_THROWS(feature_band_distance(x, Eigen::MatrixXd::Zero(2, f), cutoff));
  }
}
