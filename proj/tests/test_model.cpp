#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <unistd.h>

#include "afgcl/checkpoint.hpp"
#include "afgcl/checks.hpp"
#include "afgcl/io.hpp"
#include "afgcl/model.hpp"
#include "afgcl/rng.hpp"

using namespace afgcl;
using namespace afgcl::nn;

namespace {

Dataset random_dataset(int n, int f, double edge_prob, Rng& rng) {
  Dataset ds;
  ds.graph = checks::random_er_graph(n, edge_prob, rng);
  ds.features.resize(n, f);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j) ds.features(i, j) = rng.normal();
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels[i] = i % 2;
  ds.num_classes = 2;
  return ds;
}

}  // namespace

TEST_CASE("init_params shapes, bounds and determinism") {
  const ModelParams p = init_params(3, {4, 8, 8, 4});
  CHECK(p.gcn_weights[0].rows() == 4);
  CHECK(p.gcn_weights[0].cols() == 8);
  CHECK(p.gcn_weights[1].rows() == 8);
  CHECK(p.gcn_weights[1].cols() == 8);
  REQUIRE(p.proj_weights.size() == 1);
  CHECK(p.proj_weights[0].rows() == 8);
  CHECK(p.proj_weights[0].cols() == 4);
  CHECK((p.bn_scale[0].array() == 1.0).all());
  CHECK((p.bn_shift[1].array() == 0.0).all());
  CHECK((p.proj_biases[0].array() == 0.0).all());

  // Glorot bound per matrix
  const double b0 = std::sqrt(6.0 / (4 + 8));
  CHECK(p.gcn_weights[0].cwiseAbs().maxCoeff() <= b0);
  const double b2 = std::sqrt(6.0 / (8 + 4));
  CHECK(p.proj_weights[0].cwiseAbs().maxCoeff() <= b2);

  const ModelParams q = init_params(3, {4, 8, 8, 4});
  CHECK((p.gcn_weights[0].array() == q.gcn_weights[0].array()).all());
  const ModelParams r = init_params(4, {4, 8, 8, 4});
  CHECK_FALSE((p.gcn_weights[0].array() == r.gcn_weights[0].array()).all());

  CHECK_THROWS(init_params(0, {4, 8, 8}));  // no projector layer
}

TEST_CASE("gcn_forward hand computations in linear mode") {
  SUBCASE("single node without edges collapses to x W1 W2") {
    Dataset ds;
    ds.graph = Graph::build(1, {});
    ds.features = Eigen::MatrixXd::Constant(1, 3, 0.0);
    ds.features << 3.0, 0.0, 4.0;  // row norm 5
    ds.labels = {0};
    ds.num_classes = 1;
    const ModelParams p = init_params(11, {3, 4, 2, 2});
    const auto [h, trace] = gcn_forward(p, ds, ForwardMode::linear);
    const Eigen::RowVectorXd x_norm = ds.features.row(0) / 5.0;
    const Eigen::RowVectorXd expected =
        x_norm * p.gcn_weights[0] * p.gcn_weights[1];
    CHECK((h.row(0) - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("zero features give zero embeddings") {
    Dataset ds;
    ds.graph = Graph::build(2, {});
    ds.features = Eigen::MatrixXd::Zero(2, 3);
    ds.labels = {0, 0};
    ds.num_classes = 1;
    const ModelParams p = init_params(1, {3, 4, 2, 2});
    const auto [h, trace] = gcn_forward(p, ds, ForwardMode::linear);
    CHECK(h.norm() == 0.0);
  }
  SUBCASE("isolated nodes with equal features get equal rows") {
    Dataset ds;
    ds.graph = Graph::build(3, {});
    ds.features.resize(3, 2);
    ds.features << 1.0, 2.0, 1.0, 2.0, 5.0, -1.0;
    ds.labels = {0, 0, 0};
    ds.num_classes = 1;
    const ModelParams p = init_params(2, {2, 4, 3, 3});
    const auto [h, trace] = gcn_forward(p, ds, ForwardMode::linear);
    CHECK((h.row(0) - h.row(1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h.row(0) - h.row(2)).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("linear mode composes to a single matrix") {
  Rng rng(21);
  const Dataset ds = random_dataset(30, 6, 0.15, rng);
  const ModelParams p = init_params(9, {6, 5, 4, 4, 4});
  const auto [h, trace] = gcn_forward(p, ds, ForwardMode::linear);
  const Eigen::MatrixXd z = [&] {
    ForwardTrace t = trace;
    return project(p, h, t);
  }();

  const Eigen::MatrixXd prop = trace.prop.dense();
  const Eigen::MatrixXd x_norm = l2_normalize_rows(ds.features);
  const Eigen::MatrixXd h_dense =
      prop * prop * x_norm * p.gcn_weights[0] * p.gcn_weights[1];
  CHECK((h - h_dense).cwiseAbs().maxCoeff() <= 1e-10);

  Eigen::MatrixXd z_dense = h_dense;
  for (std::size_t l = 0; l < p.proj_weights.size(); ++l)
    z_dense = (z_dense * p.proj_weights[l]).rowwise() +
              p.proj_biases[l].transpose();
  CHECK((z - z_dense).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("propagation operator normalizes with self-loops") {
  // star 0-1, 0-2: degrees with self-loops are 3, 2, 2
  const Graph star = Graph::build(3, std::vector<std::pair<int, int>>{{0, 1}, {0, 2}});
  const auto prop = PropagationOperator::build(star);
  const Eigen::MatrixXd d = prop.dense();
  CHECK(d(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(d(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(d(1, 1) == doctest::Approx(0.5));
  CHECK((d - d.transpose()).norm() == 0.0);
  // rows of P sum to <= 1 and the operator matches its dense form
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  CHECK((prop.apply(x) - d * x).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("project yields unit rows in train mode") {
  Rng rng(31);
  const Dataset ds = random_dataset(25, 5, 0.2, rng);
  const ModelParams p = init_params(17, {5, 6, 4, 4, 4});
  auto [h, trace] = gcn_forward(p, ds, ForwardMode::train);
  const Eigen::MatrixXd z = project(p, h, trace);
  for (int i = 0; i < 25; ++i) {
    const double n = z.row(i).norm();
    // rows are either unit or exactly zero (clamped pre-image)
    CHECK((std::abs(n - 1.0) <= 1e-9 || n == 0.0));
  }
  // duplicate embedding rows produce duplicate projections
  Eigen::MatrixXd h2 = h;
  h2.row(1) = h2.row(0);
  ForwardTrace t2 = trace;
  const Eigen::MatrixXd z2 = project(p, h2, t2);
  CHECK((z2.row(0) - z2.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: zero upstream gradient gives zero parameter gradients") {
  Rng rng(41);
  const Dataset ds = random_dataset(20, 5, 0.2, rng);
  const ModelParams p = init_params(19, {5, 6, 4, 4, 4});
  auto [h, trace] = gcn_forward(p, ds, ForwardMode::train);
  const Eigen::MatrixXd z = project(p, h, trace);
  const ModelParams g = backward(Eigen::MatrixXd::Zero(20, 4), trace);
  for (auto view : param_views(g)) CHECK(view.abs().maxCoeff() == 0.0);
}

TEST_CASE("backward: sum of squares of normalized rows has zero gradient") {
  // d(sum z^2)/dz = 2z is radial; the normalization Jacobian annihilates it
  Rng rng(43);
  const Dataset ds = random_dataset(18, 5, 0.25, rng);
  ModelParams p = init_params(23, {5, 6, 4, 4, 4});
  // bias jitter keeps every row off the normalization floor
  for (auto& b : p.proj_biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 * rng.normal();
  auto [h, trace] = gcn_forward(p, ds, ForwardMode::train);
  const Eigen::MatrixXd z = project(p, h, trace);
  for (int i = 0; i < 18; ++i) REQUIRE(z.row(i).norm() > 0.5);
  const ModelParams g = backward(2.0 * z, trace);
  for (auto view : param_views(g)) CHECK(view.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("backward matches finite differences on a scalar probe loss") {
  // probe loss: sum of Z entries weighted by a fixed random matrix
  Rng rng(47);
  const Dataset ds = random_dataset(15, 4, 0.25, rng);
  ModelParams params = init_params(29, {4, 5, 3, 3, 3});
  for (auto view : param_views(params))
    for (Eigen::Index i = 0; i < view.size(); ++i)
      view[i] += 0.05 * rng.normal();
  Eigen::MatrixXd weights(15, 3);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 3; ++j) weights(i, j) = rng.normal();

  for (ForwardMode mode : {ForwardMode::train, ForwardMode::linear}) {
    const auto loss_at = [&](const ModelParams& p) {
      auto [h, t] = gcn_forward(p, ds, mode);
      return (project(p, h, t).cwiseProduct(weights)).sum();
    };
    ModelParams analytic;
    {
      auto [h, t] = gcn_forward(params, ds, mode);
      project(params, h, t);
      analytic = backward(weights, t);
    }
    auto pv = param_views(params);
    auto av = param_views(analytic);
    double worst = 0.0;
    for (std::size_t a = 0; a < pv.size(); ++a)
      for (Eigen::Index i = 0; i < pv[a].size(); ++i) {
        const double saved = pv[a][i];
        pv[a][i] = saved + 1e-5;
        const double up = loss_at(params);
        pv[a][i] = saved - 1e-5;
        const double down = loss_at(params);
        pv[a][i] = saved;
        const double fd = (up - down) / 2e-5;
        const double rel = std::abs(av[a][i] - fd) /
                           std::max({std::abs(av[a][i]), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
      }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("permutation equivariance of the forward pass") {
  Rng rng(53);
  const Dataset ds = random_dataset(30, 6, 0.15, rng);
  const ModelParams p = init_params(31, {6, 7, 5, 5, 5});

  std::vector<int> perm(30);
  for (int i = 0; i < 30; ++i) perm[i] = i;
  for (int i = 29; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

  Dataset permuted;
  std::vector<std::pair<int, int>> edges;
  for (const auto& [u, v] : ds.graph.undirected_edges())
    edges.emplace_back(perm[u], perm[v]);
  permuted.graph = Graph::build(30, edges);
  permuted.features.resize(30, 6);
  permuted.labels.resize(30);
  for (int i = 0; i < 30; ++i) {
    permuted.features.row(perm[i]) = ds.features.row(i);
    permuted.labels[perm[i]] = ds.labels[i];
  }
  permuted.num_classes = ds.num_classes;

  for (ForwardMode mode : {ForwardMode::train, ForwardMode::linear}) {
    auto [h1, t1] = gcn_forward(p, ds, mode);
    auto [h2, t2] = gcn_forward(p, permuted, mode);
    const Eigen::MatrixXd z1 = project(p, h1, t1);
    const Eigen::MatrixXd z2 = project(p, h2, t2);
    for (int i = 0; i < 30; ++i) {
      CHECK((h2.row(perm[i]) - h1.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((z2.row(perm[i]) - z1.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("adam_step") {
  ModelParams p = init_params(61, {3, 4, 2, 2, 2});
  AdamState state(p, 0.01);

  SUBCASE("zero gradients leave parameters unchanged") {
    const ModelParams before = p;
    adam_step(state, p, ModelParams::zeros_like(p));
    auto pv = param_views(p);
    auto bv = param_views(before);
    for (std::size_t a = 0; a < pv.size(); ++a)
      CHECK((pv[a] == bv[a]).all());
  }

  SUBCASE("first step moves against the gradient sign with magnitude <= lr") {
    ModelParams grads = ModelParams::zeros_like(p);
    Rng rng(3);
    for (auto view : param_views(grads))
      for (Eigen::Index i = 0; i < view.size(); ++i)
        view[i] = rng.normal();
    const ModelParams before = p;
    adam_step(state, p, grads);
    auto pv = param_views(p);
    auto bv = param_views(before);
    auto gv = param_views(grads);
    for (std::size_t a = 0; a < pv.size(); ++a)
      for (Eigen::Index i = 0; i < pv[a].size(); ++i) {
        const double delta = pv[a][i] - bv[a][i];
        if (gv[a][i] != 0.0) {
          CHECK(delta * gv[a][i] <= 0.0);
          CHECK(std::abs(delta) <= 0.01 * (1.0 + 1e-6));
          // first-step update is -lr * g / (|g| + eps')
          CHECK(std::abs(delta) ==
                doctest::Approx(0.01 * std::abs(gv[a][i]) /
                                (std::abs(gv[a][i]) + 1e-8 * std::sqrt(1.0 - 0.999)))
                    .epsilon(1e-6));
        }
      }
  }

  SUBCASE("identical runs produce identical trajectories") {
    ModelParams p1 = init_params(5, {3, 4, 2, 2, 2});
    ModelParams p2 = init_params(5, {3, 4, 2, 2, 2});
    AdamState s1(p1, 0.02), s2(p2, 0.02);
    Rng rng(8);
    for (int step = 0; step < 5; ++step) {
      ModelParams grads = ModelParams::zeros_like(p1);
      for (auto view : param_views(grads))
        for (Eigen::Index i = 0; i < view.size(); ++i)
          view[i] = rng.normal();
      adam_step(s1, p1, grads);
      adam_step(s2, p2, grads);
    }
    auto v1 = param_views(p1);
    auto v2 = param_views(p2);
    for (std::size_t a = 0; a < v1.size(); ++a) CHECK((v1[a] == v2[a]).all());
  }
}

TEST_CASE("checkpoint round-trip is exact and versioned") {
  const ModelParams p = init_params(71, {5, 6, 4, 4, 4});
  const auto path = (std::filesystem::temp_directory_path() /
                     ("afgcl_ckpt_" + std::to_string(::getpid()) + ".bin"))
                        .string();
  save_checkpoint(path, p);
  const ModelParams q = load_checkpoint(path);
  auto pv = param_views(p);
  auto qv = param_views(q);
  REQUIRE(pv.size() == qv.size());
  for (std::size_t a = 0; a < pv.size(); ++a) CHECK((pv[a] == qv[a]).all());

  // corrupting the version string must be rejected
  std::string bytes = io::read_file(path);
  const auto pos = bytes.find("afgcl-ckpt-1");
  REQUIRE(pos != std::string::npos);
  bytes[pos + 11] = '9';
  io::write_file(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("version"),
                       std::runtime_error);
  std::filesystem::remove(path);
}
