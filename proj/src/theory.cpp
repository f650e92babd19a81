#include "afgcl/theory.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "afgcl/rng.hpp"

namespace afgcl::theory {

namespace {

int draw_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int c = static_cast<int>(probs.size());
  for (int k = 0; k < c; ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return c - 1;
}

double largest_singular_value(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

TransformedGraph build_transformed_graph(
    const gcl::PositiveSelection& selection, int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& s : selection)
    for (int j : s.ids) edges.emplace_back(s.seed_node, j);
  return {Graph::build(num_nodes, edges)};
}

double mf_loss(const spectral::DenseSymMatrix& a_hat_sym,
               const Eigen::MatrixXd& f) {
  if (f.rows() != a_hat_sym.order())
    throw std::invalid_argument("embedding rows must match matrix order");
  return (a_hat_sym.values() - f * f.transpose()).squaredNorm();
}

double population_contrastive_loss(const Graph& g, const Eigen::MatrixXd& z) {
  const int n = g.num_nodes;
  if (static_cast<int>(z.rows()) != n)
    throw std::invalid_argument("embedding rows must match node count");
  double pos = 0.0;
  for (int i = 0; i < n; ++i) {
    const int deg = g.degree(i);
    if (deg == 0) continue;
    double acc = 0.0;
    for (int j : g.neighbors(i)) acc += z.row(i).dot(z.row(j));
    pos += acc / static_cast<double>(deg);
  }
  pos /= static_cast<double>(n);
  // E_{j,k ~ Uni(V)} (Z_j . Z_k)^2 through the Gram matrix
  const double neg = (z.transpose() * z).squaredNorm() /
                     (static_cast<double>(n) * static_cast<double>(n));
  return -2.0 * pos + neg;
}

EquivalenceReport check_equivalence(const TransformedGraph& transformed,
                                    int num_trials, std::uint64_t seed,
                                    int embed_dim) {
  const Graph& g = transformed.graph;
  const int n = g.num_nodes;
  if (n == 0) throw std::invalid_argument("empty transformed graph");
  if (num_trials < 2)
    throw std::invalid_argument("need at least two trials to compare");
  const int degree = g.degree(0);
  for (int i = 0; i < n; ++i)
    if (g.degree(i) != degree)
      throw std::runtime_error(
          "equivalence check requires a regular transformed graph (the "
          "constant-absorption step needs equal degrees); node 0 has degree " +
          std::to_string(degree) + " but node " + std::to_string(i) +
          " has degree " + std::to_string(g.degree(i)));
  if (degree == 0)
    throw std::runtime_error("equivalence check requires positive degrees");

  const Eigen::MatrixXd a_sym = spectral::sym_adjacency(g).values();

  // Probability-adjacency route: W_hat = A_hat / (2 E_hat); the symmetric
  // normalization cancels the constant, so both routes must agree.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const double inv_mass = 1.0 / (2.0 * static_cast<double>(g.num_edges));
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors(i)) w(i, j) = inv_mass;
  Eigen::VectorXd wdeg = w.rowwise().sum();
  Eigen::VectorXd inv_sqrt = wdeg.array().sqrt().inverse();
  const Eigen::MatrixXd w_sym =
      inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();

  EquivalenceReport report;
  report.common_degree = degree;
  report.w_vs_a_max_abs = (w_sym - a_sym).cwiseAbs().maxCoeff();

  const spectral::DenseSymMatrix a_hat(a_sym);
  const double row_weight = 1.0 / static_cast<double>(n);  // w_i on a regular graph
  Rng rng = Rng(seed).fork(0x6d66);
  double first_difference = 0.0;
  for (int t = 0; t < num_trials; ++t) {
    Eigen::MatrixXd f(n, embed_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < embed_dim; ++k) f(i, k) = scale * rng.normal();
    const Eigen::MatrixXd z = f / std::sqrt(row_weight);
    const double diff = mf_loss(a_hat, f) - population_contrastive_loss(g, z);
    if (t == 0)
      first_difference = diff;
    else
      report.max_deviation =
          std::max(report.max_deviation, std::abs(diff - first_difference));
  }
  report.constant = first_difference;
  return report;
}

namespace {

/// Shared machinery for the neighborhood-aggregation experiments: binary
/// Gaussian-mixture features with one latent vector fixed for the whole
/// experiment.
struct AggregationModel {
  Eigen::MatrixXd mu;  // per-class mean row (c x F), antipodal for c == 2
  const SyntheticConfig* config;
  double noise_scale;
  const Eigen::MatrixXd* weight;  // nullptr => identity

  static AggregationModel create(const SyntheticConfig& config,
                                 const ConcentrationOptions& opts,
                                 const Rng& root) {
    if (config.num_classes != 2)
      throw std::invalid_argument(
          "aggregation experiments assume binary classes");
    config.validate();
    AggregationModel m;
    m.config = &config;
    m.noise_scale = opts.noise_scale;
    m.weight = opts.weight.size() > 0 ? &opts.weight : nullptr;
    if (m.weight && m.weight->cols() != config.feature_dim)
      throw std::invalid_argument("weight columns must match feature_dim");
    const int f = config.feature_dim;
    Rng rng = root.fork(0x6d75);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    m.mu.resize(2, f);
    for (int j = 0; j < f; ++j) {
      const double v = scale * rng.normal();
      m.mu(0, j) = -v;
      m.mu(1, j) = v;
    }
    return m;
  }

  int out_dim() const {
    return weight ? static_cast<int>(weight->rows()) : config->feature_dim;
  }

  /// One neighbor feature; also appends its coordinates to coord_samples when
  /// requested (for the Orlicz-norm estimates).
  Eigen::VectorXd sample_feature(int label, Rng& rng,
                                 std::vector<double>* coord_samples) const {
    const int f = config->feature_dim;
    const double scale = noise_scale / std::sqrt(static_cast<double>(f));
    Eigen::VectorXd x(f);
    for (int j = 0; j < f; ++j) x[j] = mu(label, j) + scale * rng.normal();
    if (coord_samples && coord_samples->size() < 200000)
      for (int j = 0; j < f; ++j) coord_samples->push_back(x[j]);
    return x;
  }

  /// Mean over a size-`degree` neighborhood with labels drawn from the
  /// class-conditional distribution, then mapped through W.
  Eigen::VectorXd sample_aggregated(int label, int degree, Rng& rng,
                                    std::vector<double>* coord_samples) const {
    Eigen::VectorXd agg = Eigen::VectorXd::Zero(config->feature_dim);
    for (int k = 0; k < degree; ++k) {
      const int y = draw_categorical(
          config->neighbor_label_distribution.row(label), rng);
      agg += sample_feature(y, rng, coord_samples);
    }
    agg /= static_cast<double>(degree);
    if (weight) return *weight * agg;
    return agg;
  }
};

}  // namespace

std::vector<ConcentrationRow> concentration_experiment(
    const SyntheticConfig& config, std::span<const int> degree_levels,
    int trials, const ConcentrationOptions& opts) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  for (int d : degree_levels)
    if (d < 1) throw std::invalid_argument("degree levels must be >= 1");

  const Rng root(config.seed);
  const AggregationModel model = AggregationModel::create(config, opts, root);
  const double sigma_max =
      opts.weight.size() > 0 ? largest_singular_value(opts.weight) : 1.0;

  std::vector<ConcentrationRow> rows;
  for (std::size_t li = 0; li < degree_levels.size(); ++li) {
    const int degree = degree_levels[li];
    const Rng level_root = root.fork(0x1000 + li);

    // Independent oracle: per-class empirical mean over a 10x sample.
    const int main_samples = trials * opts.nodes_per_trial;
    const int oracle_samples = 10 * main_samples;
    Eigen::MatrixXd class_mean =
        Eigen::MatrixXd::Zero(2, model.out_dim());
    Eigen::Vector2d class_count = Eigen::Vector2d::Zero();
    std::vector<double> coord_samples;
    {
      Rng rng = level_root.fork(1);
      for (int s = 0; s < oracle_samples; ++s) {
        const int y = draw_categorical(config.class_prior, rng);
        class_mean.row(y) +=
            model.sample_aggregated(y, degree, rng, &coord_samples);
        class_count[y] += 1.0;
      }
      for (int y = 0; y < 2; ++y) {
        if (class_count[y] == 0.0)
          throw std::runtime_error("oracle sample missed class " +
                                   std::to_string(y));
        class_mean.row(y) /= class_count[y];
      }
    }

    double dev_sum = 0.0;
    {
      Rng rng = level_root.fork(2);
      for (int s = 0; s < main_samples; ++s) {
        const int y = draw_categorical(config.class_prior, rng);
        const Eigen::VectorXd z =
            model.sample_aggregated(y, degree, rng, nullptr);
        dev_sum += (z - class_mean.row(y).transpose()).norm();
      }
    }

    ConcentrationRow row;
    row.degree = degree;
    row.mean_deviation = dev_sum / static_cast<double>(main_samples);
    const double psi2 = estimate_orlicz_norm(coord_samples, 2.0);
    const double f = static_cast<double>(config.feature_dim);
    row.bound =
        psi2 > 0.0
            ? std::sqrt(sigma_max * sigma_max * f *
                        std::log(2.0 * f / opts.delta) /
                        (2.0 * static_cast<double>(degree) * psi2))
            : std::numeric_limits<double>::infinity();
    if (opts.noise_scale == 0.0 && psi2 == 0.0) row.bound = 0.0;
    rows.push_back(row);
  }
  return rows;
}

SimilarityConcentrationReport similarity_concentration_experiment(
    const SyntheticConfig& config, int trials,
    const ConcentrationOptions& opts) {
  if (trials < 10)
    throw std::invalid_argument("need at least ten sampled pairs");
  const Rng root(config.seed);
  const AggregationModel model = AggregationModel::create(config, opts, root);
  const int degree =
      static_cast<int>(std::llround(config.mean_degree));
  if (degree < 1) throw std::invalid_argument("mean_degree must be >= 1");

  // Per-class oracle means; pairs are independent so E[Z_i . Z_j] factors.
  Eigen::MatrixXd class_mean = Eigen::MatrixXd::Zero(2, model.out_dim());
  Eigen::Vector2d class_count = Eigen::Vector2d::Zero();
  std::vector<double> coord_samples;
  {
    Rng rng = root.fork(0x2001);
    const int oracle_samples = 10 * trials;
    for (int s = 0; s < oracle_samples; ++s) {
      const int y = draw_categorical(config.class_prior, rng);
      class_mean.row(y) +=
          model.sample_aggregated(y, degree, rng, &coord_samples);
      class_count[y] += 1.0;
    }
    for (int y = 0; y < 2; ++y) {
      if (class_count[y] == 0.0)
        throw std::runtime_error("oracle sample missed class " +
                                 std::to_string(y));
      class_mean.row(y) /= class_count[y];
    }
  }

  std::vector<double> deviations;
  deviations.reserve(trials);
  {
    Rng rng = root.fork(0x2002);
    for (int s = 0; s < trials; ++s) {
      const int yi = draw_categorical(config.class_prior, rng);
      const int yj = draw_categorical(config.class_prior, rng);
      const Eigen::VectorXd zi =
          model.sample_aggregated(yi, degree, rng, nullptr);
      const Eigen::VectorXd zj =
          model.sample_aggregated(yj, degree, rng, nullptr);
      const double expected = class_mean.row(yi).dot(class_mean.row(yj));
      deviations.push_back(std::abs(zi.dot(zj) - expected));
    }
  }

  SimilarityConcentrationReport report;
  report.num_samples = trials;
  report.mean_deviation =
      std::accumulate(deviations.begin(), deviations.end(), 0.0) /
      static_cast<double>(trials);
  report.max_deviation =
      *std::max_element(deviations.begin(), deviations.end());
  std::sort(deviations.begin(), deviations.end());
  const std::size_t idx = static_cast<std::size_t>(
      std::ceil((1.0 - opts.delta) * static_cast<double>(trials))) - 1;
  report.quantile = deviations[std::min(idx, deviations.size() - 1)];

  std::vector<double> squares(coord_samples.size());
  for (std::size_t i = 0; i < coord_samples.size(); ++i)
    squares[i] = coord_samples[i] * coord_samples[i];
  const double psi1 = estimate_orlicz_norm(squares, 1.0);
  const Eigen::MatrixXd wtw =
      opts.weight.size() > 0
          ? Eigen::MatrixXd(opts.weight.transpose() * opts.weight)
          : Eigen::MatrixXd::Identity(config.feature_dim, config.feature_dim);
  const double sigma_sq = largest_singular_value(wtw);
  const double n = static_cast<double>(config.num_nodes);
  const double d = static_cast<double>(degree);
  report.bound =
      psi1 > 0.0 ? std::sqrt(sigma_sq * std::log(2.0 * n * n / opts.delta) /
                             (2.0 * d * d * psi1))
                 : (opts.noise_scale == 0.0
                        ? 0.0
                        : std::numeric_limits<double>::infinity());
  return report;
}

BoundReport theorem2_report(const Dataset& dataset,
                            const nn::ModelParams& linear_params,
                            const gcl::PositiveSelection& selection,
                            int embed_dim, double delta) {
  const int n = dataset.num_nodes();
  if (embed_dim != linear_params.output_dim())
    throw std::invalid_argument("embed_dim does not match the model output");
  if (embed_dim + 1 > n)
    throw std::invalid_argument("need K + 1 <= N for the spectral bound");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");

  const TransformedGraph transformed = build_transformed_graph(selection, n);

  BoundReport report;
  report.delta = delta;
  report.phi_bar =
      1.0 - edge_homophily(transformed.graph, dataset.labels);

  const auto eig =
      spectral::eigendecompose(spectral::sym_laplacian(transformed.graph));
  report.lambda_k_plus_1 = eig.eigenvalues[embed_dim];
  report.vacuous = report.lambda_k_plus_1 <= 1e-10;

  Eigen::MatrixXd w_eq = linear_params.gcn_weights[0];
  w_eq *= linear_params.gcn_weights[1];
  for (const auto& pw : linear_params.proj_weights) w_eq *= pw;
  const double sigma_max = largest_singular_value(w_eq);
  report.sigma_max_sq = sigma_max * sigma_max;

  int min_degree = dataset.graph.degree(0);
  for (int i = 1; i < n; ++i)
    min_degree = std::min(min_degree, dataset.graph.degree(i));
  report.min_degree = min_degree;

  const Eigen::MatrixXd x_norm = nn::l2_normalize_rows(dataset.features);
  std::vector<double> squares;
  squares.reserve(static_cast<std::size_t>(x_norm.size()));
  for (Eigen::Index i = 0; i < x_norm.rows(); ++i)
    for (Eigen::Index j = 0; j < x_norm.cols(); ++j)
      squares.push_back(x_norm(i, j) * x_norm(i, j));
  report.psi1_norm = estimate_orlicz_norm(squares, 1.0);

  const double log_term =
      std::log(2.0 * static_cast<double>(n) * static_cast<double>(n) / delta);
  double sqrt_term = std::numeric_limits<double>::infinity();
  if (min_degree > 0 && report.psi1_norm > 0.0) {
    const double d = static_cast<double>(min_degree);
    sqrt_term = std::sqrt(report.sigma_max_sq * log_term /
                          (2.0 * d * d * report.psi1_norm));
  }
  if (report.lambda_k_plus_1 > 0.0) {
    report.bound_value = (report.phi_bar + sqrt_term) / report.lambda_k_plus_1;
    report.bound_value_main_text =
        report.phi_bar / report.lambda_k_plus_1 +
        sqrt_term / report.lambda_k_plus_1;
  } else {
    report.bound_value = std::numeric_limits<double>::infinity();
    report.bound_value_main_text = report.bound_value;
  }

  // Unconstrained least squares of one-hot labels on the learned embedding;
  // lower-bounds the norm-constrained classifier error.
  auto [h, trace] =
      nn::gcn_forward(linear_params, dataset, nn::ForwardMode::linear);
  const Eigen::MatrixXd z = nn::project(linear_params, h, trace);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, dataset.num_classes);
  for (int i = 0; i < n; ++i) onehot(i, dataset.labels[i]) = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(z);
  const Eigen::MatrixXd coef = cod.solve(onehot);
  report.measured_error =
      (onehot - z * coef).squaredNorm() / static_cast<double>(n);
  return report;
}

double estimate_orlicz_norm(std::span<const double> samples, double p) {
  if (samples.empty())
    throw std::invalid_argument("Orlicz norm needs at least one sample");
  if (!(p == 1.0 || p == 2.0))
    throw std::invalid_argument("only p = 1 and p = 2 are supported");
  double max_abs = 0.0;
  for (double x : samples) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs == 0.0) return 0.0;

  const auto condition = [&samples, p](double t) {
    double acc = 0.0;
    for (double x : samples) {
      const double e = std::pow(std::abs(x) / t, p);
      acc += std::exp(std::min(e, 700.0));
    }
    return acc / static_cast<double>(samples.size());
  };

  double hi = max_abs;
  while (condition(hi) > 2.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (lo > max_abs * 1e-9 && condition(lo) <= 2.0) {
    hi = lo;
    lo /= 2.0;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (condition(mid) <= 2.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace afgcl::theory
