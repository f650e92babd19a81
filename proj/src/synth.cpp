#include "afgcl/synth.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "afgcl/rng.hpp"

namespace afgcl {

namespace {

// Stream ids forked from the config seed.
enum : std::uint64_t { kLabels = 1, kLatent = 2, kNoise = 3, kWiring = 4 };

int draw_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int c = static_cast<int>(probs.size());
  for (int k = 0; k < c; ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return c - 1;  // guard against accumulated rounding
}

}  // namespace

void SyntheticConfig::validate() const {
  if (num_nodes <= 0) throw std::invalid_argument("num_nodes must be positive");
  if (feature_dim <= 0)
    throw std::invalid_argument("feature_dim must be positive");
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");
  if (mean_degree < 1.0)
    throw std::invalid_argument("mean_degree must be >= 1");
  if (neighbor_label_distribution.rows() != num_classes ||
      neighbor_label_distribution.cols() != num_classes)
    throw std::invalid_argument(
        "neighbor_label_distribution must be num_classes x num_classes");
  if (class_prior.size() != num_classes)
    throw std::invalid_argument("class_prior must have num_classes entries");
  for (int y = 0; y < num_classes; ++y) {
    if ((neighbor_label_distribution.row(y).array() < 0.0).any())
      throw std::invalid_argument("neighbor_label_distribution has negative entry");
    if (std::abs(neighbor_label_distribution.row(y).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("neighbor_label_distribution row " +
                                  std::to_string(y) + " does not sum to 1");
  }
  if ((class_prior.array() < 0.0).any() ||
      std::abs(class_prior.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("class_prior must be a probability vector");
}

SyntheticConfig parse_synthetic_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("synthetic config: ") + e.what());
  }
  SyntheticConfig c;
  try {
    c.num_nodes = j.at("num_nodes").get<int>();
    c.feature_dim = j.at("feature_dim").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.mean_degree = j.at("mean_degree").get<double>();
    const auto& dist = j.at("neighbor_label_distribution");
    c.neighbor_label_distribution.resize(c.num_classes, c.num_classes);
    for (int y = 0; y < c.num_classes; ++y)
      for (int t = 0; t < c.num_classes; ++t)
        c.neighbor_label_distribution(y, t) = dist.at(y).at(t).get<double>();
    const auto& prior = j.at("class_prior");
    c.class_prior.resize(c.num_classes);
    for (int y = 0; y < c.num_classes; ++y)
      c.class_prior[y] = prior.at(y).get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("synthetic config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string synthetic_config_to_json(const SyntheticConfig& c) {
  nlohmann::json j;
  j["num_nodes"] = c.num_nodes;
  j["feature_dim"] = c.feature_dim;
  j["num_classes"] = c.num_classes;
  j["mean_degree"] = c.mean_degree;
  for (int y = 0; y < c.num_classes; ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int t = 0; t < c.num_classes; ++t)
      row.push_back(c.neighbor_label_distribution(y, t));
    j["neighbor_label_distribution"].push_back(row);
  }
  for (int y = 0; y < c.num_classes; ++y)
    j["class_prior"].push_back(c.class_prior[y]);
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

Dataset synthesize(const SyntheticConfig& config) {
  config.validate();
  const int n = config.num_nodes;
  const int f = config.feature_dim;
  const int c = config.num_classes;
  const Rng root(config.seed);

  Dataset ds;
  ds.num_classes = c;
  ds.labels.resize(n);
  {
    Rng rng = root.fork(kLabels);
    for (int i = 0; i < n; ++i)
      ds.labels[i] = draw_categorical(config.class_prior, rng);
  }

  std::vector<std::vector<int>> members(c);
  for (int i = 0; i < n; ++i) members[ds.labels[i]].push_back(i);

  // Per-class latent means. The binary case shares one latent vector with a
  // ±1 sign so the two classes are antipodal.
  Eigen::MatrixXd mu(c, f);
  {
    Rng rng = root.fork(kLatent);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    if (c == 2) {
      for (int j = 0; j < f; ++j) {
        const double v = scale * rng.normal();
        mu(0, j) = -v;
        mu(1, j) = v;
      }
    } else {
      for (int y = 0; y < c; ++y)
        for (int j = 0; j < f; ++j) mu(y, j) = scale * rng.normal();
    }
  }

  ds.features.resize(n, f);
  {
    Rng rng = root.fork(kNoise);
    const double scale = 1.0 / std::sqrt(static_cast<double>(f));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j)
        ds.features(i, j) = mu(ds.labels[i], j) + scale * rng.normal();
  }

  std::vector<std::pair<int, int>> edges;
  {
    Rng rng = root.fork(kWiring);
    const double d = config.mean_degree;
    const int base = static_cast<int>(std::floor(d));
    const double frac = d - std::floor(d);
    for (int i = 0; i < n; ++i) {
      int stubs = base + (rng.uniform() < frac ? 1 : 0);
      for (int s = 0; s < stubs; ++s) {
        const int target =
            draw_categorical(config.neighbor_label_distribution.row(ds.labels[i]),
                             rng);
        const auto& pool = members[target];
        const bool self_in_pool = (target == ds.labels[i]);
        const std::size_t count = pool.size() - (self_in_pool ? 1 : 0);
        if (count == 0)
          throw std::runtime_error(
              "synthesize: sampled target class " + std::to_string(target) +
              " has no eligible member nodes");
        const std::size_t pick = rng.uniform_int(count);
        // pool is sorted; skip over node i when drawing from its own class
        int j = pool[pick];
        if (self_in_pool && j >= i) j = pool[pick + 1];
        edges.emplace_back(i, j);
      }
    }
  }
  ds.graph = Graph::build(n, edges);
  ds.validate();
  return ds;
}

}  // namespace afgcl
