#include "afgcl/contrastive.hpp"

#include <algorithm>
#include <chrono>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "afgcl/io.hpp"

namespace afgcl::gcl {

void TrainConfig::validate(int num_nodes) const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (batch_size > num_nodes && num_nodes > 0)
    throw std::invalid_argument("batch_size exceeds node count");
  if (hops < 1) throw std::invalid_argument("hops must be >= 1");
  if (positives_per_seed < 1)
    throw std::invalid_argument("positives_per_seed must be >= 1");
  if (negatives_per_node < 1)
    throw std::invalid_argument("negatives_per_node must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (embed_dim < 1 || hidden_dim < 1)
    throw std::invalid_argument("layer widths must be positive");
}

TrainConfig parse_train_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("train config: ") + e.what());
  }
  TrainConfig c;
  try {
    c.batch_size = j.at("batch_size").get<int>();
    c.hops = j.at("hops").get<int>();
    c.positives_per_seed = j.at("positives_per_seed").get<int>();
    c.negatives_per_node = j.at("negatives_per_node").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("train config: ") + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known = {
        "batch_size", "hops",   "positives_per_seed",
        "negatives_per_node",   "learning_rate",
        "epochs",     "embed_dim", "hidden_dim", "seed"};
    if (!known.count(key))
      throw std::runtime_error("train config: unknown field '" + key + "'");
  }
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["batch_size"] = c.batch_size;
  j["hops"] = c.hops;
  j["positives_per_seed"] = c.positives_per_seed;
  j["negatives_per_node"] = c.negatives_per_node;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["embed_dim"] = c.embed_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::vector<int> sample_seeds(int num_nodes, int batch, Rng& rng) {
  if (batch > num_nodes)
    throw std::invalid_argument("cannot sample more seeds than nodes");
  if (batch < 1) throw std::invalid_argument("need at least one seed");
  std::vector<int> ids(num_nodes);
  for (int i = 0; i < num_nodes; ++i) ids[i] = i;
  for (int i = 0; i < batch; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform_int(
                static_cast<std::uint64_t>(num_nodes - i)));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(batch);
  std::sort(ids.begin(), ids.end());
  return ids;
}

SeedSelection select_positives(const Eigen::MatrixXd& z, int seed_node,
                               std::span<const int> pool, int k_pos) {
  if (pool.empty()) throw std::invalid_argument("pool must be non-empty");
  if (k_pos < 1) throw std::invalid_argument("k_pos must be >= 1");
  SeedSelection sel;
  sel.seed_node = seed_node;
  std::vector<std::pair<double, int>> scored;
  scored.reserve(pool.size());
  const auto zi = z.row(seed_node);
  for (int j : pool) {
    if (j == seed_node) continue;
    scored.emplace_back(zi.dot(z.row(j)), j);
  }
  const auto better = [](const std::pair<double, int>& a,
                         const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // ties by ascending node id
  };
  const std::size_t take =
      std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k_pos));
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    better);
  for (std::size_t i = 0; i < take; ++i) {
    sel.scores.push_back(scored[i].first);
    sel.ids.push_back(scored[i].second);
  }
  return sel;
}

std::pair<double, Eigen::MatrixXd> empirical_loss(
    const Eigen::MatrixXd& z, const PositiveSelection& selection, int k_pos,
    std::span<const std::pair<int, int>> negatives) {
  if (selection.empty())
    throw std::invalid_argument("selection must contain at least one seed");
  bool any_positive = false;
  for (const auto& s : selection) any_positive |= !s.ids.empty();
  if (!any_positive)
    throw std::runtime_error(
        "empirical loss undefined: every seed has an empty selection");
  if (negatives.empty())
    throw std::invalid_argument("need at least one negative pair");

  const double num_seeds = static_cast<double>(selection.size());
  const double pos_coeff = -2.0 / (num_seeds * static_cast<double>(k_pos));
  // |S| * K_neg total negative pairs, so this is 1 / (|S| * K_neg)
  const double neg_coeff = 1.0 / static_cast<double>(negatives.size());

  double loss = 0.0;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  for (const auto& s : selection) {
    const auto zi = z.row(s.seed_node);
    for (int j : s.ids) {
      loss += pos_coeff * zi.dot(z.row(j));
      grad.row(s.seed_node) += pos_coeff * z.row(j);
      grad.row(j) += pos_coeff * zi;
    }
  }
  for (const auto& [j, k] : negatives) {
    const double sim = z.row(j).dot(z.row(k));
    loss += neg_coeff * sim * sim;
    grad.row(j) += neg_coeff * 2.0 * sim * z.row(k);
    grad.row(k) += neg_coeff * 2.0 * sim * z.row(j);
  }
  return {loss, std::move(grad)};
}

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  nn::ForwardMode mode) {
  const int n = dataset.num_nodes();
  config.validate(n);
  const int batch = std::min(config.batch_size, n);

  const std::vector<int> dims = {dataset.feature_dim(), config.hidden_dim,
                                 config.embed_dim, config.embed_dim,
                                 config.embed_dim};
  const Rng root(config.seed);
  TrainResult result;
  result.params = nn::init_params(root.fork(1).next_u64(), dims);
  nn::AdamState adam(result.params, config.learning_rate);
  const Rng epoch_root = root.fork(2);

  // T-hop pools depend only on the graph; fill lazily and reuse.
  std::vector<std::vector<int>> pool_cache(n);
  std::vector<bool> pool_ready(n, false);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto [h, trace] = nn::gcn_forward(result.params, dataset, mode);
    const Eigen::MatrixXd z = nn::project(result.params, h, trace);

    Rng epoch_rng = epoch_root.fork(static_cast<std::uint64_t>(epoch));
    Rng seed_rng = epoch_rng.fork(0);
    Rng neg_rng = epoch_rng.fork(1);

    const std::vector<int> seeds = sample_seeds(n, batch, seed_rng);
    PositiveSelection selection;
    selection.reserve(seeds.size());
    for (int s : seeds) {
      if (!pool_ready[s]) {
        const int one[] = {s};
        pool_cache[s] = khop_pool(dataset.graph, one, config.hops);
        pool_ready[s] = true;
      }
      selection.push_back(
          select_positives(z, s, pool_cache[s], config.positives_per_seed));
    }
    std::vector<std::pair<int, int>> negatives;
    negatives.reserve(seeds.size() *
                      static_cast<std::size_t>(config.negatives_per_node));
    for (int s : seeds)
      for (int k = 0; k < config.negatives_per_node; ++k)
        negatives.emplace_back(
            s, static_cast<int>(neg_rng.uniform_int(
                   static_cast<std::uint64_t>(n))));

    auto [loss, grad_z] =
        empirical_loss(z, selection, config.positives_per_seed, negatives);
    const nn::ModelParams grads = nn::backward(grad_z, trace);
    nn::adam_step(adam, result.params, grads);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.log.push_back({epoch, loss, seconds});
  }
  return result;
}

std::string train_log_to_csv(const TrainLog& log) {
  std::string csv = "epoch,loss,seconds\n";
  for (const auto& rec : log) {
    csv += std::to_string(rec.epoch);
    csv += ",";
    csv += io::format_double(rec.loss);
    csv += ",";
    csv += io::format_double(rec.seconds);
    csv += "\n";
  }
  return csv;
}

}  // namespace afgcl::gcl
