#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "afgcl/dataset.hpp"
#include "afgcl/model.hpp"
#include "afgcl/rng.hpp"

namespace afgcl::gcl {

struct TrainConfig {
  int batch_size = 512;        // capped at N
  int hops = 2;                // T-hop candidate pool
  int positives_per_seed = 5;  // K_pos
  int negatives_per_node = 100;
  double learning_rate = 1e-3;
  int epochs = 200;
  int embed_dim = 128;
  int hidden_dim = 128;
  std::uint64_t seed = 0;

  void validate(int num_nodes) const;
};

TrainConfig parse_train_config(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& config);

/// Positives chosen for one seed, ordered by non-increasing similarity with
/// ties broken by ascending node id. Never contains the seed itself.
struct SeedSelection {
  int seed_node = 0;
  std::vector<int> ids;
  std::vector<double> scores;
};
using PositiveSelection = std::vector<SeedSelection>;

/// b distinct nodes, uniform without replacement, returned sorted.
std::vector<int> sample_seeds(int num_nodes, int batch, Rng& rng);

/// Top-K_pos pool nodes by Z_seed . Z_j, excluding the seed itself. Returns
/// everything available when the pool has fewer candidates.
SeedSelection select_positives(const Eigen::MatrixXd& z, int seed_node,
                               std::span<const int> pool, int k_pos);

/// Two-term contrastive objective: mean positive inner product (weight -2,
/// normalized by |S| * K_pos) plus mean squared negative inner product
/// (normalized by |S| * K_neg). Returns the loss and its exact gradient
/// with respect to Z, treating the pairings as constants.
std::pair<double, Eigen::MatrixXd> empirical_loss(
    const Eigen::MatrixXd& z, const PositiveSelection& selection, int k_pos,
    std::span<const std::pair<int, int>> negatives);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
};
using TrainLog = std::vector<EpochRecord>;

struct TrainResult {
  nn::ModelParams params;
  TrainLog log;
};

/// Full training loop: forward, seed sampling, T-hop pools, top-K positive
/// selection from the current Z, uniform negatives, exact backward, Adam.
/// Deterministic per config seed. mode = linear trains the un-activated
/// network (used by the theory checks).
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  nn::ForwardMode mode = nn::ForwardMode::train);

std::string train_log_to_csv(const TrainLog& log);

}  // namespace afgcl::gcl
