// Command-line front end: synth, analyze-aug, train, eval, check.
// Exit codes: 0 success/pass, 1 failure, 2 usage error.

#include <CLI11.hpp>
#include <clocale>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

#include "afgcl/augment.hpp"
#include "afgcl/checkpoint.hpp"
#include "afgcl/checks.hpp"
#include "afgcl/contrastive.hpp"
#include "afgcl/dataset.hpp"
#include "afgcl/eval.hpp"
#include "afgcl/io.hpp"
#include "afgcl/model.hpp"
#include "afgcl/spectral.hpp"
#include "afgcl/synth.hpp"
#include "afgcl/theory.hpp"

namespace fs = std::filesystem;
using afgcl::io::format_double;

namespace {

/// Runs fn(0..count-1) on up to `jobs` threads; each index owns its outputs,
/// so the aggregate is identical to the serial order.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct DatasetArgs {
  std::string graph_path, features_path, labels_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph", graph_path, "graph file (N E header + edges)")
        ->required();
    cmd->add_option("--features", features_path, "feature CSV, one row per node")
        ->required();
    cmd->add_option("--labels", labels_path, "label file, one integer per line")
        ->required();
  }

  afgcl::Dataset load() const {
    return afgcl::load_dataset(graph_path, features_path, labels_path);
  }
};

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed, bool seed_given) {
  afgcl::SyntheticConfig config =
      afgcl::parse_synthetic_config(afgcl::io::read_file(config_path));
  if (seed_given) config.seed = seed;
  const afgcl::Dataset ds = afgcl::synthesize(config);
  fs::create_directories(out_dir);
  afgcl::save_dataset(ds, out_dir + "/graph.txt", out_dir + "/features.csv",
                      out_dir + "/labels.txt");
  std::cout << "nodes " << ds.num_nodes() << " edges " << ds.graph.num_edges
            << "\n";
  std::cout << "h_edge "
            << format_double(afgcl::edge_homophily(ds.graph, ds.labels))
            << "\n";
  std::cout << "h_node "
            << format_double(afgcl::node_homophily(ds.graph, ds.labels))
            << "\n";
  return 0;
}

int cmd_analyze_aug(const DatasetArgs& paths, const std::string& aug,
                    double p, double alpha, int bands, int cutoff,
                    int num_seeds, std::uint64_t seed,
                    const std::string& out_dir, bool shared_lambda,
                    bool per_node_mask, int jobs) {
  const afgcl::Dataset ds = paths.load();
  const int f = ds.feature_dim();
  if (cutoff < 0) cutoff = static_cast<int>(std::llround(0.8 * f));
  fs::create_directories(out_dir);

  std::vector<std::vector<double>> profiles(num_seeds);
  std::vector<double> f_low(num_seeds, 0.0), f_high(num_seeds, 0.0);
  const afgcl::Rng root(seed);

  if (aug == "ppr") {
    // diffusion is deterministic, so one profile covers every seed
    const auto diffusion = afgcl::aug::ppr_diffusion(ds.graph, alpha);
    const auto profile = afgcl::spectral::band_distance_profile_dense(
        afgcl::spectral::sym_laplacian(ds.graph),
        afgcl::spectral::sym_laplacian_weighted(diffusion), bands,
        shared_lambda);
    for (int s = 0; s < num_seeds; ++s) profiles[s] = profile.distances;
  } else {
    parallel_for(num_seeds, jobs, [&](int s) {
      const std::uint64_t op_seed = root.fork(s).next_u64();
      afgcl::Graph g_aug = ds.graph;
      Eigen::MatrixXd x_aug = ds.features;
      if (aug == "edge-drop") {
        g_aug = afgcl::aug::drop_edges(ds.graph, p, op_seed);
      } else if (aug == "edge-add") {
        g_aug = afgcl::aug::add_edges(ds.graph, p, op_seed);
      } else if (aug == "mask") {
        x_aug = afgcl::aug::mask_attributes(ds.features, p, op_seed,
                                            per_node_mask);
      } else if (aug != "none") {
        throw std::invalid_argument("unknown augmentation '" + aug + "'");
      }
      const auto profile = afgcl::spectral::band_distance_profile(
          ds.graph, g_aug, bands, shared_lambda);
      profiles[s] = profile.distances;
      const auto [lo, hi] =
          afgcl::spectral::feature_band_distance(ds.features, x_aug, cutoff);
      f_low[s] = lo;
      f_high[s] = hi;
    });
  }

  std::vector<double> mean_profile(bands, 0.0);
  for (const auto& prof : profiles)
    for (int m = 0; m < bands; ++m) mean_profile[m] += prof[m];
  for (int m = 0; m < bands; ++m)
    mean_profile[m] /= static_cast<double>(num_seeds);
  double mean_low = 0.0, mean_high = 0.0;
  for (int s = 0; s < num_seeds; ++s) {
    mean_low += f_low[s];
    mean_high += f_high[s];
  }
  mean_low /= static_cast<double>(num_seeds);
  mean_high /= static_cast<double>(num_seeds);

  std::string csv = "band,distance\n";
  for (int m = 0; m < bands; ++m)
    csv += std::to_string(m + 1) + "," + format_double(mean_profile[m]) + "\n";
  afgcl::io::write_file(out_dir + "/band_profile.csv", csv);
  afgcl::io::write_file(out_dir + "/feature_distance.json",
                        "{\"f_low\": " + format_double(mean_low) +
                            ", \"f_high\": " + format_double(mean_high) +
                            "}\n");
  std::cout << "wrote " << out_dir << "/band_profile.csv and "
            << out_dir << "/feature_distance.json (averaged over "
            << num_seeds << " seeds)\n";
  return 0;
}

int cmd_train(const DatasetArgs& paths, const std::string& config_path,
              const std::string& out_dir, bool linear, bool timing,
              std::uint64_t seed, bool seed_given) {
  const afgcl::Dataset ds = paths.load();
  afgcl::gcl::TrainConfig config =
      afgcl::gcl::parse_train_config(afgcl::io::read_file(config_path));
  if (seed_given) config.seed = seed;
  config.batch_size = std::min(config.batch_size, ds.num_nodes());

  auto result = afgcl::gcl::train(
      ds, config, linear ? afgcl::nn::ForwardMode::linear
                         : afgcl::nn::ForwardMode::train);
  if (!timing)
    for (auto& rec : result.log) rec.seconds = 0.0;

  fs::create_directories(out_dir);
  afgcl::nn::save_checkpoint(out_dir + "/checkpoint.bin", result.params);
  afgcl::io::write_file(out_dir + "/train_log.csv",
                        afgcl::gcl::train_log_to_csv(result.log));
  if (!result.log.empty())
    std::cout << "final loss " << format_double(result.log.back().loss)
              << " after " << result.log.size() << " epochs\n";
  else
    std::cout << "no epochs requested; wrote initial parameters\n";
  return 0;
}

int cmd_eval(const DatasetArgs& paths, const std::string& checkpoint_path,
             const std::string& metric, const std::string& splits_path,
             int runs, const std::string& probe_input, std::uint64_t seed,
             const std::string& out_dir, int jobs) {
  const afgcl::Dataset ds = paths.load();
  const afgcl::nn::ModelParams params =
      afgcl::nn::load_checkpoint(checkpoint_path);
  if (metric != "accuracy" && metric != "auc")
    throw CLI::ValidationError("--metric must be accuracy or auc");
  if (metric == "auc" && ds.num_classes != 2)
    throw std::runtime_error("ROC AUC requires a binary labeling, got " +
                             std::to_string(ds.num_classes) + " classes");

  auto [h, trace] =
      afgcl::nn::gcn_forward(params, ds, afgcl::nn::ForwardMode::train);
  Eigen::MatrixXd embeddings;
  if (probe_input == "z")
    embeddings = afgcl::nn::project(params, h, trace);
  else if (probe_input == "h")
    embeddings = h;
  else
    throw CLI::ValidationError("--probe-input must be h or z");

  std::optional<afgcl::Splits> fixed_splits;
  if (!splits_path.empty())
    fixed_splits = afgcl::load_splits(splits_path, ds.num_nodes());

  afgcl::eval::EvalSummary summary;
  summary.metric = metric;
  summary.runs.resize(runs);
  parallel_for(runs, jobs, [&](int r) {
    const afgcl::Splits splits =
        fixed_splits ? *fixed_splits
                     : afgcl::eval::make_splits(ds.num_nodes(), 0.1, 0.1, 0.8,
                                                seed + static_cast<std::uint64_t>(r));
    if (metric == "accuracy") {
      summary.runs[r] = afgcl::eval::linear_probe(embeddings, ds.labels,
                                                  splits, ds.num_classes);
    } else {
      const Eigen::MatrixXd scores = afgcl::eval::linear_probe_scores(
          embeddings, ds.labels, splits, ds.num_classes);
      std::vector<double> test_scores;
      std::vector<int> test_labels;
      for (int v : splits.test) {
        test_scores.push_back(scores(v, 1));
        test_labels.push_back(ds.labels[v]);
      }
      summary.runs[r] = afgcl::eval::roc_auc(test_scores, test_labels);
    }
  });

  double mean = 0.0;
  for (double v : summary.runs) mean += v;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (double v : summary.runs) var += (v - mean) * (v - mean);
  summary.mean = mean;
  summary.std_dev = std::sqrt(var / static_cast<double>(runs));

  fs::create_directories(out_dir);
  afgcl::io::write_file(out_dir + "/eval.json",
                        afgcl::eval::eval_summary_to_json(summary));
  std::cout << metric << " " << format_double(summary.mean) << " +- "
            << format_double(summary.std_dev) << " over " << runs << " runs\n";
  return 0;
}

int cmd_check(const std::string& name, std::uint64_t seed,
              const std::string& out_dir) {
  const auto result = afgcl::checks::run_check(name, seed);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    afgcl::io::write_file(out_dir + "/" + result.name + ".json", result.json);
    if (!result.csv.empty())
      afgcl::io::write_file(out_dir + "/" + result.name + ".csv", result.csv);
  }
  std::cout << (result.pass ? "[PASS] " : "[FAIL] ") << result.name << ": "
            << result.details << "\n";
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"Augmentation-free graph contrastive learning toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "synthetic config JSON")
      ->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  auto* synth_seed = synth->add_option("--seed", seed, "override config seed");

  // analyze-aug
  auto* analyze = app.add_subcommand(
      "analyze-aug", "spectral effect of an augmentation, averaged over seeds");
  DatasetArgs analyze_paths;
  analyze_paths.attach(analyze);
  std::string aug = "edge-drop";
  double p = 0.2, alpha = 0.2;
  int bands = 10, cutoff = -1, num_seeds = 10, jobs = 1;
  bool shared_lambda = false, per_node_mask = false;
  std::string analyze_out;
  analyze->add_option("--aug", aug, "none|edge-drop|edge-add|mask|ppr");
  analyze->add_option("--p", p, "augmentation fraction");
  analyze->add_option("--alpha", alpha, "diffusion factor for ppr");
  analyze->add_option("--bands", bands, "number of frequency bands");
  analyze->add_option("--cutoff", cutoff,
                      "feature DFT cutoff R (default 0.8 * F)");
  analyze->add_option("--seeds", num_seeds, "number of augmentation seeds");
  analyze->add_option("--seed", seed, "base seed");
  analyze->add_option("--out", analyze_out, "output directory")->required();
  analyze->add_flag("--shared-lambda", shared_lambda,
                    "reuse the original lambda_max for the augmented bands");
  analyze->add_flag("--per-node-mask", per_node_mask,
                    "mask dimensions independently per node");
  analyze->add_option("--jobs", jobs, "parallel trials");

  // train
  auto* train = app.add_subcommand("train", "train encoder and projector");
  DatasetArgs train_paths;
  train_paths.attach(train);
  std::string train_config, train_out;
  bool linear = false;
  std::string timing = "on";
  train->add_option("--config", train_config, "train config JSON")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_flag("--linear", linear,
                  "train without nonlinearities or batch norm");
  train->add_option("--timing", timing,
                    "on|off: write wall-clock seconds to the log");
  auto* train_seed = train->add_option("--seed", seed, "override config seed");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "linear evaluation of a checkpoint");
  DatasetArgs eval_paths;
  eval_paths.attach(eval_cmd);
  std::string checkpoint, metric = "accuracy", splits_path, probe_input = "h";
  std::string eval_out;
  int runs = 10;
  eval_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")
      ->required();
  eval_cmd->add_option("--metric", metric, "accuracy|auc");
  eval_cmd->add_option("--splits", splits_path,
                       "fixed splits file (otherwise random 10/10/80)");
  eval_cmd->add_option("--runs", runs, "number of probe runs");
  eval_cmd->add_option("--probe-input", probe_input,
                       "h (encoder output) or z (projector output)");
  eval_cmd->add_option("--seed", seed, "base seed for random splits");
  eval_cmd->add_option("--out", eval_out, "output directory")->required();
  eval_cmd->add_option("--jobs", jobs, "parallel probe runs");

  // check
  auto* check = app.add_subcommand("check", "run a named verification check");
  std::string check_name, check_out;
  std::uint64_t check_seed = 7;
  check->add_option("name", check_name, "check name")->required();
  check->add_option("--seed", check_seed, "check seed");
  check->add_option("--out", check_out, "write the JSON/CSV report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth)
      return cmd_synth(synth_config, synth_out, seed, !synth_seed->empty());
    if (*analyze)
      return cmd_analyze_aug(analyze_paths, aug, p, alpha, bands, cutoff,
                             num_seeds, seed, analyze_out, shared_lambda,
                             per_node_mask, jobs);
    if (*train) {
      if (timing != "on" && timing != "off")
        throw CLI::ValidationError("--timing must be on or off");
      return cmd_train(train_paths, train_config, train_out, linear,
                       timing == "on", seed, !train_seed->empty());
    }
    if (*eval_cmd)
      return cmd_eval(eval_paths, checkpoint, metric, splits_path, runs,
                      probe_input, seed, eval_out, jobs);
    if (*check) return cmd_check(check_name, check_seed, check_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
