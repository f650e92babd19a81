#include "afgcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "afgcl/io.hpp"
#include "afgcl/rng.hpp"

namespace afgcl::eval {

Splits make_splits(int num_nodes, double train_ratio, double valid_ratio,
                   double test_ratio, std::uint64_t seed) {
  if (std::abs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");
  const int n_train =
      static_cast<int>(std::llround(train_ratio * static_cast<double>(num_nodes)));
  const int n_valid =
      static_cast<int>(std::llround(valid_ratio * static_cast<double>(num_nodes)));
  const int n_test = num_nodes - n_train - n_valid;
  if (n_train <= 0 || n_valid <= 0 || n_test <= 0)
    throw std::runtime_error("every split must be non-empty (got " +
                             std::to_string(n_train) + "/" +
                             std::to_string(n_valid) + "/" +
                             std::to_string(n_test) + ")");
  std::vector<int> ids(num_nodes);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = Rng(seed).fork(0x73706c69);
  for (int i = num_nodes - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(i) + 1));
    std::swap(ids[i], ids[j]);
  }
  Splits s;
  s.train.assign(ids.begin(), ids.begin() + n_train);
  s.valid.assign(ids.begin() + n_train, ids.begin() + n_train + n_valid);
  s.test.assign(ids.begin() + n_train + n_valid, ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

namespace {

struct ProbeModel {
  Eigen::MatrixXd weight;  // dim x classes
  Eigen::VectorXd bias;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

ProbeModel train_probe(const Eigen::MatrixXd& embeddings,
                       std::span<const int> labels, const Splits& splits,
                       int num_classes, const ProbeOptions& opts) {
  if (static_cast<Eigen::Index>(labels.size()) != embeddings.rows())
    throw std::invalid_argument("labels length must match embedding rows");
  const int n_train = static_cast<int>(splits.train.size());
  if (n_train == 0) throw std::runtime_error("empty training split");
  std::set<int> classes_seen;
  for (int v : splits.train) classes_seen.insert(labels[v]);
  if (classes_seen.size() < 2)
    throw std::runtime_error(
        "probe training split contains a single class; accuracy would be "
        "degenerate");

  const int dim = static_cast<int>(embeddings.cols());
  Eigen::MatrixXd x(n_train, dim);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n_train, num_classes);
  for (int i = 0; i < n_train; ++i) {
    x.row(i) = embeddings.row(splits.train[i]);
    onehot(i, labels[splits.train[i]]) = 1.0;
  }

  ProbeModel model{Eigen::MatrixXd::Zero(dim, num_classes),
                   Eigen::VectorXd::Zero(num_classes)};
  Eigen::MatrixXd mw = Eigen::MatrixXd::Zero(dim, num_classes);
  Eigen::MatrixXd vw = Eigen::MatrixXd::Zero(dim, num_classes);
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(num_classes);
  Eigen::VectorXd vb = Eigen::VectorXd::Zero(num_classes);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double inv_n = 1.0 / static_cast<double>(n_train);

  for (int step = 1; step <= opts.epochs; ++step) {
    const Eigen::MatrixXd logits =
        (x * model.weight).rowwise() + model.bias.transpose();
    const Eigen::MatrixXd grad_logits =
        (softmax_rows(logits) - onehot) * inv_n;
    const Eigen::MatrixXd gw = x.transpose() * grad_logits;
    const Eigen::VectorXd gb = grad_logits.colwise().sum().transpose();
    const double c1 = 1.0 - std::pow(b1, step);
    const double c2 = 1.0 - std::pow(b2, step);
    mw = b1 * mw + (1.0 - b1) * gw;
    vw = b2 * vw + (1.0 - b2) * gw.cwiseProduct(gw);
    model.weight -=
        opts.learning_rate *
        ((mw / c1).array() / ((vw / c2).array().sqrt() + eps)).matrix();
    mb = b1 * mb + (1.0 - b1) * gb;
    vb = b2 * vb + (1.0 - b2) * gb.cwiseProduct(gb);
    model.bias -=
        opts.learning_rate *
        ((mb / c1).array() / ((vb / c2).array().sqrt() + eps)).matrix();
  }
  return model;
}

}  // namespace

double linear_probe(const Eigen::MatrixXd& embeddings,
                    std::span<const int> labels, const Splits& splits,
                    int num_classes, const ProbeOptions& opts) {
  const ProbeModel model =
      train_probe(embeddings, labels, splits, num_classes, opts);
  if (splits.test.empty()) throw std::runtime_error("empty test split");
  int correct = 0;
  for (int v : splits.test) {
    Eigen::VectorXd logits =
        model.weight.transpose() * embeddings.row(v).transpose() + model.bias;
    Eigen::Index argmax;
    logits.maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels[v]) ++correct;
  }
  return static_cast<double>(correct) /
         static_cast<double>(splits.test.size());
}

Eigen::MatrixXd linear_probe_scores(const Eigen::MatrixXd& embeddings,
                                    std::span<const int> labels,
                                    const Splits& splits, int num_classes,
                                    const ProbeOptions& opts) {
  const ProbeModel model =
      train_probe(embeddings, labels, splits, num_classes, opts);
  const Eigen::MatrixXd logits =
      (embeddings * model.weight).rowwise() + model.bias.transpose();
  return softmax_rows(logits);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels must have equal length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  long long n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1)
      ++n_pos;
    else if (y == 0)
      ++n_neg;
    else
      throw std::invalid_argument("AUC requires binary 0/1 labels");
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::runtime_error("AUC undefined: one class is absent");

  // average ranks over tied score groups
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank =
        0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  const double n_neg_d = static_cast<double>(n_neg);
  return (rank_sum_pos - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * n_neg_d);
}

std::string eval_summary_to_json(const EvalSummary& summary) {
  std::string j = "{\"metric\": \"" + summary.metric + "\", \"mean\": " +
                  io::format_double(summary.mean) + ", \"std\": " +
                  io::format_double(summary.std_dev) + ", \"runs\": [";
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    if (i > 0) j += ", ";
    j += io::format_double(summary.runs[i]);
  }
  j += "]}\n";
  return j;
}

}  // namespace afgcl::eval
