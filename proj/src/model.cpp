#include "afgcl/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "afgcl/rng.hpp"

namespace afgcl::nn {

namespace {

constexpr double kBnEpsilon = 1e-5;
constexpr double kNormFloor = 1e-12;

}  // namespace

ModelParams ModelParams::zeros_like(const ModelParams& shape) {
  ModelParams z;
  for (const auto& w : shape.gcn_weights)
    z.gcn_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& v : shape.bn_scale)
    z.bn_scale.push_back(Eigen::VectorXd::Zero(v.size()));
  for (const auto& v : shape.bn_shift)
    z.bn_shift.push_back(Eigen::VectorXd::Zero(v.size()));
  for (const auto& w : shape.proj_weights)
    z.proj_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& v : shape.proj_biases)
    z.proj_biases.push_back(Eigen::VectorXd::Zero(v.size()));
  return z;
}

void ModelParams::check_finite() const {
  for (const auto& w : gcn_weights)
    if (!w.allFinite()) throw std::runtime_error("non-finite GCN weight");
  for (const auto& v : bn_scale)
    if (!v.allFinite()) throw std::runtime_error("non-finite BN scale");
  for (const auto& v : bn_shift)
    if (!v.allFinite()) throw std::runtime_error("non-finite BN shift");
  for (const auto& w : proj_weights)
    if (!w.allFinite()) throw std::runtime_error("non-finite projector weight");
  for (const auto& v : proj_biases)
    if (!v.allFinite()) throw std::runtime_error("non-finite projector bias");
}

PropagationOperator PropagationOperator::build(const Graph& g) {
  PropagationOperator p;
  const int n = g.num_nodes;
  p.num_nodes = n;
  p.offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    p.offsets[i + 1] = p.offsets[i] + g.degree(i) + 1;  // + self-loop
  p.cols.resize(p.offsets[n]);
  p.vals.resize(p.offsets[n]);
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  for (int i = 0; i < n; ++i) {
    int cursor = p.offsets[i];
    bool self_done = false;
    for (int j : g.neighbors(i)) {
      if (!self_done && j > i) {  // keep columns sorted with the self-loop
        p.cols[cursor] = i;
        p.vals[cursor] = inv_sqrt[i] * inv_sqrt[i];
        ++cursor;
        self_done = true;
      }
      p.cols[cursor] = j;
      p.vals[cursor] = inv_sqrt[i] * inv_sqrt[j];
      ++cursor;
    }
    if (!self_done) {
      p.cols[cursor] = i;
      p.vals[cursor] = inv_sqrt[i] * inv_sqrt[i];
      ++cursor;
    }
  }
  return p;
}

Eigen::MatrixXd PropagationOperator::apply(const Eigen::MatrixXd& x) const {
  if (static_cast<int>(x.rows()) != num_nodes)
    throw std::invalid_argument("propagation: row count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (int i = 0; i < num_nodes; ++i)
    for (int k = offsets[i]; k < offsets[i + 1]; ++k)
      out.row(i) += vals[k] * x.row(cols[k]);
  return out;
}

Eigen::MatrixXd PropagationOperator::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  for (int i = 0; i < num_nodes; ++i)
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) d(i, cols[k]) = vals[k];
  return d;
}

ModelParams init_params(std::uint64_t seed, const std::vector<int>& dims) {
  if (dims.size() < 4)
    throw std::invalid_argument(
        "dims must list at least feature, hidden, embed and one projector "
        "width");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("layer widths must be positive");

  const Rng root(seed);
  ModelParams p;
  auto glorot = [&root](int rows, int cols, std::uint64_t stream) {
    Rng rng = root.fork(stream);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        w(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    return w;
  };

  p.gcn_weights.push_back(glorot(dims[0], dims[1], 100));
  p.gcn_weights.push_back(glorot(dims[1], dims[2], 101));
  p.bn_scale = {Eigen::VectorXd::Ones(dims[1]), Eigen::VectorXd::Ones(dims[2])};
  p.bn_shift = {Eigen::VectorXd::Zero(dims[1]), Eigen::VectorXd::Zero(dims[2])};
  for (std::size_t i = 2; i + 1 < dims.size(); ++i) {
    p.proj_weights.push_back(
        glorot(dims[i], dims[i + 1], 200 + static_cast<std::uint64_t>(i)));
    p.proj_biases.push_back(Eigen::VectorXd::Zero(dims[i + 1]));
  }
  return p;
}

Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (norm > kNormFloor) out.row(i) /= norm;
  }
  return out;
}

std::pair<Eigen::MatrixXd, ForwardTrace> gcn_forward(const ModelParams& params,
                                                     const Dataset& dataset,
                                                     ForwardMode mode) {
  if (params.gcn_weights.size() != 2)
    throw std::invalid_argument("expected exactly two GCN layers");
  if (dataset.features.cols() != params.gcn_weights[0].rows())
    throw std::invalid_argument(
        "feature width " + std::to_string(dataset.features.cols()) +
        " does not match first weight rows " +
        std::to_string(params.gcn_weights[0].rows()));

  ForwardTrace trace;
  trace.mode = mode;
  trace.params = params;
  trace.prop = PropagationOperator::build(dataset.graph);
  trace.x_norm = l2_normalize_rows(dataset.features);

  const Eigen::MatrixXd* input = &trace.x_norm;
  for (int layer = 0; layer < 2; ++layer) {
    ForwardTrace::GcnLayer cache;
    cache.prop_out = trace.prop.apply(*input * params.gcn_weights[layer]);
    if (mode == ForwardMode::train) {
      const auto& u = cache.prop_out;
      const double n = static_cast<double>(u.rows());
      cache.bn_mean = u.colwise().mean().transpose();
      Eigen::MatrixXd centered = u.rowwise() - cache.bn_mean.transpose();
      Eigen::VectorXd var =
          (centered.array().square().colwise().sum() / n).transpose();
      cache.bn_inv_std = (var.array() + kBnEpsilon).rsqrt();
      cache.bn_xhat = centered * cache.bn_inv_std.asDiagonal();
      Eigen::MatrixXd bn_out =
          (cache.bn_xhat * params.bn_scale[layer].asDiagonal()).rowwise() +
          params.bn_shift[layer].transpose();
      cache.act = bn_out.cwiseMax(0.0);
    } else {
      cache.act = cache.prop_out;
    }
    trace.gcn.push_back(std::move(cache));
    input = &trace.gcn.back().act;
  }
  return {trace.gcn.back().act, std::move(trace)};
}

Eigen::MatrixXd project(const ModelParams& params, const Eigen::MatrixXd& h,
                        ForwardTrace& trace) {
  if (params.proj_weights.empty())
    throw std::invalid_argument("projector has no layers");
  if (h.cols() != params.proj_weights[0].rows())
    throw std::invalid_argument("projector input width mismatch");

  const std::size_t layers = params.proj_weights.size();
  trace.proj_pre.clear();
  Eigen::MatrixXd cur = h;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd pre = (cur * params.proj_weights[l]).rowwise() +
                          params.proj_biases[l].transpose();
    trace.proj_pre.push_back(pre);
    if (l + 1 < layers && trace.mode == ForwardMode::train)
      cur = pre.cwiseMax(0.0);
    else
      cur = std::move(pre);
  }

  if (trace.mode == ForwardMode::train) {
    trace.row_norms.resize(cur.rows());
    for (Eigen::Index i = 0; i < cur.rows(); ++i) {
      const double norm = std::max(cur.row(i).norm(), kNormFloor);
      trace.row_norms[i] = norm;
      cur.row(i) /= norm;
    }
  }
  trace.z = cur;
  return trace.z;
}

ModelParams backward(const Eigen::MatrixXd& loss_grad_z,
                     const ForwardTrace& trace) {
  const ModelParams& params = trace.params;
  if (trace.proj_pre.empty())
    throw std::invalid_argument("trace has no projector pass; call project()");
  if (loss_grad_z.rows() != trace.z.rows() ||
      loss_grad_z.cols() != trace.z.cols())
    throw std::invalid_argument("loss gradient shape does not match Z");

  ModelParams grads = ModelParams::zeros_like(params);
  const bool train = trace.mode == ForwardMode::train;
  const std::size_t layers = params.proj_weights.size();

  // Row L2 normalization: z = v / r with r = max(||v||, floor).
  Eigen::MatrixXd grad_pre;
  if (train) {
    grad_pre.resizeLike(loss_grad_z);
    for (Eigen::Index i = 0; i < loss_grad_z.rows(); ++i) {
      const double r = trace.row_norms[i];
      const auto z = trace.z.row(i);
      const auto dz = loss_grad_z.row(i);
      if (r > kNormFloor)
        grad_pre.row(i) = (dz - z * z.dot(dz)) / r;
      else
        grad_pre.row(i) = dz / r;  // clamped branch: plain scaling
    }
  } else {
    grad_pre = loss_grad_z;
  }

  // Projector chain, last layer first. ReLU sits between layers only.
  Eigen::MatrixXd grad_input;
  Eigen::MatrixXd relu_input;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd* input = &trace.embedding();
    if (l > 0) {
      if (train) {
        relu_input = trace.proj_pre[l - 1].cwiseMax(0.0);
        input = &relu_input;
      } else {
        input = &trace.proj_pre[l - 1];
      }
    }
    grads.proj_weights[l] = input->transpose() * grad_pre;
    grads.proj_biases[l] = grad_pre.colwise().sum().transpose();
    grad_input = grad_pre * params.proj_weights[l].transpose();
    if (l > 0) {
      if (train)
        grad_pre = grad_input.cwiseProduct(
            (trace.proj_pre[l - 1].array() > 0.0).cast<double>().matrix());
      else
        grad_pre = std::move(grad_input);
    }
  }

  // GCN layers, last first.
  Eigen::MatrixXd grad_act = grad_input;
  for (int layer = 1; layer >= 0; --layer) {
    const auto& cache = trace.gcn[layer];
    Eigen::MatrixXd grad_u;
    if (train) {
      // act = relu(bn_xhat * gamma + beta)
      Eigen::MatrixXd grad_bn = grad_act.cwiseProduct(
          (cache.act.array() > 0.0).cast<double>().matrix());
      grads.bn_shift[layer] = grad_bn.colwise().sum().transpose();
      grads.bn_scale[layer] =
          grad_bn.cwiseProduct(cache.bn_xhat).colwise().sum().transpose();
      Eigen::MatrixXd grad_xhat =
          grad_bn * params.bn_scale[layer].asDiagonal();
      const double n = static_cast<double>(grad_xhat.rows());
      const Eigen::RowVectorXd mean_gx = grad_xhat.colwise().sum() / n;
      const Eigen::RowVectorXd mean_gx_xhat =
          grad_xhat.cwiseProduct(cache.bn_xhat).colwise().sum() / n;
      Eigen::MatrixXd tmp = grad_xhat.rowwise() - mean_gx;
      tmp -= cache.bn_xhat * mean_gx_xhat.asDiagonal();
      grad_u = tmp * cache.bn_inv_std.asDiagonal();
    } else {
      grad_u = grad_act;
    }
    const Eigen::MatrixXd grad_t = trace.prop.apply(grad_u);  // P symmetric
    const Eigen::MatrixXd& input =
        layer == 0 ? trace.x_norm : trace.gcn[0].act;
    grads.gcn_weights[layer] = input.transpose() * grad_t;
    if (layer > 0)
      grad_act = grad_t * params.gcn_weights[layer].transpose();
  }
  return grads;
}

AdamState::AdamState(const ModelParams& shape, double lr)
    : learning_rate(lr),
      first_moment(ModelParams::zeros_like(shape)),
      second_moment(ModelParams::zeros_like(shape)) {}

std::vector<Eigen::Map<Eigen::ArrayXd>> param_views(ModelParams& p) {
  std::vector<Eigen::Map<Eigen::ArrayXd>> views;
  auto add_mat = [&views](Eigen::MatrixXd& m) {
    views.emplace_back(m.data(), m.size());
  };
  auto add_vec = [&views](Eigen::VectorXd& v) {
    views.emplace_back(v.data(), v.size());
  };
  for (auto& w : p.gcn_weights) add_mat(w);
  for (auto& v : p.bn_scale) add_vec(v);
  for (auto& v : p.bn_shift) add_vec(v);
  for (auto& w : p.proj_weights) add_mat(w);
  for (auto& v : p.proj_biases) add_vec(v);
  return views;
}

std::vector<Eigen::Map<const Eigen::ArrayXd>> param_views(
    const ModelParams& p) {
  std::vector<Eigen::Map<const Eigen::ArrayXd>> views;
  auto add_mat = [&views](const Eigen::MatrixXd& m) {
    views.emplace_back(m.data(), m.size());
  };
  auto add_vec = [&views](const Eigen::VectorXd& v) {
    views.emplace_back(v.data(), v.size());
  };
  for (const auto& w : p.gcn_weights) add_mat(w);
  for (const auto& v : p.bn_scale) add_vec(v);
  for (const auto& v : p.bn_shift) add_vec(v);
  for (const auto& w : p.proj_weights) add_mat(w);
  for (const auto& v : p.proj_biases) add_vec(v);
  return views;
}

void adam_step(AdamState& state, ModelParams& params,
               const ModelParams& grads) {
  ++state.step;
  auto p = param_views(params);
  auto g = param_views(grads);
  auto m = param_views(state.first_moment);
  auto v = param_views(state.second_moment);
  if (p.size() != g.size())
    throw std::invalid_argument("gradient structure does not match params");
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a].size() != g[a].size())
      throw std::invalid_argument("gradient block shape mismatch");
    m[a] = b1 * m[a] + (1.0 - b1) * g[a];
    v[a] = b2 * v[a] + (1.0 - b2) * g[a].square();
    p[a] -= state.learning_rate * (m[a] / c1) /
            ((v[a] / c2).sqrt() + state.epsilon);
  }
}

}  // namespace afgcl::nn
