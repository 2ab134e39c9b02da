#include "gssl/gcn_model.hpp"

#include "gssl/error.hpp"
#include "gssl/graph.hpp"

#include <cmath>
#include <sstream>

namespace gssl {

std::string_view to_string(SslTask task) {
  switch (task) {
    case SslTask::Denoise: return "denoise";
    case SslTask::Completion: return "completion";
    case SslTask::Shuffle: return "shuffle";
  }
  return "unknown";
}

TaskSet TaskSet::all() {
  TaskSet s;
  for (const auto t : kAllSslTasks) s.add(t);
  return s;
}

TaskSet TaskSet::from_mask(unsigned mask) {
  if (mask >= (1U << kAllSslTasks.size()))
    throw Error(ErrorKind::InvalidArgument, "task mask has unknown bits");
  TaskSet s;
  s.mask_ = mask;
  return s;
}

TaskSet TaskSet::parse(std::string_view text) {
  if (text == "none" || text.empty()) return none();
  if (text == "all") return all();
  TaskSet s;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    bool matched = false;
    for (const auto t : kAllSslTasks) {
      if (item == gssl::to_string(t)) {
        s.add(t);
        matched = true;
      }
    }
    if (!matched) throw Error(ErrorKind::InvalidArgument, "unknown SSL task '" + std::string(item) + "'");
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return s;
}

TaskSet& TaskSet::add(SslTask task) {
  mask_ |= 1U << static_cast<unsigned>(task);
  return *this;
}

std::vector<SslTask> TaskSet::tasks() const {
  std::vector<SslTask> out;
  for (const auto t : kAllSslTasks)
    if (contains(t)) out.push_back(t);
  return out;
}

std::string TaskSet::to_string() const {
  if (empty()) return "none";
  std::string out;
  for (const auto t : tasks()) {
    if (!out.empty()) out += ',';
    out += gssl::to_string(t);
  }
  return out;
}

std::string_view to_string(LayerId id) {
  switch (id) {
    case LayerId::Shared1: return "shared1";
    case LayerId::Shared2: return "shared2";
    case LayerId::Classify: return "classify";
    case LayerId::Denoise: return "denoise";
    case LayerId::Completion: return "completion";
    case LayerId::Shuffle: return "shuffle";
  }
  return "unknown";
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    out.layers[i].weight = Matrix::Zero(layers[i].weight.rows(), layers[i].weight.cols());
    out.layers[i].bias = Matrix::Zero(layers[i].bias.rows(), layers[i].bias.cols());
  }
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

Matrix init_xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1) throw Error(ErrorKind::InvalidArgument, "Xavier fan sizes must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
  return w;
}

Head head_for(SslTask task) {
  switch (task) {
    case SslTask::Denoise: return Head::Denoise;
    case SslTask::Completion: return Head::Completion;
    case SslTask::Shuffle: return Head::Shuffle;
  }
  return Head::Classify;
}

LayerId layer_for(Head head) {
  switch (head) {
    case Head::Classify: return LayerId::Classify;
    case Head::Denoise: return LayerId::Denoise;
    case Head::Completion: return LayerId::Completion;
    case Head::Shuffle: return LayerId::Shuffle;
  }
  return LayerId::Classify;
}

GcnModel make_model(const ModelConfig& config, Rng& rng) {
  if (config.input_dim < 1 || config.class_count < 2 || config.hidden < 1)
    throw Error(ErrorKind::InvalidArgument, "model needs input_dim >= 1, class_count >= 2, hidden >= 1");
  GcnModel model{config, {}};
  auto init = [&](LayerId id, std::size_t in, std::size_t out) {
    auto& layer = model.params[id];
    layer.weight = init_xavier(in, out, rng);
    if (config.use_bias) layer.bias = Matrix::Zero(1, static_cast<Eigen::Index>(out));
  };
  init(LayerId::Shared1, config.input_dim, config.hidden);
  init(LayerId::Shared2, config.hidden, config.hidden);
  init(LayerId::Classify, config.hidden, config.class_count);
  if (config.tasks.contains(SslTask::Denoise)) init(LayerId::Denoise, config.hidden, config.input_dim);
  if (config.tasks.contains(SslTask::Completion)) init(LayerId::Completion, config.hidden, config.input_dim);
  if (config.tasks.contains(SslTask::Shuffle)) init(LayerId::Shuffle, config.hidden, 1);
  return model;
}

NormalizedAdjacency normalize_adjacency(const Matrix& signed_adjacency) {
  if (signed_adjacency.rows() != signed_adjacency.cols())
    throw Error(ErrorKind::ShapeMismatch, "adjacency must be square");
  Matrix a_hat = signed_adjacency;
  a_hat.diagonal().array() += 1.0;
  const Vector inv_sqrt = a_hat.cwiseAbs().rowwise().sum().cwiseSqrt().cwiseInverse();
  NormalizedAdjacency out;
  out.values = inv_sqrt.asDiagonal() * a_hat * inv_sqrt.asDiagonal();
  return out;
}

NormalizedAdjacency normalize_adjacency(const SignedGraph& graph) {
  return normalize_adjacency(graph.adjacency());
}

namespace {

Matrix apply_layer(const Matrix& aggregated, const Layer& layer) {
  Matrix out = aggregated * layer.weight;
  if (layer.bias.size() > 0) out.rowwise() += layer.bias.row(0);
  return out;
}

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

void check_inputs(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x) {
  if (adj.values.rows() != adj.values.cols() || adj.values.rows() != x.rows())
    throw Error(ErrorKind::ShapeMismatch, "adjacency and feature rows disagree");
  if (static_cast<std::size_t>(x.cols()) != model.config.input_dim)
    throw Error(ErrorKind::ShapeMismatch, "feature width differs from model input_dim");
}

// dLoss/d(layer input H) for out = (A H) W + b, accumulating dW and db
Matrix layer_backward(const Matrix& adj, const Matrix& aggregated_in, const Layer& layer,
                      const Matrix& d_out, Layer& grad, bool need_input_grad) {
  grad.weight.noalias() += aggregated_in.transpose() * d_out;
  if (grad.bias.size() > 0) grad.bias.row(0) += d_out.colwise().sum();
  if (!need_input_grad) return {};
  const Matrix d_agg = d_out * layer.weight.transpose();
  // A is symmetric, so A^T d_agg == A d_agg
  return adj.transpose() * d_agg;
}

}  // namespace

TrunkPass forward_trunk(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x) {
  check_inputs(model, adj, x);
  TrunkPass t;
  t.agg_input = adj.values * x;
  t.pre1 = apply_layer(t.agg_input, model.params[LayerId::Shared1]);
  t.h1 = relu(t.pre1);
  t.agg_h1 = adj.values * t.h1;
  t.pre2 = apply_layer(t.agg_h1, model.params[LayerId::Shared2]);
  t.h2 = relu(t.pre2);
  t.agg_h2 = adj.values * t.h2;
  return t;
}

ForwardPass forward_pass(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x, Head head) {
  const auto& layer = model.params[layer_for(head)];
  if (!layer.present())
    throw Error(ErrorKind::ShapeMismatch, "model has no '" + std::string(to_string(layer_for(head))) + "' head");
  ForwardPass pass;
  pass.head = head;
  pass.trunk = forward_trunk(model, adj, x);
  pass.output = apply_layer(pass.trunk.agg_h2, layer);
  return pass;
}

Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x, Head head) {
  return forward_pass(model, adj, x, head).output;
}

void backward_pass(const GcnModel& model, const NormalizedAdjacency& adj, const ForwardPass& pass,
                   const Matrix& d_output, ParameterSet& grads) {
  if (d_output.rows() != pass.output.rows() || d_output.cols() != pass.output.cols())
    throw Error(ErrorKind::ShapeMismatch, "output gradient shape differs from forward output");
  const auto head_id = layer_for(pass.head);
  const auto& a = adj.values;
  const auto& t = pass.trunk;

  Matrix d_h2 = layer_backward(a, t.agg_h2, model.params[head_id], d_output, grads[head_id], true);
  const Matrix d_pre2 = d_h2.cwiseProduct((t.pre2.array() > 0.0).cast<double>().matrix());
  Matrix d_h1 = layer_backward(a, t.agg_h1, model.params[LayerId::Shared2], d_pre2, grads[LayerId::Shared2], true);
  const Matrix d_pre1 = d_h1.cwiseProduct((t.pre1.array() > 0.0).cast<double>().matrix());
  layer_backward(a, t.agg_input, model.params[LayerId::Shared1], d_pre1, grads[LayerId::Shared1], false);
}

}  // namespace gssl
