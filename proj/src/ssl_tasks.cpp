#include "gssl/ssl_tasks.hpp"

#include "gssl/error.hpp"
#include "gssl/graph_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gssl {

namespace {

std::size_t selection_size(double fraction, std::size_t n, std::size_t floor) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "fraction must lie in (0, 1]");
  const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::min(std::max(floor, rounded), n);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

SslInstance base_instance(SslTask task, const SubgraphBatch& g) {
  SslInstance inst;
  inst.task = task;
  inst.original = g.graph.node_features();
  inst.transformed = inst.original;
  return inst;
}

double log_sigmoid(double s) { return -(std::max(-s, 0.0) + std::log1p(std::exp(-std::abs(s)))); }

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace

SslInstance make_denoise(const SubgraphBatch& g, double variance, Rng& rng) {
  if (!(variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise variance must be positive");
  SslInstance inst = base_instance(SslTask::Denoise, g);
  inst.noise_variance = variance;
  std::normal_distribution<double> noise(0.0, std::sqrt(variance));
  for (Eigen::Index r = 0; r < inst.transformed.rows(); ++r)
    for (Eigen::Index c = 0; c < inst.transformed.cols(); ++c) inst.transformed(r, c) += noise(rng);
  return inst;
}

SslInstance make_completion(const SubgraphBatch& g, double fraction, Rng& rng) {
  SslInstance inst = base_instance(SslTask::Completion, g);
  inst.mask_fraction = fraction;
  const std::size_t n = g.node_count();
  const std::size_t count = selection_size(fraction, n, 1);
  inst.selected_rows = sample_without_replacement(all_rows(n), count, rng);
  std::sort(inst.selected_rows.begin(), inst.selected_rows.end());
  for (const auto r : inst.selected_rows) inst.transformed.row(static_cast<Eigen::Index>(r)).setZero();
  return inst;
}

SslInstance make_shuffle(const SubgraphBatch& g, double fraction, Rng& rng) {
  SslInstance inst = base_instance(SslTask::Shuffle, g);
  inst.mask_fraction = fraction;
  const std::size_t n = g.node_count();
  const std::size_t count = selection_size(fraction, n, 2);
  inst.selected_rows = sample_without_replacement(all_rows(n), count, rng);
  std::sort(inst.selected_rows.begin(), inst.selected_rows.end());
  const auto permuted = sample_without_replacement(inst.selected_rows, count, rng);
  for (std::size_t k = 0; k < count; ++k) {
    const auto dst = static_cast<Eigen::Index>(inst.selected_rows[k]);
    const auto src = static_cast<Eigen::Index>(permuted[k]);
    inst.transformed.row(dst) = inst.original.row(src);
    inst.unchanged.push_back(inst.transformed.row(dst) == inst.original.row(dst) ? 1.0 : 0.0);
  }
  return inst;
}

LossAndGrad ssl_loss_and_grad(SslTask task, const Matrix& predictions, const SslInstance& instance) {
  if (task != instance.task) throw Error(ErrorKind::InvalidArgument, "loss task differs from instance task");
  LossAndGrad out;
  const auto& target = instance.original;
  out.grad = Matrix::Zero(predictions.rows(), predictions.cols());
  switch (task) {
    case SslTask::Denoise: {
      if (predictions.rows() != target.rows() || predictions.cols() != target.cols())
        throw Error(ErrorKind::ShapeMismatch, "denoise predictions must match the feature matrix");
      const double n = static_cast<double>(target.rows());
      const Matrix diff = predictions - target;
      out.value = diff.squaredNorm() / n;
      out.grad = (2.0 / n) * diff;
      break;
    }
    case SslTask::Completion: {
      if (predictions.rows() != target.rows() || predictions.cols() != target.cols())
        throw Error(ErrorKind::ShapeMismatch, "completion predictions must match the feature matrix");
      const double m = static_cast<double>(instance.selected_rows.size());
      for (const auto r : instance.selected_rows) {
        const auto row = static_cast<Eigen::Index>(r);
        const auto diff = (predictions.row(row) - target.row(row)).eval();
        out.value += diff.squaredNorm();
        out.grad.row(row) = (2.0 / m) * diff;
      }
      out.value /= m;
      break;
    }
    case SslTask::Shuffle: {
      if (predictions.rows() != target.rows() || predictions.cols() != 1)
        throw Error(ErrorKind::ShapeMismatch, "shuffle predictions must be one logit per node");
      const double m = static_cast<double>(instance.selected_rows.size());
      for (std::size_t k = 0; k < instance.selected_rows.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(instance.selected_rows[k]);
        const double s = predictions(row, 0);
        const double y = instance.unchanged[k];
        out.value -= y * log_sigmoid(s) + (1.0 - y) * log_sigmoid(-s);
        out.grad(row, 0) = (sigmoid(s) - y) / m;
      }
      out.value /= m;
      break;
    }
  }
  return out;
}

double ssl_loss(SslTask task, const Matrix& predictions, const SslInstance& instance) {
  return ssl_loss_and_grad(task, predictions, instance).value;
}

}  // namespace gssl
