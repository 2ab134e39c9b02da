#include "gssl/synthetic.hpp"

#include "gssl/error.hpp"
#include "gssl/graph_builder.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace gssl {

void validate_synthetic_spec(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw Error(ErrorKind::InvalidArgument, "synthetic data needs at least two classes");
  if (spec.per_class < 1 || spec.dim < 1) throw Error(ErrorKind::InvalidArgument, "per_class and dim must be positive");
  if (!(spec.label_fraction > 0.0 && spec.label_fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "label_fraction must lie in (0, 1]");
  if (!(spec.separation > 0.0)) throw Error(ErrorKind::InvalidArgument, "separation must be positive");
  if (!(spec.cluster_std >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cluster_std must be nonnegative");
}

namespace {

std::string make_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%06zu", prefix, i);
  return buf;
}

Matrix class_means(const SyntheticSpec& spec, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix means(spec.classes, static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    for (Eigen::Index k = 0; k < means.cols(); ++k) means(c, k) = gauss(rng);
    means.row(c) *= spec.separation / means.row(c).norm();
  }
  return means;
}

// per_class draws per class, rows shuffled; returns (features, class of each row)
std::pair<Matrix, std::vector<int>> draw(const SyntheticSpec& spec, const Matrix& means, std::size_t per_class,
                                         Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = per_class * static_cast<std::size_t>(spec.classes);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  order = sample_without_replacement(order, n, rng);

  Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
  std::vector<int> classes(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const auto row = static_cast<Eigen::Index>(order[slot]);
    const int cls = static_cast<int>(slot / per_class);
    for (Eigen::Index k = 0; k < features.cols(); ++k)
      features(row, k) = means(cls, k) + spec.cluster_std * gauss(rng);
    classes[order[slot]] = cls;
  }
  return {features, classes};
}

std::vector<std::string> numeric_names(int classes) {
  std::vector<std::string> out;
  for (int c = 0; c < classes; ++c) out.push_back(std::to_string(c));
  return out;
}

}  // namespace

SyntheticSplit generate_synthetic_split(const SyntheticSpec& spec, std::size_t holdout_per_class) {
  validate_synthetic_spec(spec);
  Rng rng(spec.seed);
  const Matrix means = class_means(spec, rng);

  SyntheticSplit out;
  auto [features, classes] = draw(spec, means, spec.per_class, rng);
  auto& train = out.train;
  train.features = std::move(features);
  train.class_count = spec.classes;
  train.class_names = numeric_names(spec.classes);
  train.labels.assign(classes.size(), std::nullopt);
  for (std::size_t i = 0; i < classes.size(); ++i) train.ids.push_back(make_id('s', i));

  const auto keep = static_cast<std::size_t>(std::ceil(spec.label_fraction * static_cast<double>(spec.per_class) - 1e-9));
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(spec.classes));
  for (std::size_t i = 0; i < classes.size(); ++i) by_class[static_cast<std::size_t>(classes[i])].push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    for (const auto i : sample_without_replacement(by_class[c], keep, rng)) train.labels[i] = static_cast<int>(c);
  out.train = validate_dataset(std::move(out.train));

  if (holdout_per_class > 0) {
    Rng holdout_rng(spec.seed ^ 0x5DEECE66DULL);
    auto [hf, hc] = draw(spec, means, holdout_per_class, holdout_rng);
    auto& holdout = out.holdout;
    holdout.features = std::move(hf);
    holdout.class_count = spec.classes;
    holdout.class_names = numeric_names(spec.classes);
    for (std::size_t i = 0; i < hc.size(); ++i) {
      holdout.labels.emplace_back(hc[i]);
      holdout.ids.push_back(make_id('t', i));
    }
    out.holdout = validate_dataset(std::move(out.holdout));
  }
  return out;
}

FeatureDataset generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic_split(spec, 0).train;
}

}  // namespace gssl
