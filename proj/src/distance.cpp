#include "gssl/distance.hpp"

#include "gssl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gssl {

std::string_view to_string(Metric metric) {
  return metric == Metric::Cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "cosine") return Metric::Cosine;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

DistanceMatrix::DistanceMatrix(std::size_t n, Metric metric, std::vector<double> upper)
    : n_(n), metric_(metric), upper_(std::move(upper)) {
  if (upper_.size() != n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2)
    throw Error(ErrorKind::ShapeMismatch, "packed distance storage has the wrong length");
}

std::size_t DistanceMatrix::offset(std::size_t i, std::size_t j) const {
  // row i of the strict upper triangle starts after i rows of decreasing length
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

double DistanceMatrix::distance(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw Error(ErrorKind::InvalidArgument, "distance index out of range");
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return upper_[offset(i, j)];
}

DistanceMatrix compute_distances(const Matrix& features, Metric metric) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "no rows to compare");
  for (Eigen::Index r = 0; r < features.rows(); ++r)
    if (!features.row(r).allFinite())
      throw Error(ErrorKind::NonFiniteFeature, "row contains NaN or infinity", static_cast<std::size_t>(r));

  Vector norms;
  if (metric == Metric::Cosine) norms = features.rowwise().norm();

  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < features.rows(); ++j) {
      double d = 0.0;
      if (metric == Metric::Euclidean) {
        d = (features.row(i) - features.row(j)).norm();
      } else {
        const double denom = norms[i] * norms[j];
        // a zero vector has no direction; treat it as orthogonal to everything
        d = denom > 0.0 ? 1.0 - features.row(i).dot(features.row(j)) / denom : 1.0;
        d = std::max(d, 0.0);
      }
      upper.push_back(d);
    }
  }
  return DistanceMatrix(n, metric, std::move(upper));
}

std::vector<std::size_t> query_neighbors(const PairwiseDistances& dm, std::size_t query,
                                         std::span<const std::size_t> candidates, NeighborMode mode,
                                         std::optional<LabelFilter> filter) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (const std::size_t c : candidates) {
    if (filter) {
      const auto& label = filter->labels[c];
      if (!label || *label != filter->cls) continue;
    }
    scored.emplace_back(dm.distance(query, c), c);
  }
  if (scored.empty()) throw Error(ErrorKind::NoCandidates, "no candidate survives filtering", query);

  if (mode.kind == NeighborMode::Kind::Farthest) {
    auto best = scored.front();
    for (const auto& s : scored)
      if (s.first > best.first || (s.first == best.first && s.second < best.second)) best = s;
    return {best.second};
  }

  const std::size_t k = std::min(mode.k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace gssl
