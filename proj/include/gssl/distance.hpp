#pragma once

#include "gssl/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gssl {

enum class Metric { Euclidean, Cosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

/// Read-only pairwise distance lookup over dataset indices. Graph builders
/// only ever see distances through this interface.
class PairwiseDistances {
 public:
  virtual ~PairwiseDistances() = default;
  virtual std::size_t size() const = 0;
  virtual double distance(std::size_t i, std::size_t j) const = 0;
};

/// Exact symmetric distance matrix. Stores the strict upper triangle once, so
/// d(i, j) == d(j, i) holds bit-for-bit and d(i, i) == 0.
class DistanceMatrix final : public PairwiseDistances {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, Metric metric, std::vector<double> upper);

  std::size_t size() const override { return n_; }
  double distance(std::size_t i, std::size_t j) const override;
  Metric metric() const { return metric_; }

 private:
  std::size_t offset(std::size_t i, std::size_t j) const;

  std::size_t n_ = 0;
  Metric metric_ = Metric::Euclidean;
  std::vector<double> upper_;
};

DistanceMatrix compute_distances(const Matrix& features, Metric metric = Metric::Euclidean);

struct NeighborMode {
  enum class Kind { NearestK, Farthest } kind = Kind::NearestK;
  std::size_t k = 1;

  static NeighborMode nearest(std::size_t k) { return {Kind::NearestK, k}; }
  static NeighborMode farthest() { return {Kind::Farthest, 1}; }
};

/// Keeps only candidates whose label equals `cls`; `labels` is indexed by the
/// same node indices as the distance source.
struct LabelFilter {
  std::span<const std::optional<int>> labels;
  int cls = 0;
};

/// Nearest-k (ascending distance) or the single farthest candidate. Ties go to
/// the smaller node index. Throws NoCandidates if filtering leaves nothing.
std::vector<std::size_t> query_neighbors(const PairwiseDistances& dm, std::size_t query,
                                         std::span<const std::size_t> candidates, NeighborMode mode,
                                         std::optional<LabelFilter> filter = std::nullopt);

}  // namespace gssl
