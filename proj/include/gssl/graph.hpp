#pragma once

#include "gssl/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

namespace gssl {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;  // +1 attract, -1 repel
};

/// Undirected graph with signed unit edges. Each edge is stored once and read
/// symmetrically; self-loops are never stored.
class SignedGraph {
 public:
  SignedGraph() = default;
  explicit SignedGraph(Matrix node_features);

  std::size_t node_count() const { return static_cast<std::size_t>(features_.rows()); }
  const Matrix& node_features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Adds (i, j, w) unless i == j or the unordered pair already exists.
  /// Returns whether the edge was inserted; the first weight wins.
  bool add_edge(std::size_t i, std::size_t j, double weight);
  bool has_edge(std::size_t i, std::size_t j) const;

  /// Dense symmetric adjacency with entries in {-1, 0, +1}.
  Matrix adjacency() const;

  std::size_t degree(std::size_t node) const;

 private:
  std::uint64_t key(std::size_t i, std::size_t j) const;

  Matrix features_;
  std::vector<Edge> edges_;
  std::unordered_set<std::uint64_t> pairs_;
};

enum class Provenance { TrueLabel, PseudoLabel, Unlabeled, Test };

/// A sampled subgraph plus bookkeeping mapping its nodes back to the dataset.
/// Test nodes carry no dataset index (global_index is nullopt).
struct SubgraphBatch {
  SignedGraph graph;
  std::vector<std::optional<std::size_t>> global_index;
  /// True for nodes whose label (true or pseudo) drove edge construction.
  std::vector<bool> labeled_mask;
  std::vector<std::optional<int>> labels;
  std::vector<Provenance> provenance;

  std::size_t node_count() const { return graph.node_count(); }
  std::vector<std::size_t> nodes_with(Provenance p) const;
};

/// Counts true-labeled nodes per class; balanced iff all counts are equal.
bool is_class_balanced(const SubgraphBatch& batch, int class_count);

struct Pseudolabel {
  int cls = 0;
  double confidence = 0.0;
};

/// Predicted class + max-softmax confidence for unlabeled training samples,
/// keyed by dataset index.
struct PseudolabelStore {
  std::vector<std::optional<Pseudolabel>> by_index;
  int epoch_of_record = 0;

  bool covers(const std::vector<std::size_t>& indices) const;
  std::size_t size() const;
};

}  // namespace gssl
