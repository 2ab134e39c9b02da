#include "gssl/graph.hpp"

#include "gssl/error.hpp"

#include <algorithm>

namespace gssl {

SignedGraph::SignedGraph(Matrix node_features) : features_(std::move(node_features)) {}

std::uint64_t SignedGraph::key(std::size_t i, std::size_t j) const {
  const auto lo = std::min(i, j);
  const auto hi = std::max(i, j);
  return static_cast<std::uint64_t>(lo) * node_count() + hi;
}

bool SignedGraph::add_edge(std::size_t i, std::size_t j, double weight) {
  if (i >= node_count() || j >= node_count())
    throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range");
  if (weight != 1.0 && weight != -1.0)
    throw Error(ErrorKind::InvalidArgument, "edge weight must be +1 or -1");
  if (i == j) return false;
  if (!pairs_.insert(key(i, j)).second) return false;
  edges_.push_back({i, j, weight});
  return true;
}

bool SignedGraph::has_edge(std::size_t i, std::size_t j) const {
  return i != j && pairs_.count(key(i, j)) > 0;
}

Matrix SignedGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : edges_) {
    a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.weight;
    a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.weight;
  }
  return a;
}

std::size_t SignedGraph::degree(std::size_t node) const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [node](const Edge& e) {
    return e.i == node || e.j == node;
  }));
}

std::vector<std::size_t> SubgraphBatch::nodes_with(Provenance p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < provenance.size(); ++i)
    if (provenance[i] == p) out.push_back(i);
  return out;
}

bool is_class_balanced(const SubgraphBatch& batch, int class_count) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (std::size_t i = 0; i < batch.node_count(); ++i) {
    if (batch.provenance[i] != Provenance::TrueLabel) continue;
    const int cls = batch.labels[i].value();
    if (cls < 0 || cls >= class_count) return false;
    ++counts[static_cast<std::size_t>(cls)];
  }
  return std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) == counts.end();
}

bool PseudolabelStore::covers(const std::vector<std::size_t>& indices) const {
  if (size() != indices.size()) return false;
  return std::all_of(indices.begin(), indices.end(),
                     [this](std::size_t i) { return i < by_index.size() && by_index[i].has_value(); });
}

std::size_t PseudolabelStore::size() const {
  return static_cast<std::size_t>(
      std::count_if(by_index.begin(), by_index.end(), [](const auto& p) { return p.has_value(); }));
}

}  // namespace gssl
