#pragma once

#include "gssl/dataset.hpp"
#include "gssl/distance.hpp"
#include "gssl/graph.hpp"
#include "gssl/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gssl {

struct SubgraphConfig {
  std::size_t labeled_per_class = 2;  // N_s / C
  std::size_t unlabeled_count = 5;    // M_s
  std::size_t test_edge_count = 4;    // T
  std::uint64_t rng_seed = 0;

  std::size_t labeled_total(int class_count) const {
    return labeled_per_class * static_cast<std::size_t>(class_count);
  }
};

void validate_subgraph_config(const SubgraphConfig& cfg);

/// One proposed edge in subgraph-local indices, before duplicate collapsing.
struct EdgeProposal {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
};

/// Applies the signed edge rules to the nodes `members` (dataset indices).
/// A node with a label links (+1) to its 2 nearest same-label members; a node
/// without one links (+1) to its 2 nearest members of any status. Every node
/// links (-1) to its farthest member. Proposals come out in member order.
std::vector<EdgeProposal> propose_edges(const PairwiseDistances& dm,
                                        std::span<const std::size_t> members,
                                        std::span<const std::optional<int>> labels_by_index);

/// Collapses proposals into a graph over `features`; the first weight wins.
SignedGraph assemble_graph(Matrix features, std::span<const EdgeProposal> proposals);

/// Uniform sample of k distinct entries of `from`, in draw order.
std::vector<std::size_t> sample_without_replacement(std::span<const std::size_t> from, std::size_t k,
                                                    Rng& rng);

/// Class-balanced training subgraph: labeled_per_class random labeled nodes of
/// every class plus min(M_s, |unlabeled_pool|) nodes drawn from the pool.
SubgraphBatch build_training_subgraph(const FeatureDataset& ds, const PairwiseDistances& dm,
                                      const SubgraphConfig& cfg,
                                      std::span<const std::size_t> unlabeled_pool, Rng& rng);

/// One graph over every sample of the dataset with the same edge rules.
SubgraphBatch build_full_training_graph(const FeatureDataset& ds, const PairwiseDistances& dm);

/// Hands out the unlabeled indices of one epoch in shuffled chunks, so every
/// index is drawn exactly once before the pool is exhausted.
class EpochPool {
 public:
  EpochPool(std::vector<std::size_t> indices, Rng& rng);

  bool exhausted() const { return cursor_ >= order_.size(); }
  std::size_t remaining() const { return order_.size() - cursor_; }
  std::vector<std::size_t> next(std::size_t count);

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Probability that T random picks (without replacement) from a node set with
/// n_true true-labeled and m_pseudo pseudolabeled nodes all miss the true ones,
/// i.e. C(m-1, T) / C(n+m-1, T), with C(a, b) = 0 for b > a.
double all_pseudo_probability(std::size_t n_true, std::size_t m_pseudo, std::size_t edges);

/// Smallest T >= 1 such that 1 - all_pseudo_probability(n, m, T) >= p_target.
std::size_t min_test_edges(std::size_t n_true, std::size_t m_pseudo, double p_target);

struct PseudolabelStore;

/// Inference subgraph over training samples carrying true or pseudo labels,
/// with the B rows of `test_features` appended. Each test node is wired with
/// +1 edges to T distinct random training nodes and never to another test
/// node; no distance involving a test node is computed.
SubgraphBatch build_inference_subgraph(const FeatureDataset& ds, const PseudolabelStore& pseudo,
                                       const PairwiseDistances& dm, const SubgraphConfig& cfg,
                                       const Matrix& test_features, Rng& rng);

/// Same, with caller-supplied per-test-node wiring seeds (one per row).
SubgraphBatch build_inference_subgraph(const FeatureDataset& ds, const PseudolabelStore& pseudo,
                                       const PairwiseDistances& dm, const SubgraphConfig& cfg,
                                       const Matrix& test_features,
                                       std::span<const std::uint64_t> test_seeds, Rng& rng);

}  // namespace gssl

namespace gssl {

/// T for a composition of N_s true-labeled and M_s pseudolabeled nodes at the
/// given probability of reaching at least one true-labeled node.
std::size_t default_test_edges(const SubgraphConfig& cfg, int class_count, double p_target = 0.99);

}  // namespace gssl
