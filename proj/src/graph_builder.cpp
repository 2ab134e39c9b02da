#include "gssl/graph_builder.hpp"

#include "gssl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gssl {

void validate_subgraph_config(const SubgraphConfig& cfg) {
  if (cfg.labeled_per_class < 1)
    throw Error(ErrorKind::InvalidArgument, "labeled_per_class must be at least 1");
  if (cfg.test_edge_count < 1) throw Error(ErrorKind::InvalidArgument, "test_edge_count must be at least 1");
}

std::vector<EdgeProposal> propose_edges(const PairwiseDistances& dm,
                                        std::span<const std::size_t> members,
                                        std::span<const std::optional<int>> labels_by_index) {
  std::vector<EdgeProposal> out;
  if (members.size() < 2) return out;
  out.reserve(members.size() * 3);

  std::vector<std::size_t> others;
  others.reserve(members.size() - 1);
  for (std::size_t local = 0; local < members.size(); ++local) {
    const std::size_t node = members[local];
    others.clear();
    for (std::size_t other = 0; other < members.size(); ++other)
      if (other != local) others.push_back(members[other]);

    // neighbors come back as dataset indices; map them to member positions
    auto to_local = [&](std::size_t global) {
      return static_cast<std::size_t>(std::find(members.begin(), members.end(), global) - members.begin());
    };

    const auto& label = labels_by_index[node];
    std::optional<LabelFilter> filter;
    if (label) filter = LabelFilter{labels_by_index, *label};

    const bool has_peer =
        !filter || std::any_of(others.begin(), others.end(), [&](std::size_t o) {
          return labels_by_index[o] == label;
        });
    if (has_peer) {
      for (const std::size_t nb : query_neighbors(dm, node, others, NeighborMode::nearest(2), filter))
        out.push_back({local, to_local(nb), 1.0});
    }
    const auto far = query_neighbors(dm, node, others, NeighborMode::farthest());
    out.push_back({local, to_local(far.front()), -1.0});
  }
  return out;
}

SignedGraph assemble_graph(Matrix features, std::span<const EdgeProposal> proposals) {
  SignedGraph g(std::move(features));
  for (const auto& p : proposals) g.add_edge(p.from, p.to, p.weight);
  return g;
}

std::vector<std::size_t> sample_without_replacement(std::span<const std::size_t> from, std::size_t k,
                                                    Rng& rng) {
  if (k > from.size()) throw Error(ErrorKind::InvalidArgument, "sample larger than population");
  std::vector<std::size_t> pool(from.begin(), from.end());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

namespace {

Matrix gather_rows(const Matrix& features, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

SubgraphBatch make_batch(const FeatureDataset& ds, const PairwiseDistances& dm,
                         std::span<const std::size_t> members,
                         std::span<const std::optional<int>> labels_by_index,
                         std::span<const Provenance> provenance) {
  SubgraphBatch batch;
  const auto proposals = propose_edges(dm, members, labels_by_index);
  batch.graph = assemble_graph(gather_rows(ds.features, members), proposals);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& label = labels_by_index[members[i]];
    batch.global_index.emplace_back(members[i]);
    batch.labeled_mask.push_back(label.has_value());
    batch.labels.push_back(label);
    batch.provenance.push_back(provenance[i]);
  }
  return batch;
}

void check_distance_source(const FeatureDataset& ds, const PairwiseDistances& dm) {
  if (dm.size() != ds.size())
    throw Error(ErrorKind::ShapeMismatch, "distance matrix does not cover the dataset");
}

}  // namespace

SubgraphBatch build_training_subgraph(const FeatureDataset& ds, const PairwiseDistances& dm,
                                      const SubgraphConfig& cfg,
                                      std::span<const std::size_t> unlabeled_pool, Rng& rng) {
  validate_subgraph_config(cfg);
  check_distance_source(ds, dm);
  const auto by_class = ds.indices_by_class();
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].size() < cfg.labeled_per_class)
      throw Error(ErrorKind::InsufficientClassSamples,
                  "class has " + std::to_string(by_class[c].size()) + " labeled samples", c);

  std::vector<std::size_t> members;
  std::vector<Provenance> provenance;
  for (const auto& group : by_class) {
    for (const std::size_t i : sample_without_replacement(group, cfg.labeled_per_class, rng)) {
      members.push_back(i);
      provenance.push_back(Provenance::TrueLabel);
    }
  }
  const std::size_t m = std::min(cfg.unlabeled_count, unlabeled_pool.size());
  for (const std::size_t i : sample_without_replacement(unlabeled_pool, m, rng)) {
    if (ds.labels.at(i)) throw Error(ErrorKind::InvalidArgument, "unlabeled pool holds a labeled index", i);
    members.push_back(i);
    provenance.push_back(Provenance::Unlabeled);
  }
  if (members.empty()) throw Error(ErrorKind::EmptySubgraph, "no nodes selected");
  return make_batch(ds, dm, members, ds.labels, provenance);
}

SubgraphBatch build_full_training_graph(const FeatureDataset& ds, const PairwiseDistances& dm) {
  check_distance_source(ds, dm);
  if (ds.labeled_count() == 0) throw Error(ErrorKind::NoLabeledNodes, "full graph needs a labeled sample");
  std::vector<std::size_t> members(ds.size());
  std::iota(members.begin(), members.end(), 0);
  std::vector<Provenance> provenance;
  for (const auto& label : ds.labels)
    provenance.push_back(label ? Provenance::TrueLabel : Provenance::Unlabeled);
  return make_batch(ds, dm, members, ds.labels, provenance);
}

EpochPool::EpochPool(std::vector<std::size_t> indices, Rng& rng) : order_(std::move(indices)) {
  order_ = sample_without_replacement(order_, order_.size(), rng);
}

std::vector<std::size_t> EpochPool::next(std::size_t count) {
  const std::size_t take = std::min(count, remaining());
  std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                               order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + take));
  cursor_ += take;
  return out;
}

namespace {

double log_binomial(double a, double b) {
  return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

}  // namespace

double all_pseudo_probability(std::size_t n_true, std::size_t m_pseudo, std::size_t edges) {
  if (n_true < 1) throw Error(ErrorKind::InvalidArgument, "n_true must be at least 1");
  // C(m-1, T) vanishes once T exceeds m-1 (including m == 0)
  if (m_pseudo == 0 || edges > m_pseudo - 1) return 0.0;
  const double top = static_cast<double>(m_pseudo - 1);
  const double total = static_cast<double>(n_true + m_pseudo - 1);
  const double t = static_cast<double>(edges);
  return std::exp(log_binomial(top, t) - log_binomial(total, t));
}

std::size_t min_test_edges(std::size_t n_true, std::size_t m_pseudo, double p_target) {
  if (n_true < 1) throw Error(ErrorKind::InvalidArgument, "n_true must be at least 1");
  if (!(p_target > 0.0 && p_target < 1.0))
    throw Error(ErrorKind::InvalidArgument, "p_target must lie in (0, 1)");
  // T = m always succeeds since C(m-1, m) = 0
  const std::size_t limit = std::max<std::size_t>(1, m_pseudo);
  for (std::size_t t = 1; t < limit; ++t)
    if (1.0 - all_pseudo_probability(n_true, m_pseudo, t) >= p_target) return t;
  return limit;
}

namespace {

struct InferenceMembers {
  std::vector<std::size_t> members;
  std::vector<Provenance> provenance;
  std::vector<std::optional<int>> labels;  // true-or-pseudo, by dataset index
};

InferenceMembers select_inference_members(const FeatureDataset& ds, const PseudolabelStore& pseudo,
                                          const SubgraphConfig& cfg, Rng& rng) {
  InferenceMembers out;
  out.labels = ds.labels;
  const std::size_t classes = static_cast<std::size_t>(ds.class_count);
  std::vector<std::vector<std::size_t>> pseudo_by_class(classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i]) continue;
    if (i >= pseudo.by_index.size() || !pseudo.by_index[i])
      throw Error(ErrorKind::MissingPseudolabels, "unlabeled training sample has no pseudolabel", i);
    const int cls = pseudo.by_index[i]->cls;
    if (cls < 0 || static_cast<std::size_t>(cls) >= classes)
      throw Error(ErrorKind::LabelOutOfRange, "pseudolabel outside the class range", i);
    out.labels[i] = cls;
    pseudo_by_class[static_cast<std::size_t>(cls)].push_back(i);
  }

  const auto true_by_class = ds.indices_by_class();
  for (std::size_t c = 0; c < classes; ++c) {
    if (true_by_class[c].size() < cfg.labeled_per_class)
      throw Error(ErrorKind::ClassUnderflow,
                  "class has " + std::to_string(true_by_class[c].size()) + " true-labeled samples", c);
    for (const std::size_t i : sample_without_replacement(true_by_class[c], cfg.labeled_per_class, rng)) {
      out.members.push_back(i);
      out.provenance.push_back(Provenance::TrueLabel);
    }
  }

  // pseudolabeled part: round-robin over classes in random order, so class
  // counts differ by at most one while every class still has candidates
  for (auto& group : pseudo_by_class) group = sample_without_replacement(group, group.size(), rng);
  std::vector<std::size_t> class_order(classes);
  std::iota(class_order.begin(), class_order.end(), 0);
  class_order = sample_without_replacement(class_order, classes, rng);
  std::vector<std::size_t> taken(classes, 0);
  std::size_t picked = 0;
  bool progress = true;
  while (picked < cfg.unlabeled_count && progress) {
    progress = false;
    for (const std::size_t c : class_order) {
      if (picked == cfg.unlabeled_count) break;
      if (taken[c] == pseudo_by_class[c].size()) continue;
      out.members.push_back(pseudo_by_class[c][taken[c]++]);
      out.provenance.push_back(Provenance::PseudoLabel);
      ++picked;
      progress = true;
    }
  }
  return out;
}

}  // namespace

SubgraphBatch build_inference_subgraph(const FeatureDataset& ds, const PseudolabelStore& pseudo,
                                       const PairwiseDistances& dm, const SubgraphConfig& cfg,
                                       const Matrix& test_features,
                                       std::span<const std::uint64_t> test_seeds, Rng& rng) {
  validate_subgraph_config(cfg);
  check_distance_source(ds, dm);
  if (test_features.rows() < 1) throw Error(ErrorKind::InvalidArgument, "at least one test node required");
  if (static_cast<std::size_t>(test_features.cols()) != ds.dim())
    throw Error(ErrorKind::ShapeMismatch, "test feature width differs from training data");
  if (test_seeds.size() != static_cast<std::size_t>(test_features.rows()))
    throw Error(ErrorKind::ShapeMismatch, "one wiring seed per test node required");

  const auto sel = select_inference_members(ds, pseudo, cfg, rng);
  SubgraphBatch train_part = make_batch(ds, dm, sel.members, sel.labels, sel.provenance);

  const std::size_t n_train = sel.members.size();
  const std::size_t b = static_cast<std::size_t>(test_features.rows());
  Matrix features(static_cast<Eigen::Index>(n_train + b), test_features.cols());
  features.topRows(static_cast<Eigen::Index>(n_train)) = train_part.graph.node_features();
  features.bottomRows(static_cast<Eigen::Index>(b)) = test_features;

  SubgraphBatch batch;
  batch.graph = SignedGraph(std::move(features));
  for (const auto& e : train_part.graph.edges()) batch.graph.add_edge(e.i, e.j, e.weight);
  batch.global_index = std::move(train_part.global_index);
  batch.labeled_mask = std::move(train_part.labeled_mask);
  batch.labels = std::move(train_part.labels);
  batch.provenance = std::move(train_part.provenance);

  const std::size_t t = std::min(cfg.test_edge_count, n_train);
  std::vector<std::size_t> train_nodes(n_train);
  std::iota(train_nodes.begin(), train_nodes.end(), 0);
  for (std::size_t k = 0; k < b; ++k) {
    Rng wiring(test_seeds[k]);
    const std::size_t test_node = n_train + k;
    for (const std::size_t j : sample_without_replacement(train_nodes, t, wiring))
      batch.graph.add_edge(test_node, j, 1.0);
    batch.global_index.emplace_back(std::nullopt);
    batch.labeled_mask.push_back(false);
    batch.labels.emplace_back(std::nullopt);
    batch.provenance.push_back(Provenance::Test);
  }
  return batch;
}

SubgraphBatch build_inference_subgraph(const FeatureDataset& ds, const PseudolabelStore& pseudo,
                                       const PairwiseDistances& dm, const SubgraphConfig& cfg,
                                       const Matrix& test_features, Rng& rng) {
  if (test_features.rows() < 1) throw Error(ErrorKind::InvalidArgument, "at least one test node required");
  // member selection consumes the engine first; wiring seeds come after it
  Rng selection = rng;
  (void)select_inference_members(ds, pseudo, cfg, rng);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max<Eigen::Index>(test_features.rows(), 0)));
  for (auto& s : seeds) s = rng();
  return build_inference_subgraph(ds, pseudo, dm, cfg, test_features, seeds, selection);
}

}  // namespace gssl

namespace gssl {

std::size_t default_test_edges(const SubgraphConfig& cfg, int class_count, double p_target) {
  return min_test_edges(cfg.labeled_total(class_count), cfg.unlabeled_count, p_target);
}

}  // namespace gssl
