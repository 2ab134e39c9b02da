#include "gssl/metrics.hpp"

#include "gssl/error.hpp"
#include "gssl/inference.hpp"
#include "gssl/trainer.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace gssl {

double accuracy(std::span<const int> predictions, std::span<const int> truths, AccuracyMode mode) {
  if (predictions.empty() || predictions.size() != truths.size())
    throw Error(ErrorKind::EmptyInput, "accuracy needs equal, nonzero lengths");
  if (mode == AccuracyMode::Overall) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) correct += predictions[i] == truths[i];
    return static_cast<double>(correct) / static_cast<double>(truths.size());
  }
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // class -> (hits, total)
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto& [hits, total] = per_class[truths[i]];
    hits += predictions[i] == truths[i];
    ++total;
  }
  double sum = 0.0;
  for (const auto& [cls, counts] : per_class)
    sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  return sum / static_cast<double>(per_class.size());
}

AveragePrecision mean_average_precision(const Matrix& scores, std::span<const int> truths) {
  const auto n = static_cast<std::size_t>(scores.rows());
  if (n == 0 || truths.size() != n) throw Error(ErrorKind::EmptyInput, "one truth per score row required");
  AveragePrecision out;
  std::vector<std::size_t> order(n);
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(static_cast<Eigen::Index>(a), c) > scores(static_cast<Eigen::Index>(b), c);
    });
    std::size_t positives = 0;
    double sum = 0.0;
    for (std::size_t rank = 0; rank < n; ++rank) {
      if (truths[order[rank]] != c) continue;
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(rank + 1);
    }
    if (positives == 0)
      throw Error(ErrorKind::ClassWithoutPositives, "class has no positive sample", static_cast<std::size_t>(c));
    out.per_class.push_back(sum / static_cast<double>(positives));
  }
  out.mean = std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) /
             static_cast<double>(out.per_class.size());
  return out;
}

double mad(const Matrix& embeddings) {
  if (embeddings.rows() < 2) throw Error(ErrorKind::EmptyInput, "MAD needs at least two rows");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < embeddings.rows(); ++r)
    if (embeddings.row(r).squaredNorm() > 0.0) rows.push_back(r);
  if (rows.empty()) throw Error(ErrorKind::DegenerateEmbeddings, "every embedding row is zero");
  if (rows.size() < 2) return 0.0;

  const Vector norms = embeddings.rowwise().norm();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const double cos = embeddings.row(rows[a]).dot(embeddings.row(rows[b])) / (norms[rows[a]] * norms[rows[b]]);
      sum += 2.0 * (1.0 - cos);  // both orderings
      pairs += 2;
    }
  }
  return sum / static_cast<double>(pairs);
}

double silhouette(const Matrix& embeddings, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  if (n == 0 || labels.size() != n) throw Error(ErrorKind::EmptyInput, "one label per embedding row required");
  std::map<int, std::size_t> sizes;
  for (const int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw Error(ErrorKind::SingleClass, "silhouette needs at least two classes");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] == 1) continue;  // singleton scores 0
    std::map<int, double> dist_sum;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[labels[j]] +=
          (embeddings.row(static_cast<Eigen::Index>(i)) - embeddings.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = dist_sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [cls, sum] : dist_sum)
      if (cls != labels[i]) b = std::min(b, sum / static_cast<double>(sizes[cls]));
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

std::vector<double> mad_per_layer(const GcnModel& model, const FeatureDataset& ds,
                                  const PairwiseDistances& dm, const SubgraphConfig& sub_cfg,
                                  std::uint64_t seed) {
  Rng rng(seed);
  EpochPool pool(ds.unlabeled_indices(), rng);
  const std::size_t chunk_size = std::max<std::size_t>(1, sub_cfg.unlabeled_count);
  std::vector<double> sums(2, 0.0);
  std::size_t graphs = 0;
  do {
    const auto chunk = pool.next(chunk_size);
    const auto batch = build_training_subgraph(ds, dm, sub_cfg, chunk, rng);
    if (batch.node_count() < 2) continue;
    const auto trunk = forward_trunk(model, normalize_adjacency(batch.graph), batch.graph.node_features());
    // an all-zero layer has fully collapsed; count it as distance 0
    auto layer_mad = [](const Matrix& h) { return h.squaredNorm() > 0.0 ? mad(h) : 0.0; };
    sums[0] += layer_mad(trunk.h1);
    sums[1] += layer_mad(trunk.h2);
    ++graphs;
  } while (!pool.exhausted());
  if (graphs == 0) throw Error(ErrorKind::EmptySubgraph, "no subgraph with two or more nodes");
  for (auto& s : sums) s /= static_cast<double>(graphs);
  return sums;
}

std::vector<NoiseLevelResult> noise_robustness(const GcnModel& model, const FeatureDataset& ds,
                                               const PseudolabelStore& pseudo,
                                               const PairwiseDistances& dm,
                                               const SubgraphConfig& sub_cfg,
                                               const Matrix& test_features,
                                               std::span<const int> test_labels,
                                               std::span<const double> sigmas, std::uint64_t seed,
                                               std::size_t repeats) {
  auto run = [&](const Matrix& features) {
    Rng rng = derive_rng(seed, 11);
    const auto preds = predict_ensemble(model, ds, pseudo, dm, sub_cfg, features, repeats, rng);
    std::vector<int> classes;
    for (const auto& p : preds) classes.push_back(p.cls);
    return accuracy(classes, test_labels, AccuracyMode::Overall);
  };
  const double clean = run(test_features);
  std::vector<NoiseLevelResult> out;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const double sigma = sigmas[k];
    if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be nonnegative");
    Matrix noisy = test_features;
    if (sigma > 0.0) {
      Rng noise_rng = derive_rng(seed, 100 + k);
      std::normal_distribution<double> noise(0.0, sigma);
      for (Eigen::Index r = 0; r < noisy.rows(); ++r)
        for (Eigen::Index c = 0; c < noisy.cols(); ++c) noisy(r, c) += noise(noise_rng);
    }
    const double acc = sigma > 0.0 ? run(noisy) : clean;
    out.push_back({sigma, clean, acc, clean - acc});
  }
  return out;
}

}  // namespace gssl
