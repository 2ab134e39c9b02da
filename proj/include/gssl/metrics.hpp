#pragma once

#include "gssl/dataset.hpp"
#include "gssl/distance.hpp"
#include "gssl/gcn_model.hpp"
#include "gssl/graph.hpp"
#include "gssl/graph_builder.hpp"
#include "gssl/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gssl {

enum class AccuracyMode { Overall, Unweighted };

/// Overall: fraction correct. Unweighted: mean per-class recall over the
/// classes present in `truths`.
double accuracy(std::span<const int> predictions, std::span<const int> truths, AccuracyMode mode);

struct AveragePrecision {
  std::vector<double> per_class;
  double mean = 0.0;
};

/// One-vs-rest AP per class over an n x C score matrix: rank by descending
/// score (ties by index) and average precision at each positive's rank.
AveragePrecision mean_average_precision(const Matrix& scores, std::span<const int> truths);

/// Mean cosine distance over ordered pairs of distinct nonzero rows.
double mad(const Matrix& embeddings);

/// Mean silhouette with euclidean distances; samples alone in their class score 0.
double silhouette(const Matrix& embeddings, std::span<const int> labels);

struct MetricsReport {
  std::optional<double> accuracy_overall;
  std::optional<double> accuracy_unweighted;
  std::optional<AveragePrecision> average_precision;
  std::vector<double> mad_per_layer;
  std::optional<double> silhouette;
};

/// MAD of the first and second shared-layer activations averaged over the
/// training-style subgraphs of one pass through the unlabeled pool.
std::vector<double> mad_per_layer(const GcnModel& model, const FeatureDataset& ds,
                                  const PairwiseDistances& dm, const SubgraphConfig& sub_cfg,
                                  std::uint64_t seed);

struct NoiseLevelResult {
  double sigma = 0.0;
  double clean_accuracy = 0.0;
  double noisy_accuracy = 0.0;
  double drop = 0.0;  // clean minus noisy; positive means degradation
};

/// Adds i.i.d. N(0, sigma^2) noise to the test features only and re-runs
/// inference with the same wiring seed as the clean pass, averaging `repeats`
/// wirings per prediction.
std::vector<NoiseLevelResult> noise_robustness(const GcnModel& model, const FeatureDataset& ds,
                                               const PseudolabelStore& pseudo,
                                               const PairwiseDistances& dm,
                                               const SubgraphConfig& sub_cfg,
                                               const Matrix& test_features,
                                               std::span<const int> test_labels,
                                               std::span<const double> sigmas, std::uint64_t seed,
                                               std::size_t repeats = 1);

}  // namespace gssl
