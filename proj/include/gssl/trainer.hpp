#pragma once

#include "gssl/adam.hpp"
#include "gssl/dataset.hpp"
#include "gssl/distance.hpp"
#include "gssl/gcn_model.hpp"
#include "gssl/graph.hpp"
#include "gssl/graph_builder.hpp"
#include "gssl/ssl_tasks.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gssl {

/// Row-wise softmax, max-shifted.
Matrix softmax_rows(const Matrix& logits);

/// Mean over true-labeled nodes of -log softmax(logits)[label]. Throws NoLabeledNodes.
double ce_loss(const Matrix& logits, const SubgraphBatch& batch);
LossAndGrad ce_loss_and_grad(const Matrix& logits, const SubgraphBatch& batch);

/// Mean Shannon entropy of softmax(logits) over unlabeled nodes; 0 if there are none.
double entropy_loss(const Matrix& logits, const SubgraphBatch& batch);
LossAndGrad entropy_loss_and_grad(const Matrix& logits, const SubgraphBatch& batch);

enum class GraphMode { Subgraph, FullGraph };

struct TrainConfig {
  double entropy_weight = 0.01;  // lambda_1
  double ssl_weight = 0.1;       // lambda_2
  std::size_t epochs = 200;
  TaskSet tasks;
  std::size_t patience = 20;  // early stop on validation accuracy; 0 disables
  std::uint64_t seed = 0;
  double mask_fraction = 0.10;   // completion and shuffle
  double noise_variance = 0.1;   // denoise
  std::size_t hidden = 256;
  bool use_bias = false;
  AdamConfig adam;
  GraphMode graph_mode = GraphMode::Subgraph;
};

void validate_train_config(const TrainConfig& cfg);

struct LossTerms {
  double ce = 0.0;
  double entropy = 0.0;
  std::array<double, 3> ssl{};  // indexed by SslTask
  double total = 0.0;
};

/// ce + lambda_1 * entropy + lambda_2 * sum(ssl).
double compose_total(const LossTerms& terms, double entropy_weight, double ssl_weight);

struct Objective {
  LossTerms terms;
  ParameterSet grads;
};

/// Joint loss on one subgraph and its exact parameter gradients. The
/// classification branch sees the clean features; each SSL instance runs the
/// shared trunk on its own transformed features through its own head.
/// Terms with zero weight are reported but contribute no gradient.
Objective evaluate_objective(const GcnModel& model, const SubgraphBatch& batch,
                             std::span<const SslInstance> instances, double entropy_weight,
                             double ssl_weight);

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  LossTerms mean;
  std::optional<double> validation_accuracy;
};

struct TrainReport {
  std::vector<LossTerms> steps;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  PseudolabelStore pseudolabels;
  double wall_seconds = 0.0;
};

/// Labeled held-out samples used only for early stopping.
struct ValidationSet {
  Matrix features;
  std::vector<int> labels;
  std::size_t repeats = 1;  // random wirings averaged per prediction
};

struct TrainResult {
  GcnModel model;
  AdamState adam;
  TrainReport report;
};

/// Number of subgraphs drawn per epoch: ceil(|unlabeled| / M_s), at least 1.
std::size_t steps_per_epoch(const FeatureDataset& ds, const SubgraphConfig& sub_cfg);

/// Joint training with one Adam step per subgraph. Each epoch walks the
/// unlabeled pool without replacement. With a validation set and patience > 0
/// the best-validation parameters are restored at the end. Pseudolabels are
/// assigned once, after training.
TrainResult train(const FeatureDataset& ds, const PairwiseDistances& dm, const TrainConfig& cfg,
                  const SubgraphConfig& sub_cfg, const ValidationSet* validation = nullptr);

/// Classifies every unlabeled training sample on training-style subgraphs
/// that walk the unlabeled pool once; records argmax class and max softmax.
PseudolabelStore assign_pseudolabels(const GcnModel& model, const FeatureDataset& ds,
                                     const PairwiseDistances& dm, const SubgraphConfig& sub_cfg,
                                     std::uint64_t seed);

/// Independent engine for a named purpose, derived from a base seed.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace gssl
