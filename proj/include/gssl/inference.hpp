#pragma once

#include "gssl/dataset.hpp"
#include "gssl/distance.hpp"
#include "gssl/gcn_model.hpp"
#include "gssl/graph.hpp"
#include "gssl/graph_builder.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gssl {

struct Prediction {
  std::string id;
  int cls = 0;
  std::vector<double> probabilities;
  std::uint64_t seed = 0;  // seed of the inference subgraph that produced it
};

struct InferenceOptions {
  /// Test nodes sharing one inference subgraph. 1 gives every test node its own.
  std::size_t batch_size = 1;
};

struct InferenceOutput {
  std::vector<Prediction> predictions;
  Matrix embeddings;  // last shared-layer activations of the test nodes
};

/// Wires test rows into inference subgraphs and runs the classification
/// branch. Never reads distances involving test rows and never mutates inputs.
/// `ids` may be empty, in which case test ids are the row numbers.
InferenceOutput run_inference(const GcnModel& model, const FeatureDataset& ds,
                              const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                              const SubgraphConfig& sub_cfg, const Matrix& test_features, Rng& rng,
                              std::span<const std::string> ids = {}, InferenceOptions options = {});

std::vector<Prediction> predict(const GcnModel& model, const FeatureDataset& ds,
                                const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                                const SubgraphConfig& sub_cfg, const Matrix& test_features, Rng& rng,
                                std::span<const std::string> ids = {}, InferenceOptions options = {});

/// Averages softmax vectors over `repeats` independently seeded wirings.
std::vector<Prediction> predict_ensemble(const GcnModel& model, const FeatureDataset& ds,
                                         const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                                         const SubgraphConfig& sub_cfg, const Matrix& test_features,
                                         std::size_t repeats, Rng& rng,
                                         std::span<const std::string> ids = {},
                                         InferenceOptions options = {});

}  // namespace gssl
