#include "gssl/inference.hpp"

#include "gssl/error.hpp"
#include "gssl/trainer.hpp"

#include <algorithm>

namespace gssl {

InferenceOutput run_inference(const GcnModel& model, const FeatureDataset& ds,
                              const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                              const SubgraphConfig& sub_cfg, const Matrix& test_features, Rng& rng,
                              std::span<const std::string> ids, InferenceOptions options) {
  if (ds.class_count < 2) throw Error(ErrorKind::InvalidClassCount, "inference needs at least two classes");
  if (static_cast<std::size_t>(ds.class_count) != model.config.class_count)
    throw Error(ErrorKind::ShapeMismatch, "model class count differs from dataset");
  if (!ids.empty() && ids.size() != static_cast<std::size_t>(test_features.rows()))
    throw Error(ErrorKind::ShapeMismatch, "one id per test row required");
  if (options.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be at least 1");

  const auto total = static_cast<std::size_t>(test_features.rows());
  InferenceOutput out;
  out.embeddings.resize(test_features.rows(), static_cast<Eigen::Index>(model.config.hidden));
  for (std::size_t start = 0; start < total; start += options.batch_size) {
    const std::size_t count = std::min(options.batch_size, total - start);
    const Matrix chunk = test_features.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count));
    const std::uint64_t seed = rng();
    Rng sub_rng(seed);
    const auto batch = build_inference_subgraph(ds, pseudo, dm, sub_cfg, chunk, sub_rng);
    const auto adj = normalize_adjacency(batch.graph);
    const auto pass = forward_pass(model, adj, batch.graph.node_features(), Head::Classify);
    const Matrix probs = softmax_rows(pass.output);

    const auto first_test = static_cast<Eigen::Index>(batch.node_count() - count);
    for (std::size_t k = 0; k < count; ++k) {
      const auto row = first_test + static_cast<Eigen::Index>(k);
      Prediction p;
      p.id = ids.empty() ? std::to_string(start + k) : ids[start + k];
      p.probabilities.assign(probs.row(row).data(), probs.row(row).data() + probs.cols());
      p.cls = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                               p.probabilities.begin());
      p.seed = seed;
      out.predictions.push_back(std::move(p));
      out.embeddings.row(static_cast<Eigen::Index>(start + k)) = pass.trunk.h2.row(row);
    }
  }
  return out;
}

std::vector<Prediction> predict(const GcnModel& model, const FeatureDataset& ds,
                                const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                                const SubgraphConfig& sub_cfg, const Matrix& test_features, Rng& rng,
                                std::span<const std::string> ids, InferenceOptions options) {
  return run_inference(model, ds, pseudo, dm, sub_cfg, test_features, rng, ids, options).predictions;
}

std::vector<Prediction> predict_ensemble(const GcnModel& model, const FeatureDataset& ds,
                                         const PseudolabelStore& pseudo, const PairwiseDistances& dm,
                                         const SubgraphConfig& sub_cfg, const Matrix& test_features,
                                         std::size_t repeats, Rng& rng, std::span<const std::string> ids,
                                         InferenceOptions options) {
  if (repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be at least 1");
  auto result = predict(model, ds, pseudo, dm, sub_cfg, test_features, rng, ids, options);
  if (repeats == 1) return result;
  for (std::size_t r = 1; r < repeats; ++r) {
    const auto more = predict(model, ds, pseudo, dm, sub_cfg, test_features, rng, ids, options);
    for (std::size_t i = 0; i < result.size(); ++i)
      for (std::size_t c = 0; c < result[i].probabilities.size(); ++c)
        result[i].probabilities[c] += more[i].probabilities[c];
  }
  for (auto& p : result) {
    for (auto& v : p.probabilities) v /= static_cast<double>(repeats);
    p.cls = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                             p.probabilities.begin());
  }
  return result;
}

}  // namespace gssl
