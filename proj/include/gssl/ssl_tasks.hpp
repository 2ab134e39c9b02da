#pragma once

#include "gssl/gcn_model.hpp"
#include "gssl/graph.hpp"
#include "gssl/types.hpp"

#include <cstddef>
#include <vector>

namespace gssl {

/// A transformed copy of a subgraph's features plus what the pretext head
/// must recover from it. The graph structure itself is never altered.
struct SslInstance {
  SslTask task = SslTask::Denoise;
  Matrix transformed;  // fed through the shared trunk
  Matrix original;     // untouched subgraph features (denoise target)
  /// completion: zeroed rows; shuffle: rows taking part in the permutation.
  std::vector<std::size_t> selected_rows;
  /// shuffle only, aligned with selected_rows: 1 when the row content is unchanged.
  std::vector<double> unchanged;
  double mask_fraction = 0.0;
  double noise_variance = 0.0;
};

/// Adds i.i.d. N(0, variance) noise to every feature.
SslInstance make_denoise(const SubgraphBatch& g, double variance, Rng& rng);

/// Zeroes max(1, round(fraction * n)) uniformly chosen rows.
SslInstance make_completion(const SubgraphBatch& g, double fraction, Rng& rng);

/// Applies a uniform random permutation to max(2, round(fraction * n)) chosen
/// rows (capped at n).
SslInstance make_shuffle(const SubgraphBatch& g, double fraction, Rng& rng);

struct LossAndGrad {
  double value = 0.0;
  Matrix grad;  // dLoss / dPredictions, same shape as the predictions
};

/// denoise: ||P - Z||_F^2 / n over all rows; completion: the same over the
/// masked rows divided by their count; shuffle: mean logistic BCE over the
/// shuffled rows (predictions are logits).
double ssl_loss(SslTask task, const Matrix& predictions, const SslInstance& instance);
LossAndGrad ssl_loss_and_grad(SslTask task, const Matrix& predictions, const SslInstance& instance);

}  // namespace gssl
