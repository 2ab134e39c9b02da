#pragma once

#include "gssl/types.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gssl {

enum class SslTask { Denoise, Completion, Shuffle };

inline constexpr std::array<SslTask, 3> kAllSslTasks = {SslTask::Denoise, SslTask::Completion,
                                                        SslTask::Shuffle};

std::string_view to_string(SslTask task);

/// Subset of the pretext tasks. Parses "none", "all", or a comma list such as
/// "denoise,shuffle".
class TaskSet {
 public:
  TaskSet() = default;
  static TaskSet none() { return {}; }
  static TaskSet all();
  static TaskSet parse(std::string_view text);
  static TaskSet from_mask(unsigned mask);

  TaskSet& add(SslTask task);
  bool contains(SslTask task) const { return (mask_ >> static_cast<unsigned>(task)) & 1U; }
  bool empty() const { return mask_ == 0; }
  unsigned mask() const { return mask_; }
  std::vector<SslTask> tasks() const;
  std::string to_string() const;

  bool operator==(const TaskSet&) const = default;

 private:
  unsigned mask_ = 0;
};

/// Graph-conv layers in storage order. Shared1/Shared2 form the trunk, the rest
/// are heads on top of it.
enum class LayerId : std::size_t { Shared1, Shared2, Classify, Denoise, Completion, Shuffle };
inline constexpr std::size_t kLayerCount = 6;

std::string_view to_string(LayerId id);

struct Layer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out, or empty when biases are off

  bool present() const { return weight.size() > 0; }
};

struct ParameterSet {
  std::array<Layer, kLayerCount> layers;

  Layer& operator[](LayerId id) { return layers[static_cast<std::size_t>(id)]; }
  const Layer& operator[](LayerId id) const { return layers[static_cast<std::size_t>(id)]; }

  /// Same shapes, all zeros.
  ParameterSet zeros_like() const;
  std::size_t scalar_count() const;
  bool all_finite() const;
};

struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
  std::size_t hidden = 256;
  TaskSet tasks;
  bool use_bias = false;
};

struct GcnModel {
  ModelConfig config;
  ParameterSet params;
};

/// Uniform on [-sqrt(6 / (fan_in + fan_out)), +sqrt(6 / (fan_in + fan_out))].
Matrix init_xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Xavier weights (zero biases) for the trunk, the classifier, and one head
/// per enabled pretext task, initialised in LayerId order.
GcnModel make_model(const ModelConfig& config, Rng& rng);

/// Symmetric normalisation of A + I using absolute-value degrees, keeping the
/// edge signs: D^-1/2 (A + I) D^-1/2 with D_ii = sum_j |A_ij + I_ij|.
struct NormalizedAdjacency {
  Matrix values;
};

class SignedGraph;
NormalizedAdjacency normalize_adjacency(const SignedGraph& graph);
NormalizedAdjacency normalize_adjacency(const Matrix& signed_adjacency);

enum class Head { Classify, Denoise, Completion, Shuffle };

Head head_for(SslTask task);
LayerId layer_for(Head head);

/// Intermediate values retained for the backward pass.
struct TrunkPass {
  Matrix agg_input;   // A X
  Matrix pre1, h1;    // H1 = ReLU(A X W1)
  Matrix agg_h1;      // A H1
  Matrix pre2, h2;    // H2 = ReLU(A H1 W2)
  Matrix agg_h2;      // A H2
};

struct ForwardPass {
  Head head = Head::Classify;
  TrunkPass trunk;
  Matrix output;  // logits (n x C), reconstructions (n x D) or shuffle logits (n x 1)
};

TrunkPass forward_trunk(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x);
ForwardPass forward_pass(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x, Head head);

/// Output of `head` only; throws ShapeMismatch on inconsistent inputs.
Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x, Head head);

/// Reverse pass for one branch: accumulates dLoss/dParams into `grads` given
/// dLoss/dOutput for that branch's output.
void backward_pass(const GcnModel& model, const NormalizedAdjacency& adj, const ForwardPass& pass,
                   const Matrix& d_output, ParameterSet& grads);

}  // namespace gssl
