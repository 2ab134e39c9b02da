#pragma once

#include "gssl/gcn_model.hpp"

#include <cstdint>

namespace gssl {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::uint64_t step = 0;
};

/// Zero moments shaped like `params`, t = 0.
AdamState make_adam(const ParameterSet& params, AdamConfig config = {});

/// One bias-corrected Adam update of every present tensor. Throws
/// NonFiniteGradient (leaving params and state untouched) on NaN/inf grads.
void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads);

}  // namespace gssl
