#include "gssl/adam.hpp"

#include "gssl/error.hpp"

#include <cmath>

namespace gssl {

AdamState make_adam(const ParameterSet& params, AdamConfig config) {
  return AdamState{config, params.zeros_like(), params.zeros_like(), 0};
}

namespace {

void update(Matrix& param, Matrix& m, Matrix& v, const Matrix& g, const AdamConfig& c, double bias1,
            double bias2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  param.array() -= c.learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.eps);
}

bool same_shape(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

}  // namespace

void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads) {
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    const auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    if (!same_shape(p.weight, g.weight) || !same_shape(p.bias, g.bias) ||
        !same_shape(p.weight, state.first_moment.layers[i].weight))
      throw Error(ErrorKind::ShapeMismatch, "gradient shape differs from parameter shape");
  }
  if (!grads.all_finite()) throw Error(ErrorKind::NonFiniteGradient, "gradient contains NaN or infinity");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.config.beta1, t);
  const double bias2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    auto& p = params.layers[i];
    if (!p.present()) continue;
    auto& m = state.first_moment.layers[i];
    auto& v = state.second_moment.layers[i];
    update(p.weight, m.weight, v.weight, grads.layers[i].weight, state.config, bias1, bias2);
    if (p.bias.size() > 0) update(p.bias, m.bias, v.bias, grads.layers[i].bias, state.config, bias1, bias2);
  }
}

}  // namespace gssl
