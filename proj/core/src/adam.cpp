#include "scnn/adam.hpp"

#include <cmath>
#include <string>

#include "scnn/error.hpp"

namespace scnn {

void AdamHyper::validate() const {
  if (!(lr > 0.0f) || !std::isfinite(lr)) {
    throw ConfigError("adam: learning rate must be positive, got " + std::to_string(lr));
  }
  if (!(beta1 >= 0.0f && beta1 < 1.0f) || !(beta2 >= 0.0f && beta2 < 1.0f)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0f)) {
    throw ConfigError("adam: epsilon must be positive");
  }
}

AdamState AdamState::zeros(std::size_t size, AdamHyper hyper) {
  AdamState state;
  state.m.assign(size, 0.0f);
  state.v.assign(size, 0.0f);
  state.hyper = hyper;
  return state;
}

void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state) {
  if (grad.size() != param.size() || state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ShapeError("adam_step: parameter has " + std::to_string(param.size()) + " elements, gradient " +
                     std::to_string(grad.size()) + ", moments " + std::to_string(state.m.size()) + "/" +
                     std::to_string(state.v.size()));
  }
  if (state.t < 0) {
    throw ConfigError("adam_step: negative step counter");
  }
  const AdamHyper& h = state.hyper;
  state.t += 1;
  const float t = static_cast<float>(state.t);
  const float correction1 = 1.0f - std::pow(h.beta1, t);
  const float correction2 = 1.0f - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const float g = grad[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0f - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0f - h.beta2) * g * g;
    const float m_hat = state.m[i] / correction1;
    const float v_hat = state.v[i] / correction2;
    param[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
  if (!all_finite(param)) {
    throw NumericError("adam_step: parameter became non-finite");
  }
}

void adam_step(Tensor4& param, const Tensor4& grad, AdamState& state) {
  require_same_shape(grad.shape(), param.shape(), "adam_step");
  adam_step(param.data(), grad.data(), state);
}

}  // namespace scnn
