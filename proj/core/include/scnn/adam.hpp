#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scnn/tensor.hpp"

namespace scnn {

struct AdamHyper {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;

  void validate() const;
  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

/// Moment accumulators for one parameter tensor.
struct AdamState {
  std::vector<float> m;
  std::vector<float> v;
  std::int64_t t = 0;
  AdamHyper hyper;

  [[nodiscard]] static AdamState zeros(std::size_t size, AdamHyper hyper = {});
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update, in float arithmetic:
///
///   m <- b1*m + (1-b1)*g
///   v <- b2*v + (1-b2)*g*g
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
///
/// with t incremented before the bias corrections are formed.
void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state);
void adam_step(Tensor4& param, const Tensor4& grad, AdamState& state);

}  // namespace scnn
