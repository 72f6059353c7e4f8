#pragma once

#include "scnn/tensor.hpp"

namespace scnn {

[[nodiscard]] Tensor4 relu(const Tensor4& input);

/// Passes grad_out where input > 0; the subgradient at exactly 0 is 0.
[[nodiscard]] Tensor4 relu_backward(const Tensor4& input, const Tensor4& grad_out);

struct LossResult {
  double loss = 0.0;
  Tensor4 grad;  // d loss / d pred
};

/// Mean over all elements of (pred - target)^2.
[[nodiscard]] LossResult mse_loss(const Tensor4& pred, const Tensor4& target);

/// Squared error averaged over the elements where mask == 1. mask is
/// (n, 1, h, w) and broadcasts over the channels of pred. A mask with no
/// ones yields loss 0 and a zero gradient.
[[nodiscard]] LossResult masked_mse_loss(const Tensor4& pred, const Tensor4& target,
                                         const Tensor4& mask);

}  // namespace scnn
