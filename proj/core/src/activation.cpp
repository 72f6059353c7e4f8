#include "scnn/activation.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/error.hpp"

namespace scnn {

Tensor4 relu(const Tensor4& input) {
  Tensor4 out(input.shape());
  std::transform(input.data().begin(), input.data().end(), out.data().begin(),
                 [](float x) { return x > 0.0f ? x : 0.0f; });
  out.require_finite("relu");
  return out;
}

Tensor4 relu_backward(const Tensor4& input, const Tensor4& grad_out) {
  require_same_shape(grad_out.shape(), input.shape(), "relu_backward");
  Tensor4 out(input.shape());
  auto x = input.data();
  auto g = grad_out.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = x[i] > 0.0f ? g[i] : 0.0f;
  }
  out.require_finite("relu_backward");
  return out;
}

LossResult mse_loss(const Tensor4& pred, const Tensor4& target) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  const std::size_t count = pred.size();
  if (count == 0) {
    throw ShapeError("mse_loss: empty tensors");
  }
  LossResult result{0.0, Tensor4(pred.shape())};
  auto p = pred.data();
  auto t = target.data();
  auto g = result.grad.data();
  const float scale = 2.0f / static_cast<float>(count);
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const float diff = p[i] - t[i];
    sum += static_cast<double>(diff) * static_cast<double>(diff);
    g[i] = scale * diff;
  }
  result.loss = sum / static_cast<double>(count);
  if (!std::isfinite(result.loss)) {
    throw NumericError("mse_loss: non-finite loss");
  }
  result.grad.require_finite("mse_loss gradient");
  return result;
}

LossResult masked_mse_loss(const Tensor4& pred, const Tensor4& target, const Tensor4& mask) {
  require_same_shape(pred.shape(), target.shape(), "masked_mse_loss");
  const Shape4& s = pred.shape();
  require_same_shape(mask.shape(), {s.n, 1, s.h, s.w}, "masked_mse_loss mask");

  std::size_t count = 0;
  for (float m : mask.data()) {
    if (m != 0.0f) {
      ++count;
    }
  }
  count *= s.c;

  LossResult result{0.0, Tensor4(s)};
  if (count == 0) {
    return result;
  }
  const float scale = 2.0f / static_cast<float>(count);
  double sum = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    std::span<const float> m = mask.plane(n, 0);
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<const float> p = pred.plane(n, c);
      std::span<const float> t = target.plane(n, c);
      std::span<float> g = result.grad.plane(n, c);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0.0f) {
          continue;
        }
        const float diff = p[i] - t[i];
        sum += static_cast<double>(diff) * static_cast<double>(diff);
        g[i] = scale * diff;
      }
    }
  }
  result.loss = sum / static_cast<double>(count);
  if (!std::isfinite(result.loss)) {
    throw NumericError("masked_mse_loss: non-finite loss");
  }
  result.grad.require_finite("masked_mse_loss gradient");
  return result;
}

}  // namespace scnn
