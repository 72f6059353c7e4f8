#pragma once

#include <cstddef>
#include <vector>

#include "scnn/tensor.hpp"

namespace scnn {

/// Learnable parameters of one 2-D convolution.
///
/// weight is (out_c, in_c, kh, kw); kernel dims must be odd so that
/// padding = (k - 1) / 2 with stride 1 preserves spatial size.
struct ConvLayerParams {
  Tensor4 weight;
  std::vector<float> bias;
  std::size_t stride = 1;
  std::size_t padding = 0;

  [[nodiscard]] std::size_t out_channels() const { return weight.shape().n; }
  [[nodiscard]] std::size_t in_channels() const { return weight.shape().c; }
  [[nodiscard]] std::size_t kernel_h() const { return weight.shape().h; }
  [[nodiscard]] std::size_t kernel_w() const { return weight.shape().w; }

  /// Throws ShapeError / ConfigError on inconsistent fields.
  void validate() const;

  friend bool operator==(const ConvLayerParams&, const ConvLayerParams&) = default;
};

/// Zero-initialized square-kernel parameters.
[[nodiscard]] ConvLayerParams make_conv_params(std::size_t out_channels, std::size_t in_channels,
                                               std::size_t kernel, std::size_t stride = 1,
                                               std::size_t padding = 0);

/// Output shape of conv2d_forward, or ConfigError when the window does not
/// tile the padded input into a positive integer number of positions.
[[nodiscard]] Shape4 conv2d_output_shape(const Shape4& input, const ConvLayerParams& params);

/// Cross-correlation (no kernel flip) plus per-channel bias, zero padding.
[[nodiscard]] Tensor4 conv2d_forward(const Tensor4& input, const ConvLayerParams& params);

struct ConvGrads {
  Tensor4 input;
  Tensor4 weight;
  std::vector<float> bias;
};

/// Exact gradients of conv2d_forward with respect to input, weight and bias.
[[nodiscard]] ConvGrads conv2d_backward(const Tensor4& input, const ConvLayerParams& params,
                                        const Tensor4& grad_out);

}  // namespace scnn
