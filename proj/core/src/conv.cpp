#include "scnn/conv.hpp"

#include <algorithm>

#include "scnn/error.hpp"

namespace scnn {

namespace {

// Output columns ox whose input column ox*stride - pad + kx lies in [0, in_w).
struct ColumnRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

ColumnRange valid_columns(std::size_t out_w, std::size_t in_w, std::size_t stride, std::size_t pad,
                          std::size_t k) {
  // ix = ox*stride + k - pad >= 0  <=>  ox >= ceil((pad - k) / stride)
  std::size_t begin = 0;
  if (pad > k) {
    begin = (pad - k + stride - 1) / stride;
  }
  // ix < in_w  <=>  ox*stride < in_w + pad - k
  std::size_t end = 0;
  if (in_w + pad > k) {
    end = std::min(out_w, (in_w + pad - k + stride - 1) / stride);
  }
  return {begin, std::max(begin, end)};
}

}  // namespace

void ConvLayerParams::validate() const {
  const Shape4& ws = weight.shape();
  if (ws.size() == 0) {
    throw ShapeError("conv weight is empty: " + ws.to_string());
  }
  if (ws.h % 2 == 0 || ws.w % 2 == 0) {
    throw ConfigError("conv kernel dims must be odd, got " + std::to_string(ws.h) + "x" + std::to_string(ws.w));
  }
  if (bias.size() != ws.n) {
    throw ShapeError("conv bias has " + std::to_string(bias.size()) + " entries for " + std::to_string(ws.n) +
                     " output channels");
  }
  if (stride == 0) {
    throw ConfigError("conv stride must be positive");
  }
}

ConvLayerParams make_conv_params(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                                 std::size_t stride, std::size_t padding) {
  ConvLayerParams params;
  params.weight = Tensor4({out_channels, in_channels, kernel, kernel});
  params.bias.assign(out_channels, 0.0f);
  params.stride = stride;
  params.padding = padding;
  params.validate();
  return params;
}

Shape4 conv2d_output_shape(const Shape4& input, const ConvLayerParams& params) {
  params.validate();
  if (input.c != params.in_channels()) {
    throw ShapeError("conv2d: input has " + std::to_string(input.c) + " channels, kernel expects " +
                     std::to_string(params.in_channels()));
  }
  const std::size_t padded_h = input.h + 2 * params.padding;
  const std::size_t padded_w = input.w + 2 * params.padding;
  if (padded_h < params.kernel_h() || padded_w < params.kernel_w()) {
    throw ConfigError("conv2d: kernel " + params.weight.shape().to_string() + " larger than padded input " +
                      input.to_string());
  }
  if ((padded_h - params.kernel_h()) % params.stride != 0 || (padded_w - params.kernel_w()) % params.stride != 0) {
    throw ConfigError("conv2d: stride " + std::to_string(params.stride) +
                      " does not tile padded input " + input.to_string());
  }
  return {input.n, params.out_channels(), (padded_h - params.kernel_h()) / params.stride + 1,
          (padded_w - params.kernel_w()) / params.stride + 1};
}

Tensor4 conv2d_forward(const Tensor4& input, const ConvLayerParams& params) {
  const Shape4 out_shape = conv2d_output_shape(input.shape(), params);
  const Shape4& in = input.shape();
  const std::size_t kh = params.kernel_h();
  const std::size_t kw = params.kernel_w();
  const std::size_t stride = params.stride;
  const std::size_t pad = params.padding;

  Tensor4 out(out_shape);
  // One output plane accumulates in double and is rounded to float once.
  std::vector<double> acc(out_shape.plane());
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oc = 0; oc < out_shape.c; ++oc) {
      std::fill(acc.begin(), acc.end(), static_cast<double>(params.bias[oc]));
      for (std::size_t ic = 0; ic < in.c; ++ic) {
        std::span<const float> src = input.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const double weight = params.weight(oc, ic, ky, kx);
            const ColumnRange cols = valid_columns(out_shape.w, in.w, stride, pad, kx);
            for (std::size_t oy = 0; oy < out_shape.h; ++oy) {
              const std::size_t iy_shifted = oy * stride + ky;
              if (iy_shifted < pad || iy_shifted - pad >= in.h) {
                continue;
              }
              const float* src_row = src.data() + (iy_shifted - pad) * in.w + (cols.begin * stride + kx - pad);
              double* dst_row = acc.data() + oy * out_shape.w + cols.begin;
              const std::size_t count = cols.end - cols.begin;
              if (stride == 1) {
                for (std::size_t i = 0; i < count; ++i) {
                  dst_row[i] += weight * src_row[i];
                }
              } else {
                for (std::size_t i = 0; i < count; ++i) {
                  dst_row[i] += weight * src_row[i * stride];
                }
              }
            }
          }
        }
      }
      std::span<float> dst = out.plane(n, oc);
      std::transform(acc.begin(), acc.end(), dst.begin(), [](double v) { return static_cast<float>(v); });
    }
  }
  out.require_finite("conv2d_forward");
  return out;
}

ConvGrads conv2d_backward(const Tensor4& input, const ConvLayerParams& params, const Tensor4& grad_out) {
  const Shape4 out_shape = conv2d_output_shape(input.shape(), params);
  require_same_shape(grad_out.shape(), out_shape, "conv2d_backward grad_out");
  const Shape4& in = input.shape();
  const std::size_t kh = params.kernel_h();
  const std::size_t kw = params.kernel_w();
  const std::size_t stride = params.stride;
  const std::size_t pad = params.padding;

  ConvGrads grads{Tensor4(in), Tensor4(params.weight.shape()), std::vector<float>(out_shape.c, 0.0f)};

  for (std::size_t oc = 0; oc < out_shape.c; ++oc) {
    double sum = 0.0;
    for (std::size_t n = 0; n < in.n; ++n) {
      for (float g : grad_out.plane(n, oc)) {
        sum += g;
      }
    }
    grads.bias[oc] = static_cast<float>(sum);
  }

  // Weight gradient: correlation of grad_out with the input, accumulated in
  // double across rows and batch items.
  for (std::size_t oc = 0; oc < out_shape.c; ++oc) {
    for (std::size_t ic = 0; ic < in.c; ++ic) {
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const ColumnRange cols = valid_columns(out_shape.w, in.w, stride, pad, kx);
          double sum = 0.0;
          for (std::size_t n = 0; n < in.n; ++n) {
            std::span<const float> src = input.plane(n, ic);
            std::span<const float> g = grad_out.plane(n, oc);
            for (std::size_t oy = 0; oy < out_shape.h; ++oy) {
              const std::size_t iy_shifted = oy * stride + ky;
              if (iy_shifted < pad || iy_shifted - pad >= in.h) {
                continue;
              }
              const float* src_row = src.data() + (iy_shifted - pad) * in.w + (cols.begin * stride + kx - pad);
              const float* g_row = g.data() + oy * out_shape.w + cols.begin;
              const std::size_t count = cols.end - cols.begin;
              float row = 0.0f;
              for (std::size_t i = 0; i < count; ++i) {
                row += g_row[i] * src_row[i * stride];
              }
              sum += row;
            }
          }
          grads.weight(oc, ic, ky, kx) = static_cast<float>(sum);
        }
      }
    }
  }

  // Input gradient: scatter each grad_out element back through the kernel.
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t ic = 0; ic < in.c; ++ic) {
      std::span<float> dst = grads.input.plane(n, ic);
      for (std::size_t oc = 0; oc < out_shape.c; ++oc) {
        std::span<const float> g = grad_out.plane(n, oc);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const float weight = params.weight(oc, ic, ky, kx);
            const ColumnRange cols = valid_columns(out_shape.w, in.w, stride, pad, kx);
            for (std::size_t oy = 0; oy < out_shape.h; ++oy) {
              const std::size_t iy_shifted = oy * stride + ky;
              if (iy_shifted < pad || iy_shifted - pad >= in.h) {
                continue;
              }
              float* dst_row = dst.data() + (iy_shifted - pad) * in.w + (cols.begin * stride + kx - pad);
              const float* g_row = g.data() + oy * out_shape.w + cols.begin;
              const std::size_t count = cols.end - cols.begin;
              if (stride == 1) {
                for (std::size_t i = 0; i < count; ++i) {
                  dst_row[i] += weight * g_row[i];
                }
              } else {
                for (std::size_t i = 0; i < count; ++i) {
                  dst_row[i * stride] += weight * g_row[i];
                }
              }
            }
          }
        }
      }
    }
  }

  grads.input.require_finite("conv2d_backward input gradient");
  grads.weight.require_finite("conv2d_backward weight gradient");
  if (!all_finite(grads.bias)) {
    throw NumericError("conv2d_backward: non-finite bias gradient");
  }
  return grads;
}

}  // namespace scnn
