#include "scnn/snn_conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scnn/error.hpp"
#include "scnn/rng.hpp"

namespace scnn {

void SpikeConfig::validate() const {
  if (!(v_th > 0.0f) || !std::isfinite(v_th)) {
    throw ConfigError("spiking layer: threshold must be positive and finite");
  }
  if (!(noise_std >= 0.0f) || !std::isfinite(noise_std)) {
    throw ConfigError("spiking layer: noise std must be non-negative");
  }
  if (!(surrogate_width > 0.0f) || !std::isfinite(surrogate_width)) {
    throw ConfigError("spiking layer: surrogate width must be positive");
  }
}

SpikeConfig SnnConvLayer::spike_config() const {
  return {static_cast<float>(lif.v_th), static_cast<float>(lif.noise_std), surrogate_width};
}

void SnnConvLayer::validate() const {
  conv.validate();
  lif.validate();
  spike_config().validate();
}

float spike_fn(float u, float v_th) {
  if (u >= v_th) {
    return 1.0f;
  }
  if (u <= -v_th) {
    return -1.0f;
  }
  return 0.0f;
}

float surrogate_grad(float u, float v_th, float width) {
  return std::abs(std::abs(u) - v_th) < width ? 1.0f / (2.0f * width) : 0.0f;
}

// Antiderivative of surrogate_grad through the origin. When the two bands
// overlap (width > v_th) the slope stays 1/(2*width) across zero, so the ramp
// tops out below 1.
float smoothed_spike(float u, float v_th, float width) {
  const float lower = std::max(0.0f, v_th - width);
  const float ramp = std::clamp(std::abs(u) - lower, 0.0f, v_th + width - lower) / (2.0f * width);
  return u < 0.0f ? -ramp : ramp;
}

Tensor4 draw_noise(const Shape4& shape, float noise_std, std::uint64_t seed) {
  Tensor4 noise(shape);
  Rng rng(seed);
  for (float& x : noise.data()) {
    x = 1.0f + noise_std * static_cast<float>(rng.normal());
  }
  return noise;
}

SnnForwardResult snn_forward(const ConvLayerParams& conv, const SpikeConfig& spike, const Tensor4& input,
                             std::uint64_t seed, bool training, SpikeMode mode) {
  spike.validate();
  SnnForwardResult result;
  result.cache.input = input;
  result.cache.mode = mode;
  result.cache.potential = conv2d_forward(input, conv);

  if (training && spike.noise_std > 0.0f) {
    result.cache.noise = draw_noise(result.cache.potential.shape(), spike.noise_std, seed);
    auto u = result.cache.potential.data();
    auto noise = result.cache.noise.data();
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] *= noise[i];
    }
    result.cache.potential.require_finite("snn_forward potential");
  }

  result.spikes = Tensor4(result.cache.potential.shape());
  auto u = result.cache.potential.data();
  auto out = result.spikes.data();
  if (mode == SpikeMode::hard) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      out[i] = spike_fn(u[i], spike.v_th);
    }
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) {
      out[i] = smoothed_spike(u[i], spike.v_th, spike.surrogate_width);
    }
  }
  return result;
}

SnnForwardResult snn_forward(const SnnConvLayer& layer, const Tensor4& input, std::uint64_t seed, bool training,
                             SpikeMode mode) {
  layer.lif.validate();
  return snn_forward(layer.conv, layer.spike_config(), input, seed, training, mode);
}

Tensor4 spike_backward(const SpikeConfig& spike, const Tensor4& potential, const Tensor4& grad_out) {
  require_same_shape(grad_out.shape(), potential.shape(), "snn_backward grad_out");
  Tensor4 grad_u(grad_out.shape());
  auto u = potential.data();
  auto g = grad_out.data();
  auto dst = grad_u.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = g[i] * surrogate_grad(u[i], spike.v_th, spike.surrogate_width);
  }
  grad_u.require_finite("snn_backward surrogate gradient");
  return grad_u;
}

ConvGrads snn_backward(const ConvLayerParams& conv, const SpikeConfig& spike, const SnnCache& cache,
                       const Tensor4& grad_out) {
  spike.validate();
  Tensor4 grad_z = spike_backward(spike, cache.potential, grad_out);
  if (!cache.noise.empty()) {
    require_same_shape(cache.noise.shape(), grad_z.shape(), "snn_backward noise cache");
    auto dst = grad_z.data();
    auto noise = cache.noise.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] *= noise[i];
    }
  }
  return conv2d_backward(cache.input, conv, grad_z);
}

ConvGrads snn_backward(const SnnConvLayer& layer, const SnnCache& cache, const Tensor4& grad_out) {
  return snn_backward(layer.conv, layer.spike_config(), cache, grad_out);
}

}  // namespace scnn
