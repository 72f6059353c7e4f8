#pragma once

#include <cstdint>

#include "scnn/conv.hpp"
#include "scnn/lif.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

/// How the spiking nonlinearity is evaluated in the forward pass.
enum class SpikeMode {
  /// Ternary {-1, 0, +1} spikes. The normal mode.
  hard,
  /// The antiderivative of the rectangular surrogate, a piecewise-linear
  /// ramp. Its derivative is exactly the surrogate used in backward, which
  /// makes finite-difference gradient checks meaningful.
  smoothed,
};

/// The subset of LIF constants the spiking conv layer consumes.
struct SpikeConfig {
  float v_th = 1.0f;
  float noise_std = 0.1f;
  float surrogate_width = 0.5f;

  void validate() const;
};

/// Convolution followed by multiplicative Gaussian noise (training only)
/// and a signed threshold spike.
struct SnnConvLayer {
  ConvLayerParams conv;
  LifParams lif;
  float surrogate_width = 0.5f;

  [[nodiscard]] SpikeConfig spike_config() const;
  void validate() const;
};

/// +1 if u >= v_th, -1 if u <= -v_th, else 0.
[[nodiscard]] float spike_fn(float u, float v_th);

/// Rectangular surrogate for d spike / d u: 1/(2w) inside the bands
/// ||u| - v_th| < w, 0 elsewhere.
[[nodiscard]] float surrogate_grad(float u, float v_th, float width);

/// sign(u) * clamp((|u| - (v_th - w)) / (2w), 0, 1).
[[nodiscard]] float smoothed_spike(float u, float v_th, float width);

/// Per-element noise multipliers 1 + std * N(0, 1), reproducible from
/// (seed, shape). Element i is the i-th draw of a generator seeded by seed.
[[nodiscard]] Tensor4 draw_noise(const Shape4& shape, float noise_std, std::uint64_t seed);

struct SnnCache {
  Tensor4 input;
  Tensor4 potential;  // conv output after noise, the argument of the spike
  Tensor4 noise;      // empty when no noise was applied
  SpikeMode mode = SpikeMode::hard;
};

struct SnnForwardResult {
  Tensor4 spikes;
  SnnCache cache;
};

[[nodiscard]] SnnForwardResult snn_forward(const ConvLayerParams& conv, const SpikeConfig& spike,
                                           const Tensor4& input, std::uint64_t seed, bool training,
                                           SpikeMode mode = SpikeMode::hard);
[[nodiscard]] SnnForwardResult snn_forward(const SnnConvLayer& layer, const Tensor4& input,
                                           std::uint64_t seed, bool training,
                                           SpikeMode mode = SpikeMode::hard);

/// Surrogate-gradient backward. The stored noise draw is treated as a
/// constant multiplier.
[[nodiscard]] ConvGrads snn_backward(const ConvLayerParams& conv, const SpikeConfig& spike,
                                     const SnnCache& cache, const Tensor4& grad_out);
[[nodiscard]] ConvGrads snn_backward(const SnnConvLayer& layer, const SnnCache& cache,
                                     const Tensor4& grad_out);

/// grad_out scaled elementwise by the surrogate at `potential`: the
/// gradient with respect to the post-noise potential.
[[nodiscard]] Tensor4 spike_backward(const SpikeConfig& spike, const Tensor4& potential,
                                     const Tensor4& grad_out);

}  // namespace scnn
