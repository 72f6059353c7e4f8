#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scnn/conv.hpp"
#include "scnn/lif.hpp"
#include "scnn/snn_conv.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

inline constexpr std::size_t kNumLayers = 6;

struct NetConfig {
  std::size_t in_channels = 3;
  std::size_t hidden_channels = 32;
  std::size_t kernel_size = 3;
  std::size_t snn_position = 1;  // 0..5
  LifParams lif;
  float surrogate_width = 0.5f;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] SpikeConfig spike_config() const;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

enum class LayerKind { conv_relu, spiking, conv_linear };

struct NetLayer {
  LayerKind kind = LayerKind::conv_relu;
  ConvLayerParams conv;

  friend bool operator==(const NetLayer&, const NetLayer&) = default;
};

/// Six same-padded convolutions. Layer 0 sees the corrupted image with the
/// mask appended as an extra channel; the layer at snn_position spikes;
/// the last layer (unless it is the spiking one) is linear so outputs can
/// cover the whole pixel range; every other layer is conv + ReLU.
struct Model {
  NetConfig config;
  std::vector<NetLayer> layers;

  [[nodiscard]] std::size_t parameter_count() const;
  friend bool operator==(const Model&, const Model&) = default;
};

/// corrupted (n, c, h, w) with holes zeroed; mask (n, 1, h, w), 1 = missing.
struct ModelInput {
  Tensor4 corrupted;
  Tensor4 mask;

  /// Shapes agree, mask is binary, and corrupted is zero under the mask.
  void validate() const;
};

[[nodiscard]] Model build_model(const NetConfig& config);

struct ForwardOptions {
  bool training = false;
  std::uint64_t seed = 0;
  SpikeMode spike_mode = SpikeMode::hard;
};

struct LayerCache {
  Tensor4 input;          // layer input
  Tensor4 pre_activation; // conv output (conv layers) or post-noise potential (spiking)
  Tensor4 noise;          // spiking layer only, empty when untouched
};

struct ForwardResult {
  Tensor4 prediction;
  std::vector<LayerCache> caches;
};

[[nodiscard]] ForwardResult forward(const Model& model, const ModelInput& input,
                                    const ForwardOptions& options = {});

/// Inference-mode prediction without caches.
[[nodiscard]] Tensor4 predict(const Model& model, const ModelInput& input);

struct LayerGrads {
  Tensor4 weight;
  std::vector<float> bias;
};

/// One entry per layer, shapes matching the layer parameters.
[[nodiscard]] std::vector<LayerGrads> backward(const Model& model, const ForwardResult& forward_result,
                                               const Tensor4& grad_pred);

}  // namespace scnn
