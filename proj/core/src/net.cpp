#include "scnn/net.hpp"

#include <cmath>
#include <string>

#include "scnn/activation.hpp"
#include "scnn/error.hpp"
#include "scnn/rng.hpp"

namespace scnn {

void NetConfig::validate() const {
  if (in_channels == 0) {
    throw ConfigError("net: in_channels must be at least 1");
  }
  if (hidden_channels == 0) {
    throw ConfigError("net: hidden_channels must be at least 1");
  }
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ConfigError("net: kernel_size must be odd, got " + std::to_string(kernel_size));
  }
  if (snn_position >= kNumLayers) {
    throw ConfigError("net: snn_position must be in 0..5, got " + std::to_string(snn_position));
  }
  lif.validate();
  spike_config().validate();
}

SpikeConfig NetConfig::spike_config() const {
  return {static_cast<float>(lif.v_th), static_cast<float>(lif.noise_std), surrogate_width};
}

std::size_t Model::parameter_count() const {
  std::size_t count = 0;
  for (const NetLayer& layer : layers) {
    count += layer.conv.weight.size() + layer.conv.bias.size();
  }
  return count;
}

void ModelInput::validate() const {
  const Shape4& s = corrupted.shape();
  require_same_shape(mask.shape(), {s.n, 1, s.h, s.w}, "model input mask");
  for (std::size_t n = 0; n < s.n; ++n) {
    std::span<const float> m = mask.plane(n, 0);
    for (float value : m) {
      if (value != 0.0f && value != 1.0f) {
        throw ConfigError("model input: mask values must be 0 or 1");
      }
    }
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<const float> pixels = corrupted.plane(n, c);
      for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (m[i] == 1.0f && pixels[i] != 0.0f) {
          throw ConfigError("model input: corrupted image is non-zero inside the mask");
        }
      }
    }
  }
}

Model build_model(const NetConfig& config) {
  config.validate();
  Model model;
  model.config = config;
  const std::size_t k = config.kernel_size;
  const std::size_t pad = (k - 1) / 2;
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    const std::size_t in_c = i == 0 ? config.in_channels + 1 : config.hidden_channels;
    const std::size_t out_c = i + 1 == kNumLayers ? config.in_channels : config.hidden_channels;
    NetLayer layer;
    if (i == config.snn_position) {
      layer.kind = LayerKind::spiking;
    } else if (i + 1 == kNumLayers) {
      layer.kind = LayerKind::conv_linear;
    } else {
      layer.kind = LayerKind::conv_relu;
    }
    layer.conv = make_conv_params(out_c, in_c, k, 1, pad);

    // He initialization: N(0, 2 / fan_in).
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_c * k * k));
    Rng rng(derive_seed(derive_seed(config.seed, "init"), i));
    for (float& w : layer.conv.weight.data()) {
      w = static_cast<float>(stddev * rng.normal());
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

ForwardResult forward(const Model& model, const ModelInput& input, const ForwardOptions& options) {
  if (model.layers.size() != kNumLayers) {
    throw ConfigError("forward: model has " + std::to_string(model.layers.size()) + " layers");
  }
  input.validate();
  if (input.corrupted.shape().c != model.config.in_channels) {
    throw ShapeError("forward: image has " + std::to_string(input.corrupted.shape().c) +
                     " channels, model expects " + std::to_string(model.config.in_channels));
  }
  const SpikeConfig spike = model.config.spike_config();

  ForwardResult result;
  result.caches.resize(model.layers.size());
  Tensor4 x = concat_channels(input.corrupted, input.mask);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const NetLayer& layer = model.layers[i];
    LayerCache& cache = result.caches[i];
    switch (layer.kind) {
      case LayerKind::spiking: {
        SnnForwardResult out = snn_forward(layer.conv, spike, x, derive_seed(options.seed, i), options.training,
                                           options.spike_mode);
        cache.input = std::move(out.cache.input);
        cache.pre_activation = std::move(out.cache.potential);
        cache.noise = std::move(out.cache.noise);
        x = std::move(out.spikes);
        break;
      }
      case LayerKind::conv_relu: {
        cache.input = std::move(x);
        cache.pre_activation = conv2d_forward(cache.input, layer.conv);
        x = relu(cache.pre_activation);
        break;
      }
      case LayerKind::conv_linear: {
        cache.input = std::move(x);
        x = conv2d_forward(cache.input, layer.conv);
        break;
      }
    }
  }
  result.prediction = std::move(x);
  result.prediction.require_finite("forward prediction");
  return result;
}

Tensor4 predict(const Model& model, const ModelInput& input) { return forward(model, input).prediction; }

std::vector<LayerGrads> backward(const Model& model, const ForwardResult& forward_result, const Tensor4& grad_pred) {
  if (forward_result.caches.size() != model.layers.size()) {
    throw ShapeError("backward: " + std::to_string(forward_result.caches.size()) + " caches for " +
                     std::to_string(model.layers.size()) + " layers");
  }
  require_same_shape(grad_pred.shape(), forward_result.prediction.shape(), "backward grad_pred");
  const SpikeConfig spike = model.config.spike_config();

  std::vector<LayerGrads> grads(model.layers.size());
  Tensor4 g = grad_pred;
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    const NetLayer& layer = model.layers[i];
    const LayerCache& cache = forward_result.caches[i];
    Tensor4 grad_z;
    switch (layer.kind) {
      case LayerKind::spiking: {
        grad_z = spike_backward(spike, cache.pre_activation, g);
        if (!cache.noise.empty()) {
          require_same_shape(cache.noise.shape(), grad_z.shape(), "backward noise cache");
          auto dst = grad_z.data();
          auto noise = cache.noise.data();
          for (std::size_t j = 0; j < dst.size(); ++j) {
            dst[j] *= noise[j];
          }
        }
        break;
      }
      case LayerKind::conv_relu:
        grad_z = relu_backward(cache.pre_activation, g);
        break;
      case LayerKind::conv_linear:
        grad_z = std::move(g);
        break;
    }
    ConvGrads layer_grads = conv2d_backward(cache.input, layer.conv, grad_z);
    grads[i].weight = std::move(layer_grads.weight);
    grads[i].bias = std::move(layer_grads.bias);
    g = std::move(layer_grads.input);
  }
  return grads;
}

}  // namespace scnn
