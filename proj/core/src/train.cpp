#include "scnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "scnn/activation.hpp"
#include "scnn/checkpoint.hpp"
#include "scnn/error.hpp"
#include "scnn/file_util.hpp"
#include "scnn/image_io.hpp"
#include "scnn/rng.hpp"

namespace scnn {

std::string_view loss_target_name(LossTarget target) {
  return target == LossTarget::full_image ? "full_image" : "masked_region";
}

LossTarget parse_loss_target(std::string_view name) {
  if (name == "full_image") {
    return LossTarget::full_image;
  }
  if (name == "masked_region") {
    return LossTarget::masked_region;
  }
  throw ConfigError("unknown loss target '" + std::string(name) + "' (expected full_image or masked_region)");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0f) || !std::isfinite(lr)) {
    throw ConfigError("train: lr must be positive");
  }
  if (batch_size < 1) {
    throw ConfigError("train: batch_size must be at least 1");
  }
  if (epochs < 1) {
    throw ConfigError("train: epochs must be at least 1");
  }
}

MaskSpec validation_mask_spec(const MaskSpec& spec) {
  MaskSpec out = spec;
  out.seed = derive_seed(spec.seed, "val");
  return out;
}

MaskSpec training_mask_spec(const MaskSpec& spec) {
  MaskSpec out = spec;
  out.seed = derive_seed(spec.seed, "train");
  return out;
}

namespace {

void require_uniform_shapes(std::span<const Tensor4> images, std::string_view what) {
  if (images.empty()) {
    throw ConfigError(std::string(what) + ": no images");
  }
  for (const Tensor4& image : images) {
    if (image.shape().n != 1) {
      throw ShapeError(std::string(what) + ": expected single images, got " + image.shape().to_string());
    }
    require_same_shape(image.shape(), images.front().shape(), what);
  }
}

struct Batch {
  ModelInput input;
  Tensor4 target;
};

Batch assemble(std::span<const Sample> samples) {
  std::vector<Tensor4> corrupted;
  std::vector<Tensor4> masks;
  std::vector<Tensor4> targets;
  for (const Sample& s : samples) {
    corrupted.push_back(s.corrupted);
    masks.push_back(s.mask);
    targets.push_back(s.ground_truth);
  }
  return {{stack_batch(corrupted), stack_batch(masks)}, stack_batch(targets)};
}

std::vector<AdamState> fresh_optimizer(const Model& model, float lr) {
  AdamHyper hyper;
  hyper.lr = lr;
  hyper.validate();
  std::vector<AdamState> states;
  for (const NetLayer& layer : model.layers) {
    states.push_back(AdamState::zeros(layer.conv.weight.size(), hyper));
    states.push_back(AdamState::zeros(layer.conv.bias.size(), hyper));
  }
  return states;
}

}  // namespace

TrainResult train(Model model, std::span<const Tensor4> train_images, std::span<const Tensor4> val_images,
                  const MaskSpec& mask_spec, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  mask_spec.validate();
  model.config.validate();
  require_uniform_shapes(train_images, "train split");
  require_uniform_shapes(val_images, "validation split");

  TrainResult result;
  result.optimizer = fresh_optimizer(model, config.lr);
  const MaskSpec train_spec = training_mask_spec(mask_spec);
  const MaskSpec val_spec = validation_mask_spec(mask_spec);
  const std::uint64_t noise_seed = derive_seed(config.seed, "noise");
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));

  if (!config.checkpoint_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.checkpoint_dir, ec);
    if (ec) {
      throw IoError("cannot create checkpoint directory " + config.checkpoint_dir.string() + ": " + ec.message());
    }
  }

  const std::size_t count = train_images.size();
  std::vector<std::size_t> order(count);
  std::size_t step = 0;
  std::size_t samples_seen = 0;
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = count; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }

    double loss_sum = 0.0;
    for (std::size_t begin = 0, batch_index = 0; begin < count; begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(count, begin + config.batch_size);
      std::vector<Sample> samples;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t image = order[k];
        const std::uint64_t mask_index = config.resample_masks ? (epoch - 1) * count + image : image;
        samples.push_back(make_sample(train_images[image], train_spec, mask_index));
      }
      const Batch batch = assemble(samples);

      try {
        ForwardOptions options;
        options.training = true;
        options.seed = derive_seed(noise_seed, step);
        const ForwardResult fwd = forward(model, batch.input, options);
        const LossResult loss = config.loss_on == LossTarget::full_image
                                    ? mse_loss(fwd.prediction, batch.target)
                                    : masked_mse_loss(fwd.prediction, batch.target, batch.input.mask);
        const std::vector<LayerGrads> grads = backward(model, fwd, loss.grad);
        for (std::size_t i = 0; i < model.layers.size(); ++i) {
          ConvLayerParams& conv = model.layers[i].conv;
          adam_step(conv.weight, grads[i].weight, result.optimizer[2 * i]);
          adam_step(conv.bias, grads[i].bias, result.optimizer[2 * i + 1]);
        }
        loss_sum += loss.loss * static_cast<double>(end - begin);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      ++step;
    }
    samples_seen += count;

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = static_cast<float>(loss_sum / static_cast<double>(count));
    metrics.val_loss = static_cast<float>(evaluate(model, val_images, val_spec));
    metrics.samples = samples_seen;
    if (config.record_wall_time) {
      metrics.seconds = std::chrono::duration<float>(std::chrono::steady_clock::now() - start).count();
    }
    result.history.push_back(metrics);

    if (metrics.val_loss < best_val) {
      best_val = metrics.val_loss;
      if (!config.checkpoint_dir.empty()) {
        save_checkpoint(Checkpoint{model, {}, {static_cast<std::int64_t>(epoch), best_val}},
                        config.checkpoint_dir / kBestCheckpointName);
      }
    }
    if (on_epoch) {
      on_epoch(metrics);
    }
  }

  if (!config.checkpoint_dir.empty()) {
    save_checkpoint(Checkpoint{model, result.optimizer, {static_cast<std::int64_t>(config.epochs), best_val}},
                    config.checkpoint_dir / kLastCheckpointName);
  }
  if (!config.metrics_path.empty()) {
    write_metrics(result.history, config.metrics_path);
  }
  result.model = std::move(model);
  return result;
}

std::vector<Tensor4> load_split(const DatasetManifest& manifest, Split split) {
  std::vector<Tensor4> images;
  for (const auto& path : manifest.paths(split)) {
    images.push_back(load_image(path, manifest.resolution));
  }
  return images;
}

TrainResult train(Model model, const DatasetManifest& manifest, const MaskSpec& mask_spec, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  const std::vector<Tensor4> train_images = load_split(manifest, Split::train);
  const std::vector<Tensor4> val_images = load_split(manifest, Split::val);
  if (train_images.empty() || val_images.empty()) {
    throw ConfigError("manifest must list images in both the train and val splits");
  }
  return train(std::move(model), train_images, val_images, mask_spec, config, on_epoch);
}

double evaluate(const Predictor& predictor, std::span<const Tensor4> images, const MaskSpec& mask_spec) {
  require_uniform_shapes(images, "evaluate");
  double sum = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Sample sample = make_sample(images[i], mask_spec, i);
    const Tensor4 prediction = predictor(ModelInput{sample.corrupted, sample.mask});
    sum += mse_loss(prediction, sample.ground_truth).loss;
  }
  return sum / static_cast<double>(images.size());
}

double evaluate(const Model& model, std::span<const Tensor4> images, const MaskSpec& mask_spec) {
  return evaluate([&model](const ModelInput& input) { return predict(model, input); }, images, mask_spec);
}

Tensor4 composite(const Tensor4& prediction, const Tensor4& corrupted, const Tensor4& mask) {
  require_same_shape(prediction.shape(), corrupted.shape(), "composite");
  const Shape4& s = corrupted.shape();
  require_same_shape(mask.shape(), {s.n, 1, s.h, s.w}, "composite mask");
  Tensor4 out = corrupted;
  for (std::size_t n = 0; n < s.n; ++n) {
    std::span<const float> m = mask.plane(n, 0);
    for (float value : m) {
      if (value != 0.0f && value != 1.0f) {
        throw ConfigError("composite: mask values must be 0 or 1");
      }
    }
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<const float> pred = prediction.plane(n, c);
      std::span<float> dst = out.plane(n, c);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        if (m[i] == 1.0f) {
          dst[i] = std::clamp(pred[i], 0.0f, 1.0f);
        }
      }
    }
  }
  return out;
}

Tensor4 inpaint(const Model& model, const Tensor4& corrupted, const Tensor4& mask) {
  const Shape4& s = corrupted.shape();
  require_same_shape(mask.shape(), {s.n, 1, s.h, s.w}, "inpaint mask");
  const ModelInput input{apply_mask(corrupted, mask), mask};
  return composite(predict(model, input), corrupted, mask);
}

std::string format_metrics(std::span<const EpochMetrics> history) {
  std::string out = "epoch,train_loss,val_loss,seconds,samples\n";
  char line[160];
  for (const EpochMetrics& m : history) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g,%.9g,%zu\n", m.epoch, static_cast<double>(m.train_loss),
                  static_cast<double>(m.val_loss), static_cast<double>(m.seconds), m.samples);
    out += line;
  }
  return out;
}

void write_metrics(std::span<const EpochMetrics> history, const std::filesystem::path& path) {
  write_file_atomic(path, format_metrics(history));
}

std::vector<EpochMetrics> parse_metrics(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_loss,seconds,samples") {
    throw CorruptFileError("metrics file lacks the expected header");
  }
  std::vector<EpochMetrics> history;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    EpochMetrics m;
    if (std::sscanf(line.c_str(), "%zu,%f,%f,%f,%zu", &m.epoch, &m.train_loss, &m.val_loss, &m.seconds,
                    &m.samples) != 5) {
      throw CorruptFileError("malformed metrics row: " + line);
    }
    history.push_back(m);
  }
  return history;
}

}  // namespace scnn
