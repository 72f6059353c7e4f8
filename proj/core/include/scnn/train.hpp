#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scnn/adam.hpp"
#include "scnn/dataset.hpp"
#include "scnn/mask.hpp"
#include "scnn/net.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

enum class LossTarget { full_image, masked_region };

[[nodiscard]] std::string_view loss_target_name(LossTarget target);
[[nodiscard]] LossTarget parse_loss_target(std::string_view name);

struct TrainConfig {
  float lr = 1e-3f;
  std::size_t batch_size = 8;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  LossTarget loss_on = LossTarget::full_image;
  /// Redraw every training mask each epoch. When false each training image
  /// keeps one mask for the whole run.
  bool resample_masks = true;
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  std::filesystem::path metrics_path;    // empty: no metrics file
  /// Record measured seconds per epoch. Otherwise the field is 0 so
  /// identical runs produce identical histories and metrics files.
  bool record_wall_time = false;

  void validate() const;
};

/// Losses are kept at float precision so the 9-digit metrics file
/// reproduces them exactly.
struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  float train_loss = 0.0f;
  float val_loss = 0.0f;
  float seconds = 0.0f;
  std::size_t samples = 0;  // cumulative training samples seen

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> history;
  std::vector<AdamState> optimizer;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

inline constexpr std::string_view kBestCheckpointName = "best.ckpt";
inline constexpr std::string_view kLastCheckpointName = "last.ckpt";

/// Mask spec used for validation samples: fixed per image index and
/// disjoint from the training mask stream.
[[nodiscard]] MaskSpec validation_mask_spec(const MaskSpec& spec);
[[nodiscard]] MaskSpec training_mask_spec(const MaskSpec& spec);

/// Batched Adam training on in-memory images of equal shape (1, c, h, w).
/// Deterministic given (images, spec, config).
[[nodiscard]] TrainResult train(Model model, std::span<const Tensor4> train_images,
                                std::span<const Tensor4> val_images, const MaskSpec& mask_spec,
                                const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Loads the manifest's images at its resolution and trains on them.
[[nodiscard]] TrainResult train(Model model, const DatasetManifest& manifest, const MaskSpec& mask_spec,
                                const TrainConfig& config, const EpochCallback& on_epoch = {});

[[nodiscard]] std::vector<Tensor4> load_split(const DatasetManifest& manifest, Split split);

using Predictor = std::function<Tensor4(const ModelInput&)>;

/// Mean full-image MSE of predictions against ground truth, one sample per
/// image with the mask generate_mask(spec, image index).
[[nodiscard]] double evaluate(const Predictor& predictor, std::span<const Tensor4> images,
                              const MaskSpec& mask_spec);
[[nodiscard]] double evaluate(const Model& model, std::span<const Tensor4> images,
                              const MaskSpec& mask_spec);

/// mask * pred + (1 - mask) * corrupted, clamped to [0, 1]. Pixels with
/// mask == 0 are copied from `corrupted` without arithmetic.
[[nodiscard]] Tensor4 composite(const Tensor4& prediction, const Tensor4& corrupted, const Tensor4& mask);

/// Runs the model in inference mode and composites its prediction into
/// the holes of `corrupted`.
[[nodiscard]] Tensor4 inpaint(const Model& model, const Tensor4& corrupted, const Tensor4& mask);

/// CSV "epoch,train_loss,val_loss,seconds,samples", 9 significant digits.
[[nodiscard]] std::string format_metrics(std::span<const EpochMetrics> history);
void write_metrics(std::span<const EpochMetrics> history, const std::filesystem::path& path);
[[nodiscard]] std::vector<EpochMetrics> parse_metrics(std::string_view csv);

}  // namespace scnn
