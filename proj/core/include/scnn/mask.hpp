#pragma once

#include <cstddef>
#include <cstdint>

#include "scnn/tensor.hpp"

namespace scnn {

/// Masks are unions of axis-aligned rectangles. Each rectangle's height and
/// width are drawn as fractions of the image height and width.
struct MaskSpec {
  std::size_t min_rects = 1;
  std::size_t max_rects = 3;
  double min_h_frac = 0.1;
  double max_h_frac = 0.4;
  double min_w_frac = 0.1;
  double max_w_frac = 0.4;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

inline constexpr int kMaskMaxAttempts = 64;

/// (1, 1, h, w) binary mask, 1 = missing. Deterministic in (spec.seed,
/// index). Always has at least one masked and one known pixel; a spec that
/// cannot produce such a mask raises ConfigError.
[[nodiscard]] Tensor4 generate_mask(std::size_t h, std::size_t w, const MaskSpec& spec,
                                    std::uint64_t index);

/// ground_truth with every channel zeroed where mask == 1.
[[nodiscard]] Tensor4 apply_mask(const Tensor4& ground_truth, const Tensor4& mask);

struct Sample {
  Tensor4 ground_truth;  // (1, c, h, w) in [0, 1]
  Tensor4 mask;          // (1, 1, h, w) in {0, 1}
  Tensor4 corrupted;     // ground_truth * (1 - mask)
};

[[nodiscard]] Sample make_sample(const Tensor4& image, const MaskSpec& spec, std::uint64_t index);

/// Fraction of pixels equal to 1.
[[nodiscard]] double mask_coverage(const Tensor4& mask);

}  // namespace scnn
