#include "scnn/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scnn/error.hpp"
#include "scnn/rng.hpp"

namespace scnn {

namespace {

std::size_t rect_extent(double fraction, std::size_t size) {
  const auto extent = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(size)));
  return std::clamp<std::size_t>(extent, 1, size);
}

}  // namespace

void MaskSpec::validate() const {
  if (min_rects < 1 || min_rects > max_rects) {
    throw ConfigError("mask: rectangle count range " + std::to_string(min_rects) + ".." +
                      std::to_string(max_rects) + " is empty or starts below 1");
  }
  const auto check = [](double lo, double hi, const char* name) {
    if (!(lo > 0.0) || !(lo <= hi) || !(hi <= 1.0)) {
      throw ConfigError(std::string("mask: ") + name + " fraction range must satisfy 0 < min <= max <= 1");
    }
  };
  check(min_h_frac, max_h_frac, "height");
  check(min_w_frac, max_w_frac, "width");
}

Tensor4 generate_mask(std::size_t h, std::size_t w, const MaskSpec& spec, std::uint64_t index) {
  spec.validate();
  if (h * w < 2) {
    throw ConfigError("mask: a " + std::to_string(h) + "x" + std::to_string(w) +
                      " image cannot hold both masked and known pixels");
  }
  if (rect_extent(spec.min_h_frac, h) == h && rect_extent(spec.min_w_frac, w) == w) {
    throw ConfigError("mask: every rectangle covers the whole " + std::to_string(h) + "x" + std::to_string(w) +
                      " image, so no known pixels can remain");
  }

  Rng rng(derive_seed(derive_seed(spec.seed, "mask"), index));
  Tensor4 mask({1, 1, h, w});
  for (int attempt = 0; attempt < kMaskMaxAttempts; ++attempt) {
    mask.fill(0.0f);
    const auto rects = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(spec.min_rects), static_cast<std::int64_t>(spec.max_rects)));
    for (std::size_t r = 0; r < rects; ++r) {
      const std::size_t rh = rect_extent(rng.uniform(spec.min_h_frac, spec.max_h_frac), h);
      const std::size_t rw = rect_extent(rng.uniform(spec.min_w_frac, spec.max_w_frac), w);
      const std::size_t top = rng.below(h - rh + 1);
      const std::size_t left = rng.below(w - rw + 1);
      for (std::size_t y = top; y < top + rh; ++y) {
        for (std::size_t x = left; x < left + rw; ++x) {
          mask(0, 0, y, x) = 1.0f;
        }
      }
    }
    const double coverage = mask_coverage(mask);
    if (coverage > 0.0 && coverage < 1.0) {
      return mask;
    }
  }
  throw ConfigError("mask: no mask with both masked and known pixels after " + std::to_string(kMaskMaxAttempts) +
                    " attempts");
}

Tensor4 apply_mask(const Tensor4& ground_truth, const Tensor4& mask) {
  const Shape4& s = ground_truth.shape();
  require_same_shape(mask.shape(), {s.n, 1, s.h, s.w}, "apply_mask");
  Tensor4 out = ground_truth;
  for (std::size_t n = 0; n < s.n; ++n) {
    std::span<const float> m = mask.plane(n, 0);
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<float> pixels = out.plane(n, c);
      for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (m[i] != 0.0f) {
          pixels[i] = 0.0f;
        }
      }
    }
  }
  return out;
}

Sample make_sample(const Tensor4& image, const MaskSpec& spec, std::uint64_t index) {
  const Shape4& s = image.shape();
  if (s.n != 1) {
    throw ShapeError("make_sample: expected a single image, got " + s.to_string());
  }
  Sample sample;
  sample.ground_truth = image;
  sample.mask = generate_mask(s.h, s.w, spec, index);
  sample.corrupted = apply_mask(image, sample.mask);
  return sample;
}

double mask_coverage(const Tensor4& mask) {
  if (mask.size() == 0) {
    return 0.0;
  }
  const auto ones = std::count(mask.data().begin(), mask.data().end(), 1.0f);
  return static_cast<double>(ones) / static_cast<double>(mask.size());
}

}  // namespace scnn
