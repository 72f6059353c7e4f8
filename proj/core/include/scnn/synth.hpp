#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace scnn {

enum class SynthKind { gradient, circles, checkerboard };

using Rgb = std::array<std::uint8_t, 3>;

struct SynthCircle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  Rgb color{};
};

/// Parameters of one procedurally generated picture.
///
/// gradient:     color0 -> color1 along direction (dir_x, dir_y); the blend
///               factor is the projection of the pixel centre, rescaled so
///               the image's extreme pixels map to 0 and 1.
/// circles:      filled circles in order over a color0 background.
/// checkerboard: color0/color1 squares of side `cell` pixels.
struct SynthImage {
  SynthKind kind = SynthKind::gradient;
  std::size_t resolution = 32;
  Rgb color0{};
  Rgb color1{};
  double dir_x = 1.0;
  double dir_y = 0.0;
  std::vector<SynthCircle> circles;
  std::size_t cell = 4;
};

[[nodiscard]] SynthImage describe_synth_image(std::uint64_t seed, std::size_t index,
                                              std::size_t resolution);

/// Interleaved RGB bytes, resolution x resolution.
[[nodiscard]] std::vector<std::uint8_t> render_synth_image(const SynthImage& image);

/// Writes `count` PPM files named img_00000.ppm, ... into out_dir (created
/// if needed). Deterministic in seed.
[[nodiscard]] std::vector<std::filesystem::path> synth_corpus(std::size_t count, std::size_t resolution,
                                                              std::uint64_t seed,
                                                              const std::filesystem::path& out_dir);

}  // namespace scnn
