#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scnn/tensor.hpp"

namespace scnn {

enum class ImageFormat { pgm, ppm, png };

/// Chooses a format from the file extension (.pgm, .ppm, .png, any case).
/// Throws UnsupportedFormatError otherwise.
[[nodiscard]] ImageFormat format_from_path(const std::filesystem::path& path);

/// Decoded samples before normalization.
struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;   // 1 or 3
  std::uint32_t max_value = 255;
  std::vector<std::uint16_t> samples;  // row-major, channel-interleaved
};

/// Reads binary PGM (P5), PPM (P6) or PNG. Throws IoError for a missing
/// file, UnsupportedFormatError for unknown magic/extension and
/// CorruptFileError for a malformed header or short payload.
[[nodiscard]] RawImage read_raw_image(const std::filesystem::path& path);

/// (1, 3, H, W) with values sample / max_value. Grayscale is replicated to
/// three channels. When `resolution` is set the image is resampled to
/// resolution x resolution by nearest neighbour.
[[nodiscard]] Tensor4 load_image(const std::filesystem::path& path,
                                 std::optional<std::size_t> resolution = std::nullopt);

/// Nearest-neighbour resampling of every plane to (height, width).
[[nodiscard]] Tensor4 resize_nearest(const Tensor4& image, std::size_t height, std::size_t width);

/// Quantizes batch item 0 to 8 bits (round(clamp(v, 0, 1) * 255)) and
/// writes it atomically. PGM output averages the channels; a 1-channel
/// tensor written as PPM/PNG is replicated.
void save_image(const Tensor4& image, const std::filesystem::path& path);
void save_image(const Tensor4& image, const std::filesystem::path& path, ImageFormat format);

/// Encodes interleaved 8-bit samples in the given format.
[[nodiscard]] std::string encode_image(std::size_t width, std::size_t height, std::size_t channels,
                                       const std::vector<std::uint8_t>& samples, ImageFormat format);

}  // namespace scnn
