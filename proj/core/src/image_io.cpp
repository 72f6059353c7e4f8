#include "scnn/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include <png.h>

#include "scnn/error.hpp"
#include "scnn/file_util.hpp"

namespace scnn {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

// Netpbm header tokenizer: whitespace-separated tokens, '#' comments to end of line.
class PnmHeader {
 public:
  PnmHeader(std::string_view bytes, const std::filesystem::path& path) : bytes_(bytes), path_(path) {}

  std::uint32_t number(std::string_view what) {
    skip_space_and_comments();
    std::uint64_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
      if (value > 0xffffffffULL) {
        fail(std::string(what) + " is too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      fail("expected " + std::string(what));
    }
    return static_cast<std::uint32_t>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail("missing whitespace before raster");
    }
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw CorruptFileError("malformed header in " + path_.string() + ": " + message);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;  // after the magic
};

RawImage decode_pnm(std::string_view bytes, const std::filesystem::path& path) {
  RawImage image;
  image.channels = bytes[1] == '5' ? 1 : 3;
  PnmHeader header(bytes, path);
  image.width = header.number("width");
  image.height = header.number("height");
  image.max_value = header.number("maxval");
  if (image.width == 0 || image.height == 0) {
    header.fail("zero image dimension");
  }
  if (image.max_value == 0 || image.max_value > 65535) {
    header.fail("maxval must be in 1..65535");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t bytes_per_sample = image.max_value > 255 ? 2 : 1;
  const std::size_t count = image.width * image.height * image.channels;
  if (bytes.size() - offset < count * bytes_per_sample) {
    throw CorruptFileError("truncated raster in " + path.string() + ": expected " +
                           std::to_string(count * bytes_per_sample) + " bytes, found " +
                           std::to_string(bytes.size() - offset));
  }
  image.samples.resize(count);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (std::size_t i = 0; i < count; ++i) {
    // 16-bit Netpbm samples are big-endian.
    image.samples[i] = bytes_per_sample == 1
                           ? raster[i]
                           : static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
    if (image.samples[i] > image.max_value) {
      throw CorruptFileError("sample exceeds maxval in " + path.string());
    }
  }
  return image;
}

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

RawImage decode_png(std::string_view bytes, const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&png};
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw CorruptFileError("malformed PNG " + path.string() + ": " + png.message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  RawImage image;
  image.width = png.width;
  image.height = png.height;
  image.channels = gray ? 1 : 3;
  image.max_value = 255;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    throw CorruptFileError("malformed PNG " + path.string() + ": " + png.message);
  }
  image.samples.assign(buffer.begin(), buffer.end());
  return image;
}

}  // namespace

ImageFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    return ImageFormat::pgm;
  }
  if (ext == ".ppm") {
    return ImageFormat::ppm;
  }
  if (ext == ".png") {
    return ImageFormat::png;
  }
  throw UnsupportedFormatError("unsupported image extension '" + ext + "' for " + path.string() +
                               " (expected .pgm, .ppm or .png)");
}

RawImage read_raw_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("image " + path.string() + " does not exist");
  }
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes, path);
  }
  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    throw UnsupportedFormatError("only binary PGM (P5) and PPM (P6) are supported, " + path.string() + " is P" +
                                 bytes[1]);
  }
  throw UnsupportedFormatError("unrecognized image format: " + path.string());
}

Tensor4 resize_nearest(const Tensor4& image, std::size_t height, std::size_t width) {
  const Shape4& s = image.shape();
  if (height == 0 || width == 0) {
    throw ConfigError("resize_nearest: target size must be positive");
  }
  if (s.h == height && s.w == width) {
    return image;
  }
  Tensor4 out({s.n, s.c, height, width});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < height; ++y) {
        // Source pixel whose cell contains the centre of the target pixel.
        const std::size_t sy = ((2 * y + 1) * s.h) / (2 * height);
        for (std::size_t x = 0; x < width; ++x) {
          const std::size_t sx = ((2 * x + 1) * s.w) / (2 * width);
          out(n, c, y, x) = image(n, c, sy, sx);
        }
      }
    }
  }
  return out;
}

Tensor4 load_image(const std::filesystem::path& path, std::optional<std::size_t> resolution) {
  const RawImage raw = read_raw_image(path);
  Tensor4 image({1, 3, raw.height, raw.width});
  const float scale = static_cast<float>(raw.max_value);
  for (std::size_t y = 0; y < raw.height; ++y) {
    for (std::size_t x = 0; x < raw.width; ++x) {
      const std::size_t base = (y * raw.width + x) * raw.channels;
      for (std::size_t c = 0; c < 3; ++c) {
        const std::uint16_t sample = raw.samples[base + (raw.channels == 1 ? 0 : c)];
        image(0, c, y, x) = static_cast<float>(sample) / scale;
      }
    }
  }
  if (resolution) {
    image = resize_nearest(image, *resolution, *resolution);
  }
  return image;
}

std::string encode_image(std::size_t width, std::size_t height, std::size_t channels,
                         const std::vector<std::uint8_t>& samples, ImageFormat format) {
  if (samples.size() != width * height * channels) {
    throw ShapeError("encode_image: sample count does not match dimensions");
  }
  const std::size_t expected_channels = format == ImageFormat::pgm ? 1 : format == ImageFormat::ppm ? 3 : channels;
  if (channels != expected_channels || (channels != 1 && channels != 3)) {
    throw ShapeError("encode_image: " + std::to_string(channels) + " channels cannot be written in this format");
  }
  if (format == ImageFormat::png) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    PngImageGuard guard{&png};
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, samples.data(), 0, nullptr)) {
      throw IoError(std::string("PNG encoding failed: ") + png.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, samples.data(), 0, nullptr)) {
      throw IoError(std::string("PNG encoding failed: ") + png.message);
    }
    out.resize(size);
    return out;
  }
  std::string out = (format == ImageFormat::pgm ? "P5\n" : "P6\n") + std::to_string(width) + " " +
                    std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(samples.data()), samples.size());
  return out;
}

void save_image(const Tensor4& image, const std::filesystem::path& path) {
  save_image(image, path, format_from_path(path));
}

void save_image(const Tensor4& image, const std::filesystem::path& path, ImageFormat format) {
  const Shape4& s = image.shape();
  if (s.n < 1 || (s.c != 1 && s.c != 3)) {
    throw ShapeError("save_image: expected 1 or 3 channels, got " + s.to_string());
  }
  const std::size_t out_channels = format == ImageFormat::pgm ? 1 : 3;
  const auto quantize = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  std::vector<std::uint8_t> samples(s.h * s.w * out_channels);
  for (std::size_t y = 0; y < s.h; ++y) {
    for (std::size_t x = 0; x < s.w; ++x) {
      const std::size_t base = (y * s.w + x) * out_channels;
      if (out_channels == 1) {
        double sum = 0.0;
        for (std::size_t c = 0; c < s.c; ++c) {
          sum += image(0, c, y, x);
        }
        samples[base] = quantize(sum / static_cast<double>(s.c));
      } else {
        for (std::size_t c = 0; c < 3; ++c) {
          samples[base + c] = quantize(image(0, s.c == 1 ? 0 : c, y, x));
        }
      }
    }
  }
  write_file_atomic(path, encode_image(s.w, s.h, out_channels, samples, format));
}

}  // namespace scnn
