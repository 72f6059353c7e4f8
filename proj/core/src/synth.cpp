#include "scnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "scnn/error.hpp"
#include "scnn/file_util.hpp"
#include "scnn/image_io.hpp"
#include "scnn/rng.hpp"

namespace scnn {

namespace {

Rgb random_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
          static_cast<std::uint8_t>(rng.below(256))};
}

}  // namespace

SynthImage describe_synth_image(std::uint64_t seed, std::size_t index, std::size_t resolution) {
  if (resolution == 0) {
    throw ConfigError("synth: resolution must be positive");
  }
  Rng rng(derive_seed(derive_seed(seed, "synth"), index));
  SynthImage image;
  image.resolution = resolution;
  image.kind = static_cast<SynthKind>(index % 3);
  image.color0 = random_color(rng);
  image.color1 = random_color(rng);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  image.dir_x = std::cos(angle);
  image.dir_y = std::sin(angle);
  const auto res = static_cast<double>(resolution);
  const auto circles = static_cast<std::size_t>(rng.integer(1, 4));
  for (std::size_t i = 0; i < circles; ++i) {
    SynthCircle circle;
    circle.cx = rng.uniform(0.0, res);
    circle.cy = rng.uniform(0.0, res);
    circle.radius = rng.uniform(res / 8.0, res / 3.0);
    circle.color = random_color(rng);
    image.circles.push_back(circle);
  }
  image.cell = static_cast<std::size_t>(rng.integer(2, std::max<std::int64_t>(2, static_cast<std::int64_t>(resolution / 4))));
  return image;
}

std::vector<std::uint8_t> render_synth_image(const SynthImage& image) {
  const std::size_t res = image.resolution;
  std::vector<std::uint8_t> pixels(res * res * 3);
  const auto put = [&](std::size_t x, std::size_t y, const Rgb& color) {
    std::copy(color.begin(), color.end(), pixels.begin() + static_cast<std::ptrdiff_t>((y * res + x) * 3));
  };

  switch (image.kind) {
    case SynthKind::gradient: {
      const double lo_c = 0.5;
      const double hi_c = static_cast<double>(res) - 0.5;
      const double corners[4] = {lo_c * image.dir_x + lo_c * image.dir_y, hi_c * image.dir_x + lo_c * image.dir_y,
                                 lo_c * image.dir_x + hi_c * image.dir_y, hi_c * image.dir_x + hi_c * image.dir_y};
      const double pmin = *std::min_element(std::begin(corners), std::end(corners));
      const double pmax = *std::max_element(std::begin(corners), std::end(corners));
      for (std::size_t y = 0; y < res; ++y) {
        for (std::size_t x = 0; x < res; ++x) {
          const double p = (static_cast<double>(x) + 0.5) * image.dir_x + (static_cast<double>(y) + 0.5) * image.dir_y;
          const double t = pmax > pmin ? (p - pmin) / (pmax - pmin) : 0.0;
          Rgb color;
          for (std::size_t c = 0; c < 3; ++c) {
            const double v = image.color0[c] + (static_cast<double>(image.color1[c]) - image.color0[c]) * t;
            color[c] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
          }
          put(x, y, color);
        }
      }
      break;
    }
    case SynthKind::circles: {
      for (std::size_t y = 0; y < res; ++y) {
        for (std::size_t x = 0; x < res; ++x) {
          Rgb color = image.color0;
          for (const SynthCircle& circle : image.circles) {
            const double dx = static_cast<double>(x) + 0.5 - circle.cx;
            const double dy = static_cast<double>(y) + 0.5 - circle.cy;
            if (dx * dx + dy * dy <= circle.radius * circle.radius) {
              color = circle.color;
            }
          }
          put(x, y, color);
        }
      }
      break;
    }
    case SynthKind::checkerboard: {
      for (std::size_t y = 0; y < res; ++y) {
        for (std::size_t x = 0; x < res; ++x) {
          put(x, y, ((x / image.cell) + (y / image.cell)) % 2 == 0 ? image.color0 : image.color1);
        }
      }
      break;
    }
  }
  return pixels;
}

std::vector<std::filesystem::path> synth_corpus(std::size_t count, std::size_t resolution, std::uint64_t seed,
                                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    const SynthImage image = describe_synth_image(seed, i, resolution);
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05zu.ppm", i);
    const std::filesystem::path path = out_dir / name;
    write_file_atomic(path, encode_image(resolution, resolution, 3, render_synth_image(image), ImageFormat::ppm));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace scnn
