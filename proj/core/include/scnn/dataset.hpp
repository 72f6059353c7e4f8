#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace scnn {

enum class Split { train, val };

[[nodiscard]] std::string_view split_name(Split split);
/// "train" or "val"; ConfigError otherwise.
[[nodiscard]] Split parse_split(std::string_view name);

struct ManifestEntry {
  std::filesystem::path path;
  Split split = Split::train;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  std::size_t resolution = 32;

  [[nodiscard]] std::vector<std::filesystem::path> paths(Split split) const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline constexpr std::string_view kManifestFileName = "manifest.tsv";

/// Position of `path` in [0, 1), a pure function of (path, seed).
[[nodiscard]] double split_hash(const std::filesystem::path& path, std::uint64_t seed);

/// Assigns each path to val when split_hash < val_fraction. If that leaves
/// a split empty, the path whose hash is closest to the boundary moves
/// across. Throws ConfigError for fewer than two paths or a fraction
/// outside (0, 1).
[[nodiscard]] DatasetManifest split_dataset(const std::vector<std::filesystem::path>& paths,
                                            std::uint64_t seed, double val_fraction,
                                            std::size_t resolution = 32);

/// Text form: a header line "# scnn-manifest seed=<s> resolution=<r>",
/// then one "path<TAB>split" line per entry. Paths are written as given.
[[nodiscard]] std::string format_manifest(const DatasetManifest& manifest);
[[nodiscard]] DatasetManifest parse_manifest(std::string_view text);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
/// Relative entry paths are resolved against the manifest's directory.
[[nodiscard]] DatasetManifest read_manifest(const std::filesystem::path& file);

/// Sorted list of .pgm/.ppm/.png files directly inside `dir`.
[[nodiscard]] std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace scnn
