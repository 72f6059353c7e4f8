#include "scnn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "scnn/error.hpp"
#include "scnn/file_util.hpp"
#include "scnn/rng.hpp"

namespace scnn {

std::string_view split_name(Split split) { return split == Split::train ? "train" : "val"; }

Split parse_split(std::string_view name) {
  if (name == "train") {
    return Split::train;
  }
  if (name == "val") {
    return Split::val;
  }
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train or val)");
}

std::vector<std::filesystem::path> DatasetManifest::paths(Split split) const {
  std::vector<std::filesystem::path> out;
  for (const ManifestEntry& entry : entries) {
    if (entry.split == split) {
      out.push_back(entry.path);
    }
  }
  return out;
}

double split_hash(const std::filesystem::path& path, std::uint64_t seed) {
  return static_cast<double>(derive_seed(derive_seed(seed, "split"), path.generic_string()) >> 11) * 0x1.0p-53;
}

DatasetManifest split_dataset(const std::vector<std::filesystem::path>& paths, std::uint64_t seed,
                              double val_fraction, std::size_t resolution) {
  if (paths.size() < 2) {
    throw ConfigError("split_dataset: need at least 2 images, got " + std::to_string(paths.size()));
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("split_dataset: val_fraction must lie in (0, 1)");
  }
  if (resolution == 0) {
    throw ConfigError("split_dataset: resolution must be positive");
  }
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.resolution = resolution;
  std::vector<double> hashes;
  std::size_t val_count = 0;
  for (const auto& path : paths) {
    const double h = split_hash(path, seed);
    hashes.push_back(h);
    const Split split = h < val_fraction ? Split::val : Split::train;
    val_count += split == Split::val ? 1 : 0;
    manifest.entries.push_back({path, split});
  }
  if (val_count == 0) {
    // Smallest hash is closest to the val side of the boundary.
    const auto it = std::min_element(hashes.begin(), hashes.end());
    manifest.entries[static_cast<std::size_t>(it - hashes.begin())].split = Split::val;
  } else if (val_count == paths.size()) {
    const auto it = std::max_element(hashes.begin(), hashes.end());
    manifest.entries[static_cast<std::size_t>(it - hashes.begin())].split = Split::train;
  }
  return manifest;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << "# scnn-manifest seed=" << manifest.seed << " resolution=" << manifest.resolution << '\n';
  for (const ManifestEntry& entry : manifest.entries) {
    out << entry.path.generic_string() << '\t' << split_name(entry.split) << '\n';
  }
  return out.str();
}

namespace {

template <typename T>
T header_value(std::string_view header, std::string_view key) {
  const std::string needle = std::string(key) + "=";
  const std::size_t pos = header.find(needle);
  if (pos == std::string_view::npos) {
    throw CorruptFileError("manifest header lacks " + std::string(key));
  }
  const char* begin = header.data() + pos + needle.size();
  T value{};
  auto [end, ec] = std::from_chars(begin, header.data() + header.size(), value);
  if (ec != std::errc{} || (end != header.data() + header.size() && *end != ' ')) {
    throw CorruptFileError("manifest header has malformed " + std::string(key));
  }
  return value;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest manifest;
  bool saw_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    if (!saw_header) {
      if (!line.starts_with("# scnn-manifest")) {
        throw CorruptFileError("manifest must start with a '# scnn-manifest' header line");
      }
      manifest.seed = header_value<std::uint64_t>(line, "seed");
      manifest.resolution = header_value<std::size_t>(line, "resolution");
      if (manifest.resolution == 0) {
        throw CorruptFileError("manifest resolution must be positive");
      }
      saw_header = true;
      continue;
    }
    const std::size_t tab = line.rfind('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw CorruptFileError("manifest line " + std::to_string(line_no) + " is not 'path<TAB>split'");
    }
    Split split;
    try {
      split = parse_split(line.substr(tab + 1));
    } catch (const ConfigError& e) {
      throw CorruptFileError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    manifest.entries.push_back({std::filesystem::path(std::string(line.substr(0, tab))), split});
  }
  if (!saw_header) {
    throw CorruptFileError("manifest is empty");
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
  write_file_atomic(file, format_manifest(manifest));
}

DatasetManifest read_manifest(const std::filesystem::path& file) {
  DatasetManifest manifest = parse_manifest(read_file(file));
  const std::filesystem::path base = file.parent_path();
  for (ManifestEntry& entry : manifest.entries) {
    if (entry.path.is_relative()) {
      entry.path = base / entry.path;
    }
  }
  return manifest;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) {
    throw IoError("cannot list " + dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".pgm" || ext == ".ppm" || ext == ".png") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace scnn
