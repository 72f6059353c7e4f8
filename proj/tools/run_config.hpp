#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/mask.hpp"
#include "scnn/net.hpp"
#include "scnn/train.hpp"

namespace scnn::cli {

/// Everything a run needs, merged from defaults, an optional flat
/// `key = value` file and command-line overrides (in that order).
struct RunConfig {
  std::uint64_t seed = 0;
  NetConfig net;
  TrainConfig train;
  MaskSpec mask;
  double val_fraction = 0.2;
  std::size_t resolution = 32;

  /// Derives the per-subsystem seeds from `seed`.
  void derive_seeds();
};

/// Names of every recognised key, in documentation order.
[[nodiscard]] const std::vector<std::string_view>& config_keys();

/// Applies one key. Unknown keys and unparsable values raise ConfigError.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin = "<config>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace scnn::cli
