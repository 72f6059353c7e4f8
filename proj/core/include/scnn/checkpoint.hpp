#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "scnn/adam.hpp"
#include "scnn/net.hpp"

namespace scnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMeta {
  std::int64_t epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct Checkpoint {
  Model model;
  std::vector<AdamState> optimizer;  // empty, or two per layer (weight, bias)
  TrainingMeta meta;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Little-endian layout:
///
///   "SCNNCKPT"                          8 bytes
///   u32 version
///   u32 length, UTF-8 "key=value\n" metadata (config + training meta)
///   u32 tensor count, then per tensor:
///       u32 name length, name, 4 x u32 dims, f32 payload
///   u32 optimizer state count, then per state:
///       i64 t, 4 x f32 (lr, beta1, beta2, eps), u64 length, f32 m[], f32 v[]
///   u32 CRC-32 of every preceding byte
[[nodiscard]] std::string encode_checkpoint(const Checkpoint& checkpoint);

/// Throws CorruptFileError (bad magic, truncation, checksum mismatch,
/// malformed metadata) or VersionError.
[[nodiscard]] Checkpoint decode_checkpoint(std::string_view bytes);

/// Written to a temporary sibling and renamed into place.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace scnn
