#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace scnn {

/// Writes bytes to a temporary sibling of `path`, then renames it over
/// `path`. Readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Throws IoError when the file cannot be opened or read.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace scnn
