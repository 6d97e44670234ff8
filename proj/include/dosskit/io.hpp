#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dosskit {

/// Whole-file read; throws an io Error on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace dosskit
