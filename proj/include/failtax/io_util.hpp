#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace failtax {

std::string read_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory followed by a rename, so
// a crashed run never leaves a truncated artifact behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace failtax
