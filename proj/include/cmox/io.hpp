#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cmox {

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits file contents into lines, dropping a trailing '\r' on each.
/// A final newline does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view contents);

/// Number of worker threads: CMOX_THREADS if set, else hardware concurrency.
unsigned thread_count();

}  // namespace cmox
