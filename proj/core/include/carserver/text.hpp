#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace carserver::text {

/// Whole file as bytes; throws Error(Io).
std::string read_file(const std::filesystem::path& path);
/// Writes bytes exactly (no newline translation); creates parent directories.
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_word(std::string_view line, std::string_view word);

/// "measurementsPerSecond" -> "MEASUREMENTS_PER_SECOND", "image-size x" -> "IMAGE_SIZE_X".
std::string upper_snake(std::string_view key);

}  // namespace carserver::text
