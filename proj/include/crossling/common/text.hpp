/// @file text.hpp
/// @brief Small string and file helpers.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crossling {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lowercase hex SHA-256 of @p data.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate and write in one go.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace crossling
