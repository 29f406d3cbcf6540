/// @file csv.hpp
/// @brief RFC 4180 reading and writing (quoted fields may span lines).

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crossling::csv {

using Row = std::vector<std::string>;

std::vector<Row> parse(std::string_view text);
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace crossling::csv
