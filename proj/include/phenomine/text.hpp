#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phenomine::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
/// Collapses runs of ASCII whitespace to one space and trims the ends.
std::string collapse_spaces(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool contains_ci(std::string_view haystack, std::string_view needle);
/// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);
/// Lowercase alphanumeric word tokens; everything else separates.
std::vector<std::string> word_tokens(std::string_view s);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace phenomine::text
