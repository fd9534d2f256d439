#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phenomine::csv {

/// RFC 4180 table with a header row. Leading lines starting with '#' are
/// treated as comments and collected separately.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each row

    /// Column position by name, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
    /// Column position by name; throws SchemaError naming the file when absent.
    std::size_t require_column(std::string_view name, std::string_view source) const;
};

Table parse(std::string_view text, std::string_view source = "<memory>");
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace phenomine::csv
