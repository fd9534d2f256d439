#include "phenomine/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "phenomine/error.hpp"

namespace phenomine::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, std::string_view source) const {
    auto pos = column(name);
    if (!pos) {
        throw SchemaError(std::string(source) + ":1", "missing column '" + std::string(name) + "'");
    }
    return *pos;
}

namespace {

// Splits one logical record starting at `pos`. Quoted fields may span lines.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t& line,
                                     std::string_view source) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    const std::size_t start_line = line;
    while (pos < text.size()) {
        char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                    continue;
                }
                quoted = false;
                ++pos;
                continue;
            }
            if (c == '\n') ++line;
            field += c;
            ++pos;
            continue;
        }
        if (c == '"' && field.empty() && !field_started_quoted) {
            quoted = true;
            field_started_quoted = true;
            ++pos;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_started_quoted = false;
            ++pos;
            continue;
        }
        if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
            ++pos;
            continue;
        }
        if (c == '\n') {
            ++pos;
            ++line;
            break;
        }
        field += c;
        ++pos;
    }
    if (quoted) {
        throw SchemaError(std::string(source) + ":" + std::to_string(start_line),
                          "unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

bool blank_record(const std::vector<std::string>& r) {
    return r.size() == 1 && r[0].find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Table parse(std::string_view text, std::string_view source) {
    Table table;
    std::size_t pos = 0;
    std::size_t line = 1;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

    while (pos < text.size() && text[pos] == '#') {
        auto eol = text.find('\n', pos);
        auto end = eol == std::string_view::npos ? text.size() : eol;
        std::string comment(text.substr(pos, end - pos));
        if (!comment.empty() && comment.back() == '\r') comment.pop_back();
        table.comments.push_back(std::move(comment));
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line;
    }

    bool have_header = false;
    while (pos < text.size()) {
        std::size_t record_line = line;
        auto rec = next_record(text, pos, line, source);
        if (blank_record(rec)) continue;
        if (!have_header) {
            table.header = std::move(rec);
            have_header = true;
            continue;
        }
        table.rows.push_back(std::move(rec));
        table.row_lines.push_back(record_line);
    }
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

}  // namespace phenomine::csv
