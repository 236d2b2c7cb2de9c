#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/util.hpp"

namespace tabgraph {

struct CsvError : std::runtime_error {
    CsvError(const std::string& msg, std::size_t line_) : std::runtime_error(msg), line(line_) {}
    std::size_t line;  // 1-based physical line where the offending record starts
};

/// Raw string table straight out of a CSV file.
struct RawTable {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> rows;
    std::size_t n_cols() const { return names.size(); }
};

/// RFC-4180-style CSV: quoted fields may contain commas, quotes ("" escape)
/// and newlines. Accepts both \n and \r\n record separators.
inline RawTable parse_csv(const std::string& text, bool header) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;

    std::vector<std::string> current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_start_line = 1;
    bool record_has_content = false;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        record_lines.push_back(record_start_line);
        current.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field.empty() && !field_started) {
                    in_quotes = true;
                    field_started = true;
                    record_has_content = true;
                } else {
                    field += c;  // stray quote inside unquoted field: keep verbatim
                }
                break;
            case ',':
                end_field();
                record_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                if (record_has_content || !current.empty() || !field.empty()) end_record();
                record_start_line = line;
                break;
            default:
                field += c;
                field_started = true;
                record_has_content = true;
                break;
        }
    }
    if (in_quotes) throw CsvError("unterminated quoted field", record_start_line);
    if (record_has_content || !current.empty() || !field.empty()) end_record();

    if (records.empty()) throw CsvError("empty CSV input", 1);

    const std::size_t width = records.front().size();
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw CsvError("ragged row: expected " + std::to_string(width) + " cells, got " +
                               std::to_string(records[r].size()) + " at line " +
                               std::to_string(record_lines[r]),
                           record_lines[r]);
        }
    }

    RawTable table;
    std::size_t first_data = 0;
    if (header) {
        table.names = records.front();
        first_data = 1;
    } else {
        table.names.reserve(width);
        for (std::size_t c = 0; c < width; ++c) table.names.push_back("c" + std::to_string(c));
    }
    table.rows.assign(records.begin() + std::ptrdiff_t(first_data), records.end());
    return table;
}

inline RawTable load_csv(const std::filesystem::path& path, bool header) {
    return parse_csv(read_file(path), header);
}

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace tabgraph
