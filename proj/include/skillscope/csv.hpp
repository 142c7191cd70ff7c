#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skillscope/common.hpp"

namespace skillscope::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

// RFC 4180: fields separated by commas, optionally quoted with '"';
// quoted fields may contain commas, newlines and doubled quotes.
inline std::vector<Record> parse(const std::string& text) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_char_in_record = false;
    std::size_t line = 1;
    std::size_t record_start_line = 1;

    auto end_field = [&]() {
        current.fields.push_back(field);
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&]() {
        end_field();
        current.line = record_start_line;
        records.push_back(std::move(current));
        current = Record{};
        any_char_in_record = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw DataError("csv: stray quote inside unquoted field at line " + std::to_string(line));
                }
                in_quotes = true;
                field_was_quoted = true;
                any_char_in_record = true;
                break;
            case ',':
                end_field();
                any_char_in_record = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                record_start_line = line;
                break;
            default:
                field.push_back(c);
                any_char_in_record = true;
                break;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field starting before line " + std::to_string(line));
    if (any_char_in_record || !field.empty() || !current.fields.empty()) end_record();
    return records;
}

inline std::string quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << contents;
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace skillscope::csv
