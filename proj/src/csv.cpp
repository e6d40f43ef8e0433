#include "canvass/csv.hpp"

namespace canvass {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::istream::traits_type::eof()) return false;

    ++line_;
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    for (;;) {
        if (c == std::istream::traits_type::eof()) {
            if (quoted) throw ParseError(source_, record_line_, "", "unterminated quoted field");
            fields.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int peek = in_.peek();
                if (peek == '"') {
                    in_.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field += ch;
        }
        c = in_.get();
    }
}

void expect_header(CsvReader& reader, const std::vector<std::string>& columns) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw ParseError(reader.source(), 1, "", "empty input, expected header row");
    }
    if (!fields.empty() && !fields[0].empty() && static_cast<unsigned char>(fields[0][0]) == 0xEF) {
        // strip UTF-8 BOM
        if (fields[0].size() >= 3 && static_cast<unsigned char>(fields[0][1]) == 0xBB &&
            static_cast<unsigned char>(fields[0][2]) == 0xBF) {
            fields[0].erase(0, 3);
        }
    }
    if (fields.size() != columns.size()) {
        reader.fail("", "header has " + std::to_string(fields.size()) + " columns, expected " +
                            std::to_string(columns.size()));
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (fields[i] != columns[i]) {
            reader.fail(columns[i], "header column " + std::to_string(i + 1) + " is '" + fields[i] +
                                         "', expected '" + columns[i] + "'");
        }
    }
}

std::string csv_quote(std::string_view field) {
    bool needs_quote = false;
    for (char ch : field) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_quote(fields[i]);
    }
    out << '\n';
}

}  // namespace canvass
