#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "canvass/errors.hpp"

namespace canvass {

// Minimal RFC-4180-style CSV reader. Handles quoted fields (embedded
// commas, quotes, newlines) and CRLF; tracks the physical line each
// record starts on for error reporting.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Reads one record into `fields`. Returns false on clean EOF.
    bool next(std::vector<std::string>& fields);

    // Line number the most recent record started on (1-based).
    int line() const { return record_line_; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& column, const std::string& what) const {
        throw ParseError(source_, record_line_, column, what);
    }

private:
    std::istream& in_;
    std::string source_;
    int line_ = 0;
    int record_line_ = 0;
};

// Reads the header record and checks it against the canonical schema.
void expect_header(CsvReader& reader, const std::vector<std::string>& columns);

// Writes one CSV record, quoting fields only when needed.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

std::string csv_quote(std::string_view field);

}  // namespace canvass
