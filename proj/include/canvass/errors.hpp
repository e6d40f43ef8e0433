#pragma once

#include <stdexcept>
#include <string>

namespace canvass {

// Rejection of an input file. Always carries the source name, the
// 1-based line, and the column (header name) that failed, so callers
// can point a user at the exact cell.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, int line, std::string column, const std::string& what)
        : std::runtime_error(format(source, line, column, what)),
          source_(std::move(source)),
          line_(line),
          column_(std::move(column)) {}

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    const std::string& column() const { return column_; }

private:
    static std::string format(const std::string& source, int line, const std::string& column,
                              const std::string& what) {
        std::string msg = source.empty() ? std::string("<input>") : source;
        msg += ":" + std::to_string(line);
        if (!column.empty()) msg += " [" + column + "]";
        msg += ": " + what;
        return msg;
    }

    std::string source_;
    int line_;
    std::string column_;
};

// Fixture generation rejected an unachievable spec; names the constraint.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace canvass
