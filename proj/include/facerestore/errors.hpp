#pragma once

#include <stdexcept>
#include <string>

namespace facerestore {

// Library code throws std::invalid_argument for bad parameters and
// std::out_of_range for windows that leave an image. The types below cover
// the remaining failure classes; the CLI maps each class to an exit code.

/// Inconsistent or incomplete run configuration (empty exemplar set, K > N, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(int line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Object used before it was made ready (e.g. forward pass without weights).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace facerestore
