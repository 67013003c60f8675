#pragma once

#include <stdexcept>
#include <string>

namespace mlceval {

// Invalid data or configuration: bad codes, schema mismatches, malformed files.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed textual input; message carries positional detail (line, token).
class ParseError : public ValidationError {
public:
    explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

// Remote endpoint failure that survived the retry policy.
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mlceval
