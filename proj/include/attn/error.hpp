#ifndef ATTN_ERROR_HPP
#define ATTN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace attn {

// Root of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

// Malformed input row. Carries the 1-based line and the offending field.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Serialized artifact has the wrong version or is truncated/corrupt.
class FormatError : public Error {
public:
    using Error::Error;
};

// A remote response could not be mapped through the configured field names.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Iterative numerics did not converge.
class NumericError : public Error {
public:
    NumericError(const std::string& what, long iterations)
        : Error(what + " (after " + std::to_string(iterations) + " iterations)"), iterations_(iterations) {}
    long iterations() const noexcept { return iterations_; }

private:
    long iterations_;
};

// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

// HTTP failure after retries. status is 0 when no response was received.
class FetchError : public IoError {
public:
    FetchError(const std::string& what, int status)
        : IoError(what + " (status " + std::to_string(status) + ")"), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

} // namespace attn

#endif
