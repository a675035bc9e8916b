#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpdhar {

/// Bad argument passed by the caller (segment length, k, window spec, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data violates a schema or domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad run configuration (unknown key, unparsable value, missing required path).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// A classifier bank was asked about a BPD it has no classifier for.
class MissingBpdError : public std::out_of_range {
public:
    explicit MissingBpdError(int bpd)
        : std::out_of_range("no classifier trained for BPD " + std::to_string(bpd)), bpd_(bpd) {}
    int bpd() const noexcept { return bpd_; }

private:
    int bpd_;
};

}  // namespace bpdhar
