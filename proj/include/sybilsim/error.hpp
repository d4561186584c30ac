#pragma once

#include <stdexcept>
#include <string>

namespace sybilsim {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::runtime_error {
    ValidationError(const std::string& what, std::size_t index = npos)
        : std::runtime_error(index == npos ? what : what + " (event " + std::to_string(index) + ")"),
          index(index) {}
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by analysis when there is not enough data for a measurement.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sybilsim
