#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlo {

struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedConfiguration : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure during a run (non-finite values, divergence).
struct RuntimeAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace tlo
