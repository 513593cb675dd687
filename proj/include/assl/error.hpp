#pragma once

#include <stdexcept>
#include <string>

namespace assl {

// Dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (CSV, labels, schema).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration value or unparsable config file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A training loss went non-finite. `term()` names the offending loss term.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string term, const std::string& what)
        : std::runtime_error(what), term_(std::move(term)) {}
    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

}  // namespace assl
