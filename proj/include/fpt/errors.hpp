#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

/// Raised when a numerical routine (quadrature, series, rejection loop)
/// fails to reach its tolerance within its budget.
class numerical_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration text. Carries the 1-based line number.
class config_syntax_error : public std::runtime_error {
public:
    config_syntax_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed configuration whose values violate a model or run constraint.
/// Carries the offending field name.
class config_semantic_error : public std::runtime_error {
public:
    config_semantic_error(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace fpt
