#pragma once

#include <stdexcept>
#include <string>

namespace mixlit {

/// A representation could not supply enough certified bits within its
/// precision cap. Callers must not fall back to an uncertified answer.
class RefinementBudgetExhausted : public std::runtime_error {
public:
    explicit RefinementBudgetExhausted(const std::string& what)
        : std::runtime_error("refinement budget exhausted: " + what) {}
};

/// An internal consistency check failed (a bug, not bad input).
class InvariantViolation : public std::logic_error {
public:
    explicit InvariantViolation(const std::string& what)
        : std::logic_error("invariant violated: " + what) {}
};

/// Malformed textual constructor or option value.
class ParseError : public std::invalid_argument {
public:
    explicit ParseError(const std::string& what)
        : std::invalid_argument(what) {}
};

} // namespace mixlit
