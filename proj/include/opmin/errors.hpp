#pragma once

#include <stdexcept>
#include <string>

namespace opmin {

// Theorem hypotheses fail on the supplied target (CLI exit 2).
struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// A constructed object failed one of its own postconditions (CLI exit 3).
struct PostconditionError : std::runtime_error {
    explicit PostconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Input files that cannot be parsed or fail schema validation (CLI exit 1).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// The Kan filling system has no solution; on a validated carrier this signals
// a malformed operad rather than a recoverable condition.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace opmin
