#pragma once

#include <stdexcept>
#include <string>

namespace nervecraft {

// Bad user input: unreadable files, malformed configs, precondition violations.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// The radius ladder ran below what the mesh can resolve.
struct ResolutionExhausted : std::runtime_error {
    explicit ResolutionExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

// A structural invariant failed mid-computation.
struct InvariantViolation : std::logic_error {
    explicit InvariantViolation(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace nervecraft
