#pragma once

#include <stdexcept>

namespace beeroute {

// Bad or inconsistent configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem trouble: unreadable input, unwritable output (CLI exit code 2).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// quadrant_of() called with target == source.
struct CoincidentPoints : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Traffic intensity is undefined on a link with zero available bandwidth.
struct SaturatedLink : std::domain_error {
    using std::domain_error::domain_error;
};

// Roulette selection over an all-zero fitness vector.
struct NoViableCandidate : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace beeroute
