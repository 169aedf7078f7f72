#pragma once

#include <stdexcept>
#include <string>

namespace yieldsim {

// Error taxonomy; the CLI maps each class to a distinct exit code.

// Invalid generator/trainer/controller parameters.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input file. Messages name the offending line.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem problem (missing file, unwritable path).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation invoked in an illegal state (settle after finalize, step after done).
struct state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Instance exceeds an explicit resource budget (brute-force enumeration cap).
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace yieldsim
