#pragma once

#include <stdexcept>
#include <string>

namespace panelval {

inline constexpr const char* kToolVersion = "1.0.0";

// Bad inputs: missing files, schema violations, violated preconditions.
// The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures: non-convergence, separation, degenerate estimation.
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace panelval
