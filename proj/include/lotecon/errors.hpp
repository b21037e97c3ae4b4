#pragma once

#include <stdexcept>
#include <string>

namespace lotecon {

// Bad inputs: malformed configs, mismatched grids, unbalanced prize
// structures. CLI maps this to exit code 3.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver hit its cap. Carries the last residual so callers
// can report how far off it was. CLI maps this to exit code 2.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& msg, double last_residual)
        : std::runtime_error(msg + " (last residual " + std::to_string(last_residual) + ")"),
          residual(last_residual) {}
    double residual;
};

} // namespace lotecon
