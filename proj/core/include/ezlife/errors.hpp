#pragma once

#include <stdexcept>
#include <string>

namespace ezlife {

// Process exit codes used by the command-line front end. Library code throws
// the exception types below and main() maps them onto these values.
enum class exit_code : int {
    ok = 0,
    invalid_input = 1,  // parameter/domain validation failures
    io_failure = 2,     // missing files, malformed input
    no_convergence = 3, // iteration budgets exhausted, bound violations
};

// Bad parameter values, domain violations, degenerate inputs.
class invalid_parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File system and parse failures. Parse messages carry "file:line:" context.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative routine ran out of budget before meeting its tolerance.
class non_convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A converged iterate violates a bound it is required to satisfy.
class bound_violation_error : public non_convergence_error {
public:
    using non_convergence_error::non_convergence_error;
};

exit_code exit_code_for(const std::exception& e) noexcept;

} // namespace ezlife
