#include "ezlife/errors.hpp"

namespace ezlife {

exit_code exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const invalid_parameter_error*>(&e))
        return exit_code::invalid_input;
    if (dynamic_cast<const io_error*>(&e))
        return exit_code::io_failure;
    if (dynamic_cast<const non_convergence_error*>(&e))
        return exit_code::no_convergence;
    return exit_code::invalid_input;
}

} // namespace ezlife
