#pragma once

#include <functional>

namespace ezlife {

// Tolerances for the adaptive integrator behind the closed-form curves.
// max_subdivisions caps the number of dyadic refinements (rounded to the
// nearest power of two). Identical inputs produce bit-identical results.
struct quadrature_config {
    double rel_tol = 1e-10;
    unsigned max_subdivisions = 1u << 15;
};

// Adaptive Gauss-Kronrod integration of f over [0, 1]. Throws
// non_convergence_error when the error estimate exceeds the requested
// tolerance after the subdivision budget is spent.
double integrate01(const std::function<double(double)>& f, const quadrature_config& cfg);

} // namespace ezlife
