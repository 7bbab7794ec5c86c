#pragma once

#include "ezlife/data_io.hpp"
#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"

namespace ezlife {

// Log-linear hazard fit: slope and level of an ordinary least squares
// regression of log rate on age. m0 is the fitted rate at age_lo, so the
// intercept is quoted at the start of the window rather than at age zero.
struct gompertz_fit {
    double beta = 0.0;
    double m0 = 0.0;
};

// OLS over the series points with age in [age_lo, age_hi]. Needs at least
// three points in the window; throws invalid_parameter_error otherwise.
gompertz_fit fit_gompertz(const cohort_series& series, double age_lo,
                          double age_hi);

// Mean squared error on raw rates between a model path and data, over the
// data ages inside [age_lo, age_hi]. Model rates come from rate_at, which
// interpolates linearly in log rate. Throws when the model path does not
// span the data ages used, or when no data falls in the window.
double mortality_mse(const mortality_path& model, const cohort_series& data,
                     double age_lo, double age_hi);

// MSE on raw rates of the best log-linear fit to the series itself over the
// window; the no-healthcare yardstick the structural fit has to beat.
double regression_baseline(const cohort_series& series, double age_lo,
                           double age_hi);

// Inner rate-curve solver defaults for calibration loops: envelope-midpoint
// mode on a trimmed grid, cheap enough to sit inside an optimizer.
solver_config calibration_inner_defaults();

struct optimizer_config {
    bool grid_start = true; // coarse box grid before the simplex
    // Search box. The simplex moves in (log a, logit q, log m0), which keeps
    // every candidate structurally valid; leaving the box costs a smooth
    // quadratic penalty rather than a hard wall.
    double a_lo = 0.02, a_hi = 1.5;
    double q_lo = 0.05, q_hi = 0.95;
    double m0_lo = 1e-6, m0_hi = 0.05;
    double tol = 1e-8;    // simplex spread, transformed coordinates
    int max_evals = 20000;
    int restarts = 2;     // re-launches from perturbations of the best point
    unsigned seed = 0;    // restart perturbation pattern
    int threads = 0;      // grid-seeding workers; 0 = hardware count
    double age_lo = 40.0, age_hi = 80.0; // fit window on the target series
    double step = 0.05;   // hazard integrator substep, years
    solver_config inner = calibration_inner_defaults();
};

struct calibration_result {
    double beta = 0.0;
    double m0_1900 = 0.0; // filled by the caller from the 1900-cohort fit
    double a = 0.0;
    double q = 0.0;
    double m0_1940 = 0.0;
    double model_mse = 0.0;
    double regression_mse = 0.0;
    long evaluations = 0;
    bool converged = false;
};

// Fits (a, q, m0) by matching the endogenous hazard path to the series over
// [opt.age_lo, opt.age_hi], holding beta and the preference/market blocks of
// params fixed. params.efficacy and params.m0, when present and inside the
// box, serve as a warm start alongside the grid. Candidates violating the
// growth-band feasibility g(I(psi-1)) < beta get a finite penalty; if no
// evaluated candidate is feasible the fit throws invalid_parameter_error.
// Exhausting max_evals returns the best point with converged = false.
calibration_result fit_healthcare(const cohort_series& series1940, double beta,
                                  const model_params& params,
                                  const optimizer_config& opt);

} // namespace ezlife
