#pragma once

#include "ezlife/params.hpp"
#include "ezlife/quadrature.hpp"
#include "ezlife/rate_curve.hpp"

namespace ezlife {

// Solver for the full-control consumption rate u*(m), which satisfies
//
//   0 = u^2 - c0(m) u - beta m u'
//       + (1-q)/q a^{1/(1-q)} ((psi-1) u)^{-q/(1-q)} (m u')^{1/(1-q)})
//
// on a log-spaced grid over [m_min, m_max]. Two modes:
//
//   bounds       midpoint (in log) of the closed-form envelope; cheap, no
//                iteration, good enough for calibration loops.
//   collocation  damped Newton on the box-scheme residual of the first-order
//                form du/dln m = D(m, u), with D the admissible root of the
//                algebraic part; closed at m_max by slope matching against
//                the asymptote c0(m) + beta_lower.
//
// Both modes return a finalized rate_curve carrying the envelope columns.
struct solver_config {
    solve_mode mode = solve_mode::collocation;
    int n_nodes = 2000;
    double m_min = 1e-7;
    double m_max = 20.0;
    double newton_tol = 1e-10;  // on the scaled collocation residual
    int max_iters = 60;
    double damping = 1.0;       // initial Newton step fraction
    double far_field_gap_tol = 1e-3; // required envelope collapse at m_max
    double bounds_slack = 1e-6; // tolerated envelope overshoot, see rate_curve
    quadrature_config quad;
};

rate_curve solve_u_star(const model_params& p, const solver_config& cfg);

// Optimal healthcare intensity at hazard m: the efficacy slope matched to
// (psi-1) u/(m u'). Returns 0 without efficacy or on a flat curve.
double h_star(const model_params& p, const rate_curve& curve, double m);

// The same quantity through the literal power-law exponent; kept as a
// distinct arithmetic route so the two can be cross-checked.
double h_star_power_form(const model_params& p, const rate_curve& curve, double m);

// g(h*(m)) formed directly from the curve ratio without constructing h*.
double g_at_h_star(const model_params& p, const rate_curve& curve, double m);

// Per-unit-wealth policy triple at hazard m.
struct policy {
    double consumption_rate = 0.0;
    double healthcare = 0.0;
    double risky_fraction = 0.0;
};
policy policy_at(const model_params& p, const rate_curve& curve, double m);

// Recomputes the ODE residual with five-point (fourth-order) stencils that
// share nothing with the collocation discretization. max_abs_interior skips
// five nodes at each boundary where pinned-end effects live.
struct residual_report {
    std::vector<double> scaled; // residual / max(1, u^2) per node
    double max_abs = 0.0;
    double max_abs_interior = 0.0;
};
residual_report residual_of(const model_params& p, const rate_curve& curve);

// Tridiagonal solve with partial pivoting (LAPACK dgtsv layout): dl below,
// d diagonal, du above, b right-hand side; solution replaces b.
void solve_tridiagonal(std::vector<double> dl, std::vector<double> d,
                       std::vector<double> du, std::vector<double>& b);

} // namespace ezlife
