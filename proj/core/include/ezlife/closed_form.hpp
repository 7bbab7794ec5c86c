#pragma once

#include "ezlife/params.hpp"
#include "ezlife/quadrature.hpp"

namespace ezlife {

// Closed-form consumption-rate curves for the two benchmark regimes with a
// known solution: hazard growing at a constant exponential rate q with no
// healthcare control. u_q(m) solves
//
//     0 = u^2 - c0(m) u - q m u'(m),      u(0) = k_star,
//
// and admits the integral representation (after mapping the original
// half-line integral onto [0,1] and absorbing the endpoint singularity into
// the variable of integration)
//
//     u_q(m) = k_star / J(m),  J(m) = int_0^1 exp(-z(m) (w^{-1/s} - 1)) dw,
//
// with s = k_star / q and z(m) = m psi (1 - zeta^{1-gamma}) / (theta q) >= 0.
// The map w = (1-t)^s applied to the bounded-domain form keeps the integrand
// smooth in [0,1], makes u_q(0) = k_star exact, and the same integrand
// differentiated under the integral sign gives u_q'.
//
// Everything here requires k_star > 0 and q > 0; zeta = 1 collapses the whole
// family to the constant k_star.

// u_q(m) for aging rate q at hazard level m >= 0.
double u_q(const model_params& p, double q, double m, const quadrature_config& cfg = {});

// d u_q / dm by differentiation under the integral sign. Diverges to +inf as
// m -> 0 when s = k_star/q < 1; the exact limit k_star^2 psi (1-zeta^{1-gamma})
// / (theta q (s-1)) is returned at m = 0 when s > 1.
double u_q_prime(const model_params& p, double q, double m, const quadrature_config& cfg = {});

// Value and derivative in one pass, sharing the common integral. Preferred
// when curves are tabulated node by node.
struct uq_eval {
    double value = 0.0;
    double deriv = 0.0;
};
uq_eval u_q_with_prime(const model_params& p, double q, double m,
                       const quadrature_config& cfg = {});

// Cross-check route through the upper incomplete gamma function:
// u_q(m) = q z^{-s} / int_0^inf (z+v)^{-s-1} e^{-v} dv. Requires m > 0,
// gamma > 1 and zeta < 1. Intended for verification against u_q, not as the
// production path.
double u_q_gamma_check(const model_params& p, double q, double m,
                       const quadrature_config& cfg = {});

// Envelope around the full-control consumption rate: the no-control curve at
// the reduced aging rate from below, and from above the no-control curve at
// the raw rate capped by its far-field asymptote c0(m) + beta_lower.
double envelope_lower(const model_params& p, double m, const quadrature_config& cfg = {});
double envelope_upper(const model_params& p, double m, const quadrature_config& cfg = {});

// Scaled value function and the policy that attains it.
struct value_quote {
    double value = 0.0;
    double consumption = 0.0;     // optimal consumption level c = rate * x
    double risky_fraction = 0.0;  // constant share pi_star
};

// Frozen-hazard benchmark: value delta^theta x^{1-gamma}/(1-gamma) c0(m)^{-theta/psi}.
value_quote value_no_aging(const model_params& p, double x, double m);

// Exponentially-aging benchmark without healthcare: same shape with u_beta(m)
// in place of c0(m).
value_quote value_aging_no_healthcare(const model_params& p, double x, double m,
                                      const quadrature_config& cfg = {});

} // namespace ezlife
