#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ezlife {

// Recursive-utility preference block. gamma is relative risk aversion, psi the
// elasticity of intertemporal substitution, delta the utility discount rate,
// zeta the multiplier applied to continuation value at death. The code
// requires psi > 1, gamma > 1/psi, gamma != 1 and zeta in (0, 1]; theta is the
// usual curvature ratio (1-gamma)/(1-1/psi), negative whenever gamma > 1.
struct preferences {
    double gamma = 2.0;
    double psi   = 1.5;
    double delta = 0.03;
    double zeta  = 0.5;
};

// Frictionless market: risk-free rate r, excess return mu, volatility sigma.
struct market {
    double r     = 0.01;
    double mu    = 0.052;
    double sigma = 0.154;
};

// Healthcare efficacy g(h) = a h^q / q, a > 0, 0 < q < 1. slope() is g'(h)
// and returns +inf at h = 0 (the curve is steep at the origin by design);
// slope_inverse() is I(y) = (y/a)^{1/(q-1)} with domain y > 0.
struct efficacy_power {
    double a = 0.0;
    double q = 0.5;

    double operator()(double h) const;
    double slope(double h) const;
    double slope_inverse(double y) const;
};

// Constants derived once from the raw blocks; see derive_constants().
//   merton       r + mu^2 / (2 gamma sigma^2)
//   k_star       consumption-wealth ratio at zero hazard
//                = delta psi + (1-psi) merton
//   lambda_star  decay rate of the wealth-power expectation
//                = delta theta + (1-theta) k_star
//   pi_star      risky-asset fraction mu / (gamma sigma^2)
//   beta_lower   beta - sup_h {g(h) - (psi-1) h}; equals beta without efficacy
struct derived_constants {
    double theta       = 0.0;
    double zeta_pow    = 0.0; // zeta^(1-gamma), cached
    double merton      = 0.0;
    double k_star      = 0.0;
    double lambda_star = 0.0;
    double pi_star     = 0.0;
    double beta_lower  = 0.0;
};

// Validation outcome that is advisory rather than fatal. feasible means the
// hazard growth rate stays positive under maximal healthcare effort:
// g(I(psi-1)) < beta. band is the open interval of admissible log-growth
// rates (beta - g(I(psi-1)), beta); it collapses to [beta, beta] without
// efficacy.
struct diagnostics {
    bool feasible = true;
    double band_lo = 0.0;
    double band_hi = 0.0;
    std::vector<std::string> notes;
};

// One validated parameter set. Construct with make_params() or
// params_from_config(); both reject structurally invalid inputs and fill the
// derived block. All rates are per-year in natural units (0.01, not 1%).
struct model_params {
    preferences pref;
    market mkt;
    double beta = 0.07; // baseline exponential hazard growth rate, > 0
    double m0   = 1e-4; // hazard at model time zero, > 0
    std::optional<efficacy_power> efficacy;
    derived_constants d;
};

// Throws invalid_parameter_error on structural violations (gamma = 1, psi <= 1,
// gamma <= 1/psi, zeta outside (0,1], nonpositive delta/sigma/beta/m0, bad
// efficacy exponents). Parameter combinations that are structurally fine but
// economically degenerate (k_star <= 0, infeasible efficacy) pass here and are
// reported by validate(); downstream routines that need them throw instead.
void check_structure(const model_params& p);

derived_constants derive_constants(const model_params& p);

// check_structure + derive_constants in one step.
model_params make_params(preferences pref, market mkt, double beta, double m0,
                         std::optional<efficacy_power> efficacy = std::nullopt);

diagnostics validate(const model_params& p);

// Optimal consumption-wealth ratio when the hazard is frozen at m:
// c0(m) = k_star + (psi-1)(1 - zeta^(1-gamma)) m / (1-gamma).
// Increasing in m for zeta < 1; constant k_star at zeta = 1.
double c0(const model_params& p, double m);

// Slope of c0 in m (the hazard-load on consumption).
double c0_slope(const model_params& p);

} // namespace ezlife
