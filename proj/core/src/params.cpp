#include "ezlife/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ezlife/errors.hpp"

namespace ezlife {

double efficacy_power::operator()(double h) const {
    if (h < 0.0)
        throw invalid_parameter_error("efficacy: h must be >= 0");
    return a * std::pow(h, q) / q;
}

double efficacy_power::slope(double h) const {
    if (h < 0.0)
        throw invalid_parameter_error("efficacy slope: h must be >= 0");
    if (h == 0.0)
        return std::numeric_limits<double>::infinity();
    return a * std::pow(h, q - 1.0);
}

double efficacy_power::slope_inverse(double y) const {
    if (!(y > 0.0))
        throw invalid_parameter_error("efficacy slope_inverse: y must be > 0");
    if (std::isinf(y))
        return 0.0;
    return std::pow(y / a, 1.0 / (q - 1.0));
}

void check_structure(const model_params& p) {
    const auto& pr = p.pref;
    auto fail = [](const std::string& msg) {
        throw invalid_parameter_error("params: " + msg);
    };
    if (!(pr.psi > 1.0))
        fail("psi must be > 1");
    if (pr.gamma == 1.0)
        fail("gamma = 1 is outside the supported preference family");
    if (!(pr.gamma > 1.0 / pr.psi))
        fail("gamma must exceed 1/psi");
    if (!(pr.delta > 0.0))
        fail("delta must be > 0");
    if (!(pr.zeta > 0.0 && pr.zeta <= 1.0))
        fail("zeta must lie in (0, 1]");
    if (!(p.mkt.sigma > 0.0))
        fail("sigma must be > 0");
    if (!(p.beta > 0.0))
        fail("beta must be > 0");
    if (!(p.m0 > 0.0))
        fail("m0 must be > 0");
    if (p.efficacy) {
        if (!(p.efficacy->a > 0.0))
            fail("efficacy a must be > 0");
        if (!(p.efficacy->q > 0.0 && p.efficacy->q < 1.0))
            fail("efficacy q must lie in (0, 1)");
    }
}

derived_constants derive_constants(const model_params& p) {
    const auto& pr = p.pref;
    derived_constants d;
    d.theta    = (1.0 - pr.gamma) / (1.0 - 1.0 / pr.psi);
    d.zeta_pow = std::pow(pr.zeta, 1.0 - pr.gamma);
    d.merton   = p.mkt.r + p.mkt.mu * p.mkt.mu / (2.0 * pr.gamma * p.mkt.sigma * p.mkt.sigma);
    d.k_star   = pr.delta * pr.psi + (1.0 - pr.psi) * d.merton;
    d.lambda_star = pr.delta * d.theta + (1.0 - d.theta) * d.k_star;
    d.pi_star  = p.mkt.mu / (pr.gamma * p.mkt.sigma * p.mkt.sigma);
    d.beta_lower = p.beta;
    if (p.efficacy) {
        // sup_h {g(h) - (psi-1) h} is attained where g'(h) = psi-1.
        const double h_bar = p.efficacy->slope_inverse(pr.psi - 1.0);
        d.beta_lower = p.beta - ((*p.efficacy)(h_bar) - (pr.psi - 1.0) * h_bar);
    }
    return d;
}

model_params make_params(preferences pref, market mkt, double beta, double m0,
                         std::optional<efficacy_power> efficacy) {
    model_params p;
    p.pref = pref;
    p.mkt = mkt;
    p.beta = beta;
    p.m0 = m0;
    p.efficacy = std::move(efficacy);
    check_structure(p);
    p.d = derive_constants(p);
    return p;
}

diagnostics validate(const model_params& p) {
    check_structure(p);
    const derived_constants d = derive_constants(p);
    diagnostics out;
    out.band_lo = p.beta;
    out.band_hi = p.beta;
    if (p.efficacy) {
        const double h_bar = p.efficacy->slope_inverse(p.pref.psi - 1.0);
        const double g_max = (*p.efficacy)(h_bar);
        out.band_lo = p.beta - g_max;
        out.feasible = g_max < p.beta;
        if (!out.feasible) {
            std::ostringstream os;
            os << "efficacy saturates hazard growth: g(I(psi-1)) = " << g_max
               << " >= beta = " << p.beta;
            out.notes.push_back(os.str());
        }
    }
    if (!(d.k_star > 0.0)) {
        std::ostringstream os;
        os << "k_star = " << d.k_star << " is not positive; "
              "closed-form rates are undefined for this parameter set";
        out.notes.push_back(os.str());
        out.feasible = false;
    }
    if (!(d.beta_lower > 0.0)) {
        std::ostringstream os;
        os << "beta_lower = " << d.beta_lower << " is not positive";
        out.notes.push_back(os.str());
        out.feasible = false;
    }
    return out;
}

double c0(const model_params& p, double m) {
    const auto& pr = p.pref;
    return p.d.k_star +
           (pr.psi - 1.0) * (1.0 - p.d.zeta_pow) * m / (1.0 - pr.gamma);
}

double c0_slope(const model_params& p) {
    const auto& pr = p.pref;
    return (pr.psi - 1.0) * (1.0 - p.d.zeta_pow) / (1.0 - pr.gamma);
}

} // namespace ezlife
