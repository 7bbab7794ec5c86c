#include "ezlife/closed_form.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ezlife/errors.hpp"

namespace ezlife {

namespace {

struct uq_setup {
    double s;      // k_star / q
    double z_coef; // dz/dm = psi (1 - zeta^{1-gamma}) / (theta q)
    double z;      // z_coef * m
};

uq_setup prepare(const model_params& p, double q, double m) {
    if (!(q > 0.0))
        throw invalid_parameter_error("u_q: aging rate q must be > 0");
    if (!(m >= 0.0))
        throw invalid_parameter_error("u_q: hazard m must be >= 0");
    if (!(p.d.k_star > 0.0)) {
        std::ostringstream os;
        os << "u_q: k_star = " << p.d.k_star
           << " must be positive for the closed-form curves";
        throw invalid_parameter_error(os.str());
    }
    uq_setup su;
    su.s = p.d.k_star / q;
    su.z_coef = p.pref.psi * (1.0 - p.d.zeta_pow) / (p.d.theta * q);
    if (su.z_coef < 0.0)
        throw invalid_parameter_error(
            "u_q: integrand diverges for this preference block (zeta > 1?)");
    su.z = su.z_coef * m;
    return su;
}

// phi(w) = w^{-1/s} - 1 evaluated without cancellation near w = 1.
inline double phi(double w, double s) {
    return std::expm1(-std::log(w) / s);
}

// 1 - J(z) = int_0^1 (1 - exp(-z phi(w))) dw. The integrand saturates at 1
// below the knee w ~ z^s, which can sit many decades under the unit interval;
// plain bisection cannot resolve it. Split at w0 where z phi(w0) = 41 (the
// integrand is 1 up to 2e-18 to the left) and integrate the right piece under
// the log map w = w0^{1-v}, which spends nodes evenly across the decades.
double one_minus_J(double z, double s, const quadrature_config& cfg) {
    const double T = 41.0;
    const double w0 = std::pow(1.0 + T / z, -s);
    const double lnw0 = std::log(w0);
    if (lnw0 == 0.0)
        return integrate01(
            [z, s](double w) { return w > 0.0 ? -std::expm1(-z * phi(w, s)) : 1.0; }, cfg);
    const double right = integrate01(
        [z, s, lnw0](double v) {
            const double w = std::exp((1.0 - v) * lnw0);
            return -std::expm1(-z * phi(w, s)) * (-lnw0) * w;
        },
        cfg);
    return w0 + right;
}

} // namespace

double u_q(const model_params& p, double q, double m, const quadrature_config& cfg) {
    const uq_setup su = prepare(p, q, m);
    if (su.z == 0.0)
        return p.d.k_star; // m = 0 or zeta = 1
    const double z = su.z, s = su.s;
    const double J = integrate01(
        [z, s](double w) { return w > 0.0 ? std::exp(-z * phi(w, s)) : 0.0; }, cfg);
    return p.d.k_star / J;
}

uq_eval u_q_with_prime(const model_params& p, double q, double m,
                       const quadrature_config& cfg) {
    const uq_setup su = prepare(p, q, m);
    uq_eval out;
    if (su.z_coef == 0.0) { // zeta = 1: the family is the constant k_star
        out.value = p.d.k_star;
        out.deriv = 0.0;
        return out;
    }
    if (m == 0.0) {
        out.value = p.d.k_star;
        out.deriv = su.s > 1.0 ? p.d.k_star * su.z_coef / (su.s - 1.0)
                               : std::numeric_limits<double>::infinity();
        return out;
    }
    const double z = su.z, s = su.s;
    const double J = integrate01(
        [z, s](double w) { return w > 0.0 ? std::exp(-z * phi(w, s)) : 0.0; }, cfg);
    // Differentiating under the integral sign gives K = int phi e^{-z phi} dw;
    // integrating that by parts reduces it to J itself: K = s (1-J)/z - J.
    const double K = s * one_minus_J(z, s, cfg) / z - J;
    out.value = p.d.k_star / J;
    out.deriv = p.d.k_star * su.z_coef * K / (J * J);
    return out;
}

double u_q_prime(const model_params& p, double q, double m, const quadrature_config& cfg) {
    return u_q_with_prime(p, q, m, cfg).deriv;
}

double u_q_gamma_check(const model_params& p, double q, double m,
                       const quadrature_config& cfg) {
    const uq_setup su = prepare(p, q, m);
    if (!(m > 0.0))
        throw invalid_parameter_error("u_q_gamma_check: requires m > 0");
    if (!(p.pref.gamma > 1.0) || !(p.pref.zeta < 1.0))
        throw invalid_parameter_error("u_q_gamma_check: requires gamma > 1 and zeta < 1");
    const double z = su.z, s = su.s;
    // int_z^inf t^{-s-1} e^{-t} dt = e^{-z} G with G below; the e^{-z} cancels
    // against the numerator, so neither factor is formed on its own.
    const double G = integrate01(
        [z, s](double y) {
            if (y >= 1.0)
                return 0.0;
            const double v = y / (1.0 - y);
            const double jac = 1.0 / ((1.0 - y) * (1.0 - y));
            return std::pow(z + v, -s - 1.0) * std::exp(-v) * jac;
        },
        cfg);
    return q * std::pow(z, -s) / G;
}

double envelope_lower(const model_params& p, double m, const quadrature_config& cfg) {
    return u_q(p, p.d.beta_lower, m, cfg);
}

double envelope_upper(const model_params& p, double m, const quadrature_config& cfg) {
    return std::min(u_q(p, p.beta, m, cfg), c0(p, m) + p.d.beta_lower);
}

namespace {

value_quote quote_from_rate(const model_params& p, double x, double rate) {
    if (!(x > 0.0))
        throw invalid_parameter_error("value: wealth x must be > 0");
    if (!(rate > 0.0)) {
        std::ostringstream os;
        os << "value: consumption rate " << rate << " is not positive for this "
              "parameter set";
        throw invalid_parameter_error(os.str());
    }
    const double gamma = p.pref.gamma;
    value_quote out;
    out.value = std::pow(p.pref.delta, p.d.theta) *
                std::pow(x, 1.0 - gamma) / (1.0 - gamma) *
                std::pow(rate, -p.d.theta / p.pref.psi);
    out.consumption = rate * x;
    out.risky_fraction = p.d.pi_star;
    return out;
}

} // namespace

value_quote value_no_aging(const model_params& p, double x, double m) {
    if (!(m >= 0.0))
        throw invalid_parameter_error("value_no_aging: hazard m must be >= 0");
    return quote_from_rate(p, x, c0(p, m));
}

value_quote value_aging_no_healthcare(const model_params& p, double x, double m,
                                      const quadrature_config& cfg) {
    return quote_from_rate(p, x, u_q(p, p.beta, m, cfg));
}

} // namespace ezlife
