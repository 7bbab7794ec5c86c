#include "ezlife/mortality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ezlife/errors.hpp"
#include "ezlife/rate_ode.hpp"

namespace ezlife {

namespace {

void check_ages(const std::vector<double>& ages) {
    if (ages.empty())
        throw invalid_parameter_error("mortality_path: age grid is empty");
    for (std::size_t i = 0; i < ages.size(); ++i) {
        if (!std::isfinite(ages[i]))
            throw invalid_parameter_error("mortality_path: non-finite age");
        if (i > 0 && !(ages[i] > ages[i - 1]))
            throw invalid_parameter_error("mortality_path: ages must increase strictly");
    }
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

double mortality_path::rate_at(double age) const {
    if (ages.empty())
        throw invalid_parameter_error("mortality_path: empty path");
    if (!(age >= ages.front()) || !(age <= ages.back()))
        throw invalid_parameter_error("mortality_path: age " + short_num(age) +
                                      " outside [" + short_num(ages.front()) + ", " +
                                      short_num(ages.back()) + "]");
    auto it = std::lower_bound(ages.begin(), ages.end(), age);
    std::size_t hi = static_cast<std::size_t>(it - ages.begin());
    if (hi == 0) return rates.front();
    if (ages[hi] == age) return rates[hi];
    std::size_t lo = hi - 1;
    double w = (age - ages[lo]) / (ages[hi] - ages[lo]);
    return rates[lo] * std::pow(rates[hi] / rates[lo], w);
}

mortality_path gompertz_path(double m0, double beta, std::vector<double> ages) {
    if (!(m0 > 0.0) || !std::isfinite(m0))
        throw invalid_parameter_error("gompertz_path: m0 must be positive");
    if (!std::isfinite(beta))
        throw invalid_parameter_error("gompertz_path: beta must be finite");
    check_ages(ages);

    mortality_path out;
    out.rates.reserve(ages.size());
    for (double age : ages)
        out.rates.push_back(m0 * std::exp(beta * (age - ages.front())));
    out.ages = std::move(ages);
    out.kind = path_kind::gompertz;
    out.params_ref = "gompertz m0=" + short_num(m0) + " beta=" + short_num(beta);
    return out;
}

mortality_path integrate_endogenous(const model_params& p, const rate_curve& curve,
                                    std::vector<double> ages, double step) {
    check_structure(p);
    check_ages(ages);
    if (!(step > 0.0) || !std::isfinite(step))
        throw invalid_parameter_error("integrate_endogenous: step must be positive");

    // With efficacy in play the growth band must have positive width, else
    // maximal effort can stall or reverse the hazard and the path leaves the
    // regime the rate curve was solved on.
    const bool active = p.efficacy && !curve.flat();
    diagnostics diag = validate(p);
    if (active && !diag.feasible)
        throw invalid_parameter_error(
            "integrate_endogenous: infeasible efficacy, g(I(psi-1)) >= beta");
    const double band_lo = diag.band_lo;
    const double band_tol = 1e-10 * p.beta;

    // d log M / dt under the optimal policy. Flat curves and absent efficacy
    // short-circuit inside g_at_h_star, leaving pure Gompertz growth.
    auto growth_at = [&](double log_m) {
        return p.beta - g_at_h_star(p, curve, std::exp(log_m));
    };

    mortality_path out;
    out.rates.reserve(ages.size());
    double y = std::log(p.m0);
    out.rates.push_back(p.m0);
    double age = ages.front();
    try {
        for (std::size_t i = 1; i < ages.size(); ++i) {
            const double span = ages[i] - ages[i - 1];
            const int nsub = static_cast<int>(std::ceil(span / step - 1e-12));
            const double h = span / nsub;
            for (int s = 0; s < nsub; ++s) {
                age = ages[i - 1] + h * s;
                const double k1 = growth_at(y);
                const double k2 = growth_at(y + 0.5 * h * k1);
                const double k3 = growth_at(y + 0.5 * h * k2);
                const double k4 = growth_at(y + h * k3);
                const double dy = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (active) {
                    const double rate = dy / h;
                    if (rate < band_lo - band_tol || rate > p.beta + band_tol)
                        throw non_convergence_error(
                            "integrate_endogenous: growth rate " + short_num(rate) +
                            " left the band (" + short_num(band_lo) + ", " +
                            short_num(p.beta) + ") near age " + short_num(age));
                }
                y += dy;
            }
            out.rates.push_back(std::exp(y));
        }
    } catch (const invalid_parameter_error& e) {
        // Most likely the hazard ran off the solved curve range; add the age
        // so the caller can tell how far the path got.
        throw invalid_parameter_error("integrate_endogenous: near age " +
                                      short_num(age) + ": " + e.what());
    }

    out.ages = std::move(ages);
    out.kind = path_kind::endogenous;
    out.params_ref = "endogenous beta=" + short_num(p.beta) +
                     (p.efficacy ? " a=" + short_num(p.efficacy->a) +
                                       " q=" + short_num(p.efficacy->q)
                                 : std::string(" a=0")) +
                     " step=" + short_num(step);
    return out;
}

} // namespace ezlife
