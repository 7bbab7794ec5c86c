#include <cmath>
#include <vector>

#include "doctest.h"
#include "ezlife/errors.hpp"
#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"

using namespace ezlife;

namespace {

model_params us_params() {
    return make_params({2.0, 1.5, 0.03, 0.5}, {0.01, 0.052, 0.154},
                       0.0724069, 1.34995e-4, efficacy_power{0.19, 0.61});
}

model_params bare_params() {
    return make_params({2.0, 1.5, 0.03, 0.5}, {0.01, 0.052, 0.154},
                       0.0724069, 1.34995e-4);
}

std::vector<double> yearly(double a0, double a1) {
    std::vector<double> v;
    for (double a = a0; a <= a1 + 1e-9; a += 1.0) v.push_back(a);
    return v;
}

// Shared solved curve; the collocation solve is the expensive part.
const rate_curve& us_curve() {
    static const rate_curve c = solve_u_star(us_params(), solver_config{});
    return c;
}

// Independent cross-check integrator: forward Euler on log M with a tiny
// fixed step. First-order accurate, so agreement at the 1e-6 level checks
// the production integrator through an entirely different update rule.
double euler_terminal(const model_params& p, const rate_curve& curve,
                      double a0, double a1, double h) {
    double y = std::log(p.m0);
    const long n = std::lround((a1 - a0) / h);
    for (long i = 0; i < n; ++i)
        y += h * (p.beta - g_at_h_star(p, curve, std::exp(y)));
    return std::exp(y);
}

} // namespace

TEST_CASE("gompertz path is exactly exponential") {
    const auto p = us_params();
    const auto g = gompertz_path(p.m0, p.beta, yearly(40, 80));
    CHECK(g.kind == path_kind::gompertz);
    CHECK(g.ages.size() == 41);
    CHECK(g.rates.front() == p.m0);
    // Frozen: 1.34995e-4 * exp(0.0724069 * 40).
    CHECK(g.rates.back() ==
          doctest::Approx(2.444299213830869e-3).epsilon(1e-14));
    // Log-affine through every node, not just the ends.
    for (std::size_t i = 0; i < g.ages.size(); ++i)
        CHECK(std::log(g.rates[i] / p.m0) ==
              doctest::Approx(p.beta * (g.ages[i] - 40.0)).epsilon(1e-13));
}

TEST_CASE("least squares on a gompertz path recovers the slope") {
    const auto g = gompertz_path(2e-4, 0.0724069, yearly(40, 80));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(g.ages.size());
    for (std::size_t i = 0; i < g.ages.size(); ++i) {
        sx += g.ages[i];
        sy += std::log(g.rates[i]);
        sxx += g.ages[i] * g.ages[i];
        sxy += g.ages[i] * std::log(g.rates[i]);
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(0.0724069).epsilon(1e-12));
}

TEST_CASE("zero growth gives a constant path") {
    const auto g = gompertz_path(3e-3, 0.0, {50.0, 51.0, 60.0, 75.5});
    for (double r : g.rates) CHECK(r == 3e-3);
}

TEST_CASE("rate_at interpolates linearly in log M") {
    const auto g = gompertz_path(1.34995e-4, 0.0724069, yearly(40, 80));
    // Log-linear interpolation is exact on an exponential path, including
    // off-grid ages.
    for (double age : {40.0, 47.31, 55.5, 79.999, 80.0})
        CHECK(g.rate_at(age) ==
              doctest::Approx(1.34995e-4 * std::exp(0.0724069 * (age - 40.0)))
                  .epsilon(1e-14));
    CHECK_THROWS_AS((void)g.rate_at(39.99), invalid_parameter_error);
    CHECK_THROWS_AS((void)g.rate_at(80.01), invalid_parameter_error);
}

TEST_CASE("path construction rejects bad input") {
    CHECK_THROWS_AS(gompertz_path(0.0, 0.07, yearly(40, 50)), invalid_parameter_error);
    CHECK_THROWS_AS(gompertz_path(-1e-4, 0.07, yearly(40, 50)), invalid_parameter_error);
    CHECK_THROWS_AS(gompertz_path(1e-4, 0.07, {}), invalid_parameter_error);
    CHECK_THROWS_AS(gompertz_path(1e-4, 0.07, {40.0, 40.0, 41.0}), invalid_parameter_error);
    CHECK_THROWS_AS(gompertz_path(1e-4, 0.07, {40.0, 39.0}), invalid_parameter_error);
}

TEST_CASE("without healthcare the endogenous path is gompertz") {
    const auto p = bare_params();
    const auto curve = solve_u_star(p, solver_config{});
    const auto e = integrate_endogenous(p, curve, yearly(40, 80));
    const auto g = gompertz_path(p.m0, p.beta, yearly(40, 80));
    CHECK(e.kind == path_kind::endogenous);
    // The growth rate is constant, so the Runge-Kutta update telescopes into
    // the exact exponential; only rounding separates the two paths.
    for (std::size_t i = 0; i < e.rates.size(); ++i)
        CHECK(e.rates[i] == doctest::Approx(g.rates[i]).epsilon(1e-10));
}

TEST_CASE("no bequest penalty means no healthcare motive") {
    const auto p = make_params({2.0, 1.5, 0.03, 1.0}, {0.01, 0.052, 0.154},
                               0.0724069, 1.34995e-4, efficacy_power{0.19, 0.61});
    const auto curve = solve_u_star(p, solver_config{});
    REQUIRE(curve.flat());
    const auto e = integrate_endogenous(p, curve, yearly(40, 80));
    const auto g = gompertz_path(p.m0, p.beta, yearly(40, 80));
    for (std::size_t i = 0; i < e.rates.size(); ++i)
        CHECK(e.rates[i] == doctest::Approx(g.rates[i]).epsilon(1e-10));
}

TEST_CASE("endogenous path slows aging inside the admissible band") {
    const auto p = us_params();
    const auto e = integrate_endogenous(p, us_curve(), yearly(40, 80));
    const auto g = gompertz_path(p.m0, p.beta, yearly(40, 80));
    const auto band = validate(p);

    CHECK(e.rates.front() == p.m0);
    for (std::size_t i = 1; i < e.rates.size(); ++i) {
        CHECK(e.rates[i] > e.rates[i - 1]);
        // Optimal effort strictly slows growth but never stalls it.
        const double gr = std::log(e.rates[i] / e.rates[i - 1]) /
                          (e.ages[i] - e.ages[i - 1]);
        CHECK(gr < p.beta);
        CHECK(gr > band.band_lo);
        CHECK(e.rates[i] < g.rates[i]);
    }
    // Frozen terminal hazard at the default solver and step configuration;
    // cross-validated against the Euler oracle below.
    CHECK(e.rates.back() ==
          doctest::Approx(0.0023154090730192257).epsilon(1e-9));

    const double oracle = euler_terminal(p, us_curve(), 40.0, 80.0, 1e-3);
    CHECK(e.rates.back() == doctest::Approx(oracle).epsilon(3e-6));
}

TEST_CASE("step halving leaves the terminal hazard unchanged") {
    const auto p = us_params();
    const auto a = integrate_endogenous(p, us_curve(), {40.0, 80.0}, 0.05);
    const auto b = integrate_endogenous(p, us_curve(), {40.0, 80.0}, 0.025);
    CHECK(std::fabs(b.rates.back() / a.rates.back() - 1.0) < 1e-6);
    // Measured headroom: the default step is already at rounding level here.
    CHECK(std::fabs(b.rates.back() / a.rates.back() - 1.0) < 1e-10);
}

TEST_CASE("integration error decays at fourth order") {
    // A long horizon pushes the hazard into the range where the policy bites
    // hard, so the truncation error is visible above interpolation noise at
    // coarse steps. Successive halvings should shrink the terminal error by
    // about 16.
    const auto p = us_params();
    const std::vector<double> ages = {40.0, 150.0};
    const auto ref = integrate_endogenous(p, us_curve(), ages, 1.0 / 64.0);
    double prev = -1.0;
    for (double h : {11.0, 5.5, 2.75, 1.375}) {
        const auto eh = integrate_endogenous(p, us_curve(), ages, h);
        const double err = std::fabs(eh.rates.back() - ref.rates.back());
        if (prev > 0.0) {
            const double ratio = prev / err;
            CHECK(ratio > 12.0);
            CHECK(ratio < 20.0);
        }
        prev = err;
    }
}

TEST_CASE("endogenous integration is deterministic") {
    const auto p = us_params();
    const auto a = integrate_endogenous(p, us_curve(), yearly(40, 80));
    const auto b = integrate_endogenous(p, us_curve(), yearly(40, 80));
    REQUIRE(a.rates.size() == b.rates.size());
    for (std::size_t i = 0; i < a.rates.size(); ++i)
        CHECK(a.rates[i] == b.rates[i]);
}

TEST_CASE("integration rejects bad input and range exits") {
    const auto p = us_params();
    CHECK_THROWS_AS(integrate_endogenous(p, us_curve(), yearly(40, 80), 0.0),
                    invalid_parameter_error);
    CHECK_THROWS_AS(integrate_endogenous(p, us_curve(), {40.0, 39.0}),
                    invalid_parameter_error);
    CHECK_THROWS_AS(integrate_endogenous(p, us_curve(), {}),
                    invalid_parameter_error);

    // Saturating efficacy can push growth negative; the integrator refuses
    // to start rather than wander off the solved curve.
    const auto strong = make_params({2.0, 1.5, 0.03, 0.5}, {0.01, 0.052, 0.154},
                                    0.0724069, 1.34995e-4, efficacy_power{0.5, 0.61});
    CHECK_FALSE(validate(strong).feasible);
    CHECK_THROWS_AS(integrate_endogenous(strong, us_curve(), yearly(40, 80)),
                    invalid_parameter_error);

    // A curve that does not cover the starting hazard fails immediately with
    // the age attached.
    rate_curve narrow;
    const int n = 16;
    for (int i = 0; i < n; ++i) {
        const double m = 0.01 * std::exp(i * std::log(25.0) / (n - 1));
        narrow.grid.push_back(m);
        narrow.values.push_back(std::sqrt(1.0 + m));
        narrow.derivs.push_back(0.5 / std::sqrt(1.0 + m));
        narrow.lower.push_back(0.0);
        narrow.upper.push_back(10.0);
    }
    narrow.finalize();
    CHECK_THROWS_WITH_AS(integrate_endogenous(p, narrow, yearly(40, 80)),
                         doctest::Contains("near age"), invalid_parameter_error);
}
