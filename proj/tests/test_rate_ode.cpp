#include <cmath>
#include <random>

#include "doctest.h"
#include "ezlife/closed_form.hpp"
#include "ezlife/errors.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"
#include "oracles.hpp"

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

// Curve sampled from the no-healthcare closed form on a grid whose node 16
// lands exactly on m = 0.05.
rate_curve u_beta_curve(const model_params& p) {
    rate_curve c;
    const int n = 33;
    const double lo = 0.01, hi = 0.25;
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double m = lo * std::exp(i * step);
        c.grid.push_back(m);
        c.values.push_back(u_q(p, p.beta, m));
        c.derivs.push_back(u_q_prime(p, p.beta, m));
    }
    c.lower = c.values;
    c.upper = c.values;
    c.finalize();
    return c;
}

} // namespace

TEST_CASE("tridiagonal solve matches dense pivoted elimination") {
    std::mt19937 rng(562901);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const size_t n = 2 + rep % 11;
        std::vector<double> dl(n - 1), d(n), du(n - 1), b(n);
        for (auto& v : dl)
            v = coef(rng);
        for (auto& v : du)
            v = coef(rng);
        for (auto& v : b)
            v = coef(rng);
        for (auto& v : d)
            v = coef(rng) * 0.2; // small diagonal so pivoting actually happens
        if (rep % 7 == 0)
            d[0] = 0.0; // forces an immediate row swap

        const auto x = oracle::dense_tridiagonal_solve(dl, d, du, b);
        auto got = b;
        solve_tridiagonal(dl, d, du, got);
        double scale = 0.0;
        for (double v : x)
            scale = std::max(scale, std::abs(v));
        for (size_t i = 0; i < n; ++i)
            CHECK(got[i] == doctest::Approx(x[i]).epsilon(1e-10).scale(scale));
        // And the solution actually satisfies the system.
        for (size_t i = 0; i < n; ++i) {
            double r = d[i] * got[i] - b[i];
            if (i > 0)
                r += dl[i - 1] * got[i - 1];
            if (i + 1 < n)
                r += du[i] * got[i + 1];
            CHECK(std::abs(r) <= 1e-10 * std::max(1.0, scale));
        }
    }
    std::vector<double> bad = {1.0, 2.0};
    CHECK_THROWS_AS(solve_tridiagonal({}, {1.0}, {}, bad), invalid_parameter_error);
}

TEST_CASE("bounds mode returns the log-midpoint of the closed-form envelope") {
    solver_config cfg;
    cfg.mode = solve_mode::bounds;
    const auto curve = solve_u_star(us_params(), cfg);
    CHECK(curve.mode == solve_mode::bounds);
    CHECK(curve.stats.newton_iters == 0);
    // Frozen geometric midpoint of [u_{beta_lower}, u_beta] at m_min = 1e-7.
    CHECK(curve.values.front() == doctest::Approx(0.0258759934932204).epsilon(1e-12));
    // At interior m the midpoint reproduces the frozen envelope product.
    CHECK(curve.value_at(0.05) ==
          doctest::Approx(std::sqrt(0.071416806407651563 * 0.081972482498082184))
              .epsilon(1e-9));
    // Approximation mode: the residual is reported but not thresholded.
    const auto rep = residual_of(us_params(), curve);
    CHECK(rep.scaled.size() == curve.grid.size());
    CHECK(rep.max_abs >= rep.max_abs_interior);
}

TEST_CASE("collocation without healthcare reproduces the closed form") {
    const auto p = bare_params();
    const auto curve = solve_u_star(p, solver_config{});
    CHECK(curve.mode == solve_mode::collocation);
    CHECK(curve.stats.newton_iters >= 1);
    CHECK(curve.stats.max_scaled_residual <= 1e-10);
    for (double m : {1e-6, 1e-4, 0.01, 0.1, 1.0, 5.0, 19.0}) {
        const double want = u_q(p, p.beta, m);
        CHECK(curve.value_at(m) == doctest::Approx(want).epsilon(5e-6));
    }
    // Independent fourth-order residual check at the acceptance threshold.
    const auto rep = residual_of(p, curve);
    CHECK(rep.max_abs_interior <= 1e-6);
}

TEST_CASE("collocation with healthcare stays in the envelope and collocates") {
    const auto p = us_params();
    const auto curve = solve_u_star(p, solver_config{});
    CHECK(curve.stats.max_scaled_residual <= 1e-10);
    CHECK(curve.stats.newton_iters >= 1);

    const auto rep = residual_of(p, curve);
    CHECK(rep.max_abs_interior <= 1e-6);

    // Strictly inside the envelope wherever it has width.
    for (double m : {1e-6, 0.01, 0.1, 0.5, 2.0, 19.0}) {
        const double v = curve.value_at(m);
        CHECK(v > envelope_lower(p, m));
        CHECK(v < envelope_upper(p, m));
    }
}

TEST_CASE("collocation approaches the no-healthcare curve as efficacy vanishes") {
    auto p = us_params();
    p.efficacy->a = 1e-5;
    p = make_params(p.pref, p.mkt, p.beta, p.m0, p.efficacy);
    const auto curve = solve_u_star(p, solver_config{});
    // With a ~ 0, beta_lower ~ beta and the lower envelope is u_beta itself.
    double worst = 0.0;
    for (size_t i = 0; i < curve.grid.size(); ++i)
        worst = std::max(worst, std::abs(curve.values[i] - curve.lower[i]) /
                                    std::max(1.0, curve.lower[i]));
    CHECK(worst <= 1e-4);
}

TEST_CASE("healthcare policy agrees between its two arithmetic routes") {
    const auto p = us_params();
    const auto curve = solve_u_star(p, solver_config{});
    for (double m : {0.01, 0.05, 0.3, 2.0, 10.0}) {
        const double a = h_star(p, curve, m);
        const double b = h_star_power_form(p, curve, m);
        CHECK(a > 0.0);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(g_at_h_star(p, curve, m) ==
              doctest::Approx((*p.efficacy)(a)).epsilon(1e-12));
        // Spending never exceeds the saturation level I(psi - 1).
        CHECK(a < p.efficacy->slope_inverse(p.pref.psi - 1.0));
    }
}

TEST_CASE("policy along the frozen no-healthcare curve hits frozen digits") {
    const auto p = us_params();
    const auto curve = u_beta_curve(p);
    // h* and g(h*) at m = 0.05 on the u_beta curve, frozen from the 40-digit
    // quadrature of u and u' there.
    CHECK(h_star(p, curve, 0.05) == doctest::Approx(0.00968041430048).epsilon(1e-9));
    CHECK(g_at_h_star(p, curve, 0.05) ==
          doctest::Approx(0.0184000529219).epsilon(1e-9));
}

TEST_CASE("policy triple is consistent with the curve") {
    const auto p = us_params();
    const auto curve = solve_u_star(p, solver_config{});
    for (double m : {0.01, 0.7, 6.0}) {
        const auto pol = policy_at(p, curve, m);
        CHECK(pol.consumption_rate == curve.value_at(m));
        CHECK(pol.healthcare == h_star(p, curve, m));
        CHECK(pol.risky_fraction == doctest::Approx(1.0963062911114859).epsilon(1e-15));
    }
}

TEST_CASE("zeta = 1 collapses both modes to the flat k_star curve") {
    const auto p = make_params({2.0, 1.5, 0.03, 1.0}, {0.01, 0.052, 0.154},
                               0.0724069, 1.34995e-4, efficacy_power{0.19, 0.61});
    for (auto mode : {solve_mode::bounds, solve_mode::collocation}) {
        solver_config cfg;
        cfg.mode = mode;
        const auto curve = solve_u_star(p, cfg);
        CHECK(curve.flat());
        CHECK(curve.stats.newton_iters == 0);
        for (double v : curve.values)
            CHECK(v == p.d.k_star);
        for (double d : curve.derivs)
            CHECK(d == 0.0);
        CHECK(h_star(p, curve, 0.3) == 0.0);
        const auto pol = policy_at(p, curve, 0.3);
        CHECK(pol.consumption_rate == doctest::Approx(p.d.k_star).epsilon(1e-14));
        CHECK(pol.healthcare == 0.0);
    }
}

TEST_CASE("solver runs are deterministic") {
    const auto p = us_params();
    const auto a = solve_u_star(p, solver_config{});
    const auto b = solve_u_star(p, solver_config{});
    REQUIRE(a.values.size() == b.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i] == b.values[i]);
        CHECK(a.derivs[i] == b.derivs[i]);
    }
}

TEST_CASE("solver rejects unusable configurations") {
    const auto p = us_params();
    SUBCASE("grid too small") {
        solver_config cfg;
        cfg.n_nodes = 8;
        CHECK_THROWS_AS(solve_u_star(p, cfg), invalid_parameter_error);
    }
    SUBCASE("nonpositive m_min") {
        solver_config cfg;
        cfg.m_min = 0.0;
        CHECK_THROWS_AS(solve_u_star(p, cfg), invalid_parameter_error);
    }
    SUBCASE("inverted range") {
        solver_config cfg;
        cfg.m_min = 1.0;
        cfg.m_max = 0.5;
        CHECK_THROWS_AS(solve_u_star(p, cfg), invalid_parameter_error);
    }
    SUBCASE("m_max before the envelope has collapsed") {
        solver_config cfg;
        cfg.m_max = 0.5;
        CHECK_THROWS_WITH_AS(solve_u_star(p, cfg),
                             doctest::Contains("raise m_max"),
                             invalid_parameter_error);
    }
    SUBCASE("saturating efficacy") {
        const auto bad = make_params(p.pref, p.mkt, p.beta, p.m0,
                                     efficacy_power{0.5, 0.61});
        CHECK_THROWS_AS(solve_u_star(bad, solver_config{}), invalid_parameter_error);
    }
    SUBCASE("iteration cap reported as non-convergence") {
        solver_config cfg;
        cfg.max_iters = 0;
        CHECK_THROWS_AS(solve_u_star(p, cfg), non_convergence_error);
    }
}

TEST_CASE("independent residual check rejects short curves") {
    rate_curve c;
    CHECK_THROWS_AS(residual_of(us_params(), c), invalid_parameter_error);
}
