// Acceptance gate: runs the nine release criteria and prints one status line
// each. Criterion 8 refits real cohort files and reports SKIP when none are
// installed; everything else is self-contained. Nonzero exit iff any FAIL.

#include "ezlife/calibrate.hpp"
#include "ezlife/closed_form.hpp"
#include "ezlife/data_io.hpp"
#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"
#include "ezlife/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace ezlife;
namespace fs = std::filesystem;

namespace {

struct outcome {
    std::string status = "PASS"; // PASS | FAIL | SKIP
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            status = "FAIL";
            notes.push_back(what);
        }
    }
    void skip(const std::string& why) {
        status = "SKIP";
        notes.push_back(why);
    }
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

model_params us_params(double zeta = 0.5) {
    return make_params({2.0, 1.5, 0.03, zeta}, {0.01, 0.052, 0.154}, 0.0724069,
                       1.34995e-4, efficacy_power{0.19, 0.61});
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
    return g;
}

std::vector<double> span_ages(double a0, double a1, double step) {
    std::vector<double> v;
    for (double a = a0; a < a1 + step / 2; a += step) v.push_back(a);
    return v;
}

// 1. Derived constants against a from-scratch arithmetic route, plus the
// frozen full-precision digits. The shortened reference digits carry loose
// rounding in their last place, hence the 1e-5 comparison.
void c1_constants(outcome& o) {
    const auto p = us_params();
    const double merton = 0.01 + 0.052 * 0.052 / (2.0 * 2.0 * 0.154 * 0.154);
    const double k = 0.03 * 1.5 + (1.0 - 1.5) * merton;
    const double theta = (1.0 - 2.0) / (1.0 - 1.0 / 1.5);
    const double lam = 0.03 * theta + (1.0 - theta) * k;
    const double pi = 0.052 / (2.0 * 0.154 * 0.154);

    o.require(std::fabs(p.d.k_star - k) <= 1e-6, "k* vs oracle: " + num(p.d.k_star));
    o.require(std::fabs(p.d.lambda_star - lam) <= 1e-6,
              "lambda* vs oracle: " + num(p.d.lambda_star));
    o.require(std::fabs(p.d.pi_star - pi) <= 1e-6,
              "pi* vs oracle: " + num(p.d.pi_star));

    o.require(std::fabs(p.d.k_star - 0.025748018215550683) <= 1e-12,
              "k* frozen digits");
    o.require(std::fabs(p.d.lambda_star - 0.012992072862202732) <= 1e-12,
              "lambda* frozen digits");
    o.require(std::fabs(p.d.pi_star - 1.0963062911114859) <= 1e-12,
              "pi* frozen digits");

    o.require(std::fabs(p.d.k_star - 0.025748) <= 1e-5, "k* reference digits");
    o.require(std::fabs(p.d.lambda_star - 0.012991) <= 1e-5,
              "lambda* reference digits");
    o.require(std::fabs(p.d.pi_star - 1.09631) <= 1e-5, "pi* reference digits");
}

// 2. Closed-form rate family: strict sandwich c0 < u_q < c0 + q on 200
// log-spaced hazards, boundary value k*, and the ODE residual built from the
// differentiated-under-the-integral derivative.
void c2_closed_form(outcome& o) {
    const auto p = us_params();
    o.require(std::fabs(u_q(p, p.beta, 0.0) - p.d.k_star) <= 1e-8,
              "u_q(0) = k*");
    const auto ms = log_grid(1e-5, 1.0, 200);
    for (const double q : {p.d.beta_lower, p.beta}) {
        bool sandwich = true;
        double worst = 0.0;
        for (const double m : ms) {
            const auto e = u_q_with_prime(p, q, m);
            const double base = c0(p, m);
            sandwich = sandwich && base < e.value && e.value < base + q;
            const double r =
                e.value * e.value - base * e.value - q * m * e.deriv;
            worst = std::max(worst, std::fabs(r) / std::max(1.0, e.value * e.value));
        }
        o.require(sandwich, "strict sandwich at q = " + num(q));
        o.require(worst <= 1e-5,
                  "ODE residual " + num(worst) + " at q = " + num(q));
    }
}

// 3. Full nonlinear curve at 2000 collocation nodes: residual at every node,
// monotone and concave shape, the no-efficacy limit, and the zeta = 1
// collapse; each solve timed against the 30 s budget.
void c3_u_star(outcome& o) {
    solver_config cfg; // collocation, 2000 nodes
    const auto timed_solve = [&](const model_params& p) {
        const auto t0 = std::chrono::steady_clock::now();
        rate_curve curve = solve_u_star(p, cfg);
        const double dt = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        o.require(dt < 30.0, "solve took " + num(dt) + " s");
        return curve;
    };

    const auto p = us_params();
    const auto curve = timed_solve(p);
    o.require(curve.stats.max_scaled_residual <= cfg.newton_tol,
              "node residual " + num(curve.stats.max_scaled_residual));
    const auto rep = residual_of(p, curve);
    o.require(rep.max_abs_interior <= 1e-6,
              "independent stencil residual " + num(rep.max_abs_interior));

    bool increasing = true, concave = true;
    for (std::size_t i = 0; i + 1 < curve.values.size(); ++i) {
        increasing = increasing && curve.values[i + 1] > curve.values[i];
        if (i + 2 < curve.values.size()) {
            const double s0 = (curve.values[i + 1] - curve.values[i]) /
                              (curve.grid[i + 1] - curve.grid[i]);
            const double s1 = (curve.values[i + 2] - curve.values[i + 1]) /
                              (curve.grid[i + 2] - curve.grid[i + 1]);
            concave = concave &&
                      s1 <= s0 + curve.concavity_slack *
                                     std::max(std::fabs(s0), std::fabs(s1));
        }
    }
    o.require(increasing, "values strictly increasing");
    o.require(concave, "chord slopes nonincreasing");

    // Vanishing efficacy: the curve lands on the no-control family.
    const auto p_small =
        make_params(p.pref, p.mkt, p.beta, p.m0, efficacy_power{1e-5, 0.61});
    const auto curve_small = timed_solve(p_small);
    double gap = 0.0;
    for (std::size_t i = 0; i < curve_small.grid.size(); ++i)
        gap = std::max(gap, std::fabs(curve_small.values[i] -
                                      u_q(p_small, p.beta, curve_small.grid[i])));
    o.require(gap <= 1e-4, "a -> 0 gap to u_beta " + num(gap));

    // Full retention: constant k*.
    const auto p_one = us_params(1.0);
    const auto curve_one = timed_solve(p_one);
    double flat_gap = 0.0;
    for (const double v : curve_one.values)
        flat_gap = std::max(flat_gap, std::fabs(v - p_one.d.k_star));
    o.require(flat_gap <= 1e-10, "zeta = 1 gap to k* " + num(flat_gap));
}

// 4. Endogenous mortality growth stays strictly inside the admissible band
// and the no-efficacy path is exactly Gompertz.
void c4_mortality_band(outcome& o) {
    const auto p = us_params();
    const auto d = validate(p);
    o.require(d.feasible, "efficacy feasible");
    o.require(std::fabs(d.band_hi - 0.0724069) <= 1e-12, "band ceiling is beta");
    // Reference digits for the floor carry rounded source arithmetic.
    o.require(std::fabs(d.band_lo - 0.003838) <= 1e-5,
              "band floor " + num(d.band_lo));

    solver_config cfg;
    cfg.mode = solve_mode::bounds;
    cfg.n_nodes = 800;
    const auto ages = span_ages(40.0, 110.0, 0.25);
    const auto path = integrate_endogenous(p, solve_u_star(p, cfg), ages, 0.05);
    bool inside = true;
    for (std::size_t i = 0; i + 1 < path.rates.size(); ++i) {
        const double growth = std::log(path.rates[i + 1] / path.rates[i]) /
                              (path.ages[i + 1] - path.ages[i]);
        inside = inside && d.band_lo < growth && growth < d.band_hi;
    }
    o.require(inside, "per-step log growth inside the open band");

    const auto p0 = make_params(p.pref, p.mkt, p.beta, p.m0);
    const auto path0 =
        integrate_endogenous(p0, solve_u_star(p0, cfg), ages, 0.05);
    const auto ref = gompertz_path(p.m0, p.beta, ages);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.rates.size(); ++i)
        worst = std::max(worst,
                         std::fabs(path0.rates[i] / ref.rates[i] - 1.0));
    o.require(worst <= 1e-10, "no-efficacy path vs Gompertz " + num(worst));
}

// 5. Monte-Carlo value recursion at 1e5 paths, dt = 0.01, T = 30 for both
// closed-form regimes, plus horizon stability T -> 2T.
void c5_recursion(outcome& o) {
    sim_config cfg;
    cfg.n_paths = 100000;
    cfg.dt = 0.01;
    cfg.horizon = 30.0;

    cfg.seed = 101;
    const auto frozen30 =
        verify_recursion(1.0, 0.01, us_params(), cfg, regime_kind::no_aging);
    o.require(std::fabs(frozen30.z_score) <= 3.0,
              "frozen-hazard z = " + num(frozen30.z_score));

    cfg.seed = 107;
    const auto aging30 = verify_recursion(1.0, 0.01, us_params(1.0), cfg,
                                          regime_kind::aging_no_healthcare);
    o.require(std::fabs(aging30.z_score) <= 3.0,
              "aging full-bequest z = " + num(aging30.z_score));

    // Doubled horizon reuses each regime's seed so the path bodies are
    // shared and only the tail contribution moves the estimate.
    cfg.horizon = 60.0;
    cfg.seed = 101;
    const auto frozen60 =
        verify_recursion(1.0, 0.01, us_params(), cfg, regime_kind::no_aging);
    cfg.seed = 107;
    const auto aging60 = verify_recursion(1.0, 0.01, us_params(1.0), cfg,
                                          regime_kind::aging_no_healthcare);

    const auto stable = [](const recursion_report& a, const recursion_report& b) {
        const double se = std::sqrt(a.std_error * a.std_error +
                                    b.std_error * b.std_error);
        return std::fabs(a.rhs_estimate - b.rhs_estimate) < 2.0 * se;
    };
    o.require(stable(frozen30, frozen60), "frozen-hazard horizon stability");
    o.require(stable(aging30, aging60), "aging horizon stability");
}

// 6. Lifetime sampler against the analytic Gompertz survival law,
// Kolmogorov-Smirnov at the 1% level.
void c6_lifetimes(outcome& o) {
    const double m0 = 1.34995e-4, beta = 0.0724069;
    const auto path = gompertz_path(m0, beta, span_ages(0.0, 130.0, 0.25));
    const auto ls = sample_lifetimes(path, 100000, 29);
    o.require(ls.n_censored == 0, "no censored draws");
    auto xs = ls.death_age;
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f =
            1.0 - std::exp(-(m0 / beta) * (std::exp(beta * xs[i]) - 1.0));
        d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
    }
    o.require(d * std::sqrt(n) < 1.628,
              "KS statistic sqrt(n) D = " + num(d * std::sqrt(n)));
}

// 7. Calibration round trip: refit the model's own hazard path from a
// perturbed start and land back on the generating parameters.
void c7_round_trip(outcome& o) {
    const auto p = us_params();
    const auto curve = solve_u_star(p, calibration_inner_defaults());
    std::vector<double> ages;
    for (int a = 40; a <= 80; ++a) ages.push_back(double(a));
    const auto fwd = integrate_endogenous(p, curve, ages, 0.05);
    cohort_series data;
    data.ages = fwd.ages;
    data.rates = fwd.rates;

    const auto start =
        make_params(p.pref, p.mkt, p.beta, 1.1e-4, efficacy_power{0.15, 0.55});
    optimizer_config opt;
    opt.grid_start = false;
    opt.restarts = 1;
    const auto res = fit_healthcare(data, 0.0724069, start, opt);

    o.require(res.converged, "optimizer converged");
    o.require(res.model_mse < 1e-12, "objective " + num(res.model_mse));
    o.require(std::fabs(res.a - 0.19) < 0.02, "a = " + num(res.a));
    o.require(std::fabs(res.q - 0.61) < 0.02, "q = " + num(res.q));
    o.require(std::fabs(res.m0_1940 / 1.34995e-4 - 1.0) < 0.05,
              "m0 = " + num(res.m0_1940));
}

// 8. Real cohort refits. Files are searched under EZLIFE_HMD_DIR (default:
// the repository data/hmd directory) by country code; any accepted alias may
// be used. Absent files make this criterion SKIP, never FAIL.
void c8_reference_data(outcome& o) {
    struct country_case {
        const char* name;
        std::vector<const char*> files;
        double beta_ref, mse_ref; // fitted growth rate and model MSE
        double a, q, gomp_lo, gomp_hi, fit_lo, fit_hi;
    };
    const std::vector<country_case> cases = {
        {"US", {"USA.txt", "USA.cMx_1x1.txt"}, 0.0724069, 4.36896e-8, //
         0.19, 0.61, 40, 95, 40, 80},
        {"UK",
         {"UK.txt", "GBR_NP.txt", "GBR_NP.cMx_1x1.txt", "GBRTENW.txt",
          "GBRTENW.cMx_1x1.txt"},
         0.0779605, 2.49924e-8, 0.19, 0.60, 40, 95, 40, 80},
        {"NL", {"NL.txt", "NLD.txt", "NLD.cMx_1x1.txt"}, 0.0865832,
         4.78583e-8, 0.16, 0.53, 46, 95, 40, 80},
        {"BG", {"BG.txt", "BGR.txt", "BGR.cMx_1x1.txt"}, 0.0886593,
         9.23716e-7, 0.14, 0.56, 47, 77, 47, 77},
    };

    const char* env = std::getenv("EZLIFE_HMD_DIR");
    const fs::path dir = env ? fs::path(env) : fs::path(EZLIFE_DATA_DIR);

    std::vector<std::pair<const country_case*, fs::path>> found;
    std::vector<std::string> missing;
    for (const auto& c : cases) {
        fs::path hit;
        for (const char* f : c.files)
            if (fs::exists(dir / f)) {
                hit = dir / f;
                break;
            }
        if (hit.empty())
            missing.push_back(c.name);
        else
            found.emplace_back(&c, hit);
    }
    if (!missing.empty()) {
        std::string why = "cohort files not found under " + dir.string() +
                          " for:";
        for (const auto& m : missing) why += " " + m;
        o.skip(why + " (set EZLIFE_HMD_DIR)");
        return;
    }

    for (const auto& [c, file] : found) {
        const auto s1900 = load_hmd_cohort(file.string(), 1900);
        const auto s1940 = load_hmd_cohort(file.string(), 1940);
        const auto gfit = fit_gompertz(s1900, c->gomp_lo, c->gomp_hi);
        o.require(std::fabs(gfit.beta - c->beta_ref) <= 1e-3,
                  std::string(c->name) + " beta " + num(gfit.beta));

        optimizer_config opt;
        opt.age_lo = c->fit_lo;
        opt.age_hi = c->fit_hi;
        // Warm start at the reference efficacy and the observed window-start
        // rate; the grid seeding covers the rest of the box.
        double m_start = 0.0;
        for (std::size_t i = 0; i < s1940.ages.size(); ++i)
            if (s1940.ages[i] >= c->fit_lo && m_start == 0.0)
                m_start = s1940.rates[i];
        const auto warm = make_params({2.0, 1.5, 0.03, 0.5},
                                      {0.01, 0.052, 0.154}, gfit.beta, m_start,
                                      efficacy_power{c->a, c->q});
        const auto res = fit_healthcare(s1940, gfit.beta, warm, opt);
        o.require(res.converged,
                  std::string(c->name) + " healthcare fit converged");
        o.require(res.model_mse <= 2.0 * c->mse_ref,
                  std::string(c->name) + " model MSE " + num(res.model_mse));
        o.require(res.model_mse < res.regression_mse,
                  std::string(c->name) + " model beats the regression line");
    }
}

// 9. Feasibility margin: healthcare can slow aging but never reverse it,
// g(I(psi - 1)) < beta for every fitted parameter set.
void c9_feasibility(outcome& o) {
    struct row {
        const char* name;
        double beta, m0, a, q;
    };
    const row rows[] = {
        {"US", 0.0724069, 1.34995e-4, 0.19, 0.61},
        {"UK", 0.0779605, 8.43827e-5, 0.19, 0.60},
        {"NL", 0.0865832, 4.77551e-5, 0.16, 0.53},
        {"BG", 0.0886593, 8.92038e-5, 0.14, 0.56},
    };
    for (const auto& r : rows) {
        const auto p = make_params({2.0, 1.5, 0.03, 0.5}, {0.01, 0.052, 0.154},
                                   r.beta, r.m0, efficacy_power{r.a, r.q});
        const auto d = validate(p);
        o.require(d.feasible && d.band_lo > 0.0,
                  std::string(r.name) + " g(I(psi-1)) < beta");
        if (std::string(r.name) == "US") {
            const double g = r.beta - d.band_lo;
            o.require(g < 0.0724069, "US margin strict: " + num(g));
            // Reference digits carry rounded source arithmetic.
            o.require(std::fabs(g - 0.068569) <= 1e-5,
                      "US g(I(psi-1)) " + num(g));
        }
    }
}

} // namespace

int main() {
    struct entry {
        int id;
        const char* title;
        void (*fn)(outcome&);
    };
    const entry entries[] = {
        {1, "derived constants", c1_constants},
        {2, "closed-form rate family", c2_closed_form},
        {3, "nonlinear consumption curve", c3_u_star},
        {4, "endogenous mortality band", c4_mortality_band},
        {5, "value recursion", c5_recursion},
        {6, "lifetime sampler", c6_lifetimes},
        {7, "calibration round trip", c7_round_trip},
        {8, "reference cohort refits", c8_reference_data},
        {9, "feasibility margin", c9_feasibility},
    };

    bool any_fail = false;
    for (const auto& e : entries) {
        outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            e.fn(o);
        } catch (const std::exception& ex) {
            o.status = "FAIL";
            o.notes.push_back(std::string("unexpected error: ") + ex.what());
        }
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        std::printf("criterion %d: %-4s %s (%.1f s)\n", e.id, o.status.c_str(),
                    e.title, secs);
        for (const auto& n : o.notes) std::printf("    - %s\n", n.c_str());
        any_fail = any_fail || o.status == "FAIL";
    }
    return any_fail ? 1 : 0;
}
