#include "ezlife/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "ezlife/errors.hpp"

namespace ezlife {

namespace {

struct window {
    std::vector<double> ages, rates;
};

window in_window(const cohort_series& s, double age_lo, double age_hi,
                 const char* who) {
    if (!(age_lo < age_hi)) {
        std::ostringstream os;
        os << who << ": need age_lo < age_hi, got [" << age_lo << ", " << age_hi
           << "]";
        throw invalid_parameter_error(os.str());
    }
    if (s.ages.size() != s.rates.size())
        throw invalid_parameter_error(std::string(who) +
                                      ": series ages/rates length mismatch");
    window w;
    for (std::size_t i = 0; i < s.ages.size(); ++i) {
        if (s.ages[i] < age_lo || s.ages[i] > age_hi) continue;
        if (!(s.rates[i] > 0.0))
            throw invalid_parameter_error(std::string(who) +
                                          ": nonpositive rate in fit window");
        w.ages.push_back(s.ages[i]);
        w.rates.push_back(s.rates[i]);
    }
    return w;
}

} // namespace

gompertz_fit fit_gompertz(const cohort_series& series, double age_lo,
                          double age_hi) {
    const window w = in_window(series, age_lo, age_hi, "fit_gompertz");
    const std::size_t n = w.ages.size();
    if (n < 3) {
        std::ostringstream os;
        os << "fit_gompertz: need at least 3 points in [" << age_lo << ", "
           << age_hi << "], have " << n;
        throw invalid_parameter_error(os.str());
    }
    std::vector<double> logs(n);
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logs[i] = std::log(w.rates[i]);
        xbar += w.ages[i];
        ybar += logs[i];
    }
    xbar /= double(n);
    ybar /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = w.ages[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (logs[i] - ybar);
    }
    gompertz_fit out;
    out.beta = sxy / sxx;
    out.m0 = std::exp(ybar + out.beta * (age_lo - xbar));
    return out;
}

double mortality_mse(const mortality_path& model, const cohort_series& data,
                     double age_lo, double age_hi) {
    const window w = in_window(data, age_lo, age_hi, "mortality_mse");
    if (w.ages.empty())
        throw invalid_parameter_error("mortality_mse: no data ages in window");
    if (model.start_age() > w.ages.front() || model.end_age() < w.ages.back()) {
        std::ostringstream os;
        os << "mortality_mse: model path [" << model.start_age() << ", "
           << model.end_age() << "] does not cover data ages [" << w.ages.front()
           << ", " << w.ages.back() << "]";
        throw invalid_parameter_error(os.str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < w.ages.size(); ++i) {
        const double d = model.rate_at(w.ages[i]) - w.rates[i];
        acc += d * d;
    }
    return acc / double(w.ages.size());
}

double regression_baseline(const cohort_series& series, double age_lo,
                           double age_hi) {
    const gompertz_fit fit = fit_gompertz(series, age_lo, age_hi);
    const window w = in_window(series, age_lo, age_hi, "regression_baseline");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.ages.size(); ++i) {
        const double d =
            fit.m0 * std::exp(fit.beta * (w.ages[i] - age_lo)) - w.rates[i];
        acc += d * d;
    }
    return acc / double(w.ages.size());
}

solver_config calibration_inner_defaults() {
    solver_config cfg;
    cfg.mode = solve_mode::bounds;
    // The envelope evaluation per node carries the whole cost of an
    // objective call; 250 log-spaced nodes keep the interpolant error well
    // under the envelope width itself.
    cfg.n_nodes = 250;
    return cfg;
}

namespace {

using vec3 = std::array<double, 3>;

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

vec3 to_search(double a, double q, double m0) {
    return {std::log(a), logit(q), std::log(m0)};
}

// Shared, immutable context for objective evaluations; safe to use from
// several threads at once.
struct fit_ctx {
    const model_params* base;
    double beta;
    const optimizer_config* opt;
    cohort_series data;            // windowed copy of the target series
    std::vector<double> path_ages; // age_lo plus the data ages
    vec3 box_lo, box_hi;           // search box, transformed coordinates
};

// Objective: MSE of the endogenous hazard path against the data, plus a
// smooth quadratic charge for leaving the box and a large finite penalty
// (1 + band violation, far above any attainable rate MSE) for candidates
// whose growth band is empty. feasible reports whether the candidate
// produced a real MSE.
double eval_point(const fit_ctx& ctx, const vec3& x, bool& feasible) {
    feasible = false;
    double over = 0.0;
    for (int i = 0; i < 3; ++i) {
        over += std::max(0.0, x[i] - ctx.box_hi[i]);
        over += std::max(0.0, ctx.box_lo[i] - x[i]);
    }
    const double box_pen = over * over;
    const double a = std::exp(x[0]);
    const double q = expit(x[1]);
    const double m0 = std::exp(x[2]);
    try {
        const model_params cand =
            make_params(ctx.base->pref, ctx.base->mkt, ctx.beta, m0,
                        efficacy_power{a, q});
        const diagnostics diag = validate(cand);
        if (!diag.feasible) return 1.0 - diag.band_lo + box_pen;
        const rate_curve curve = solve_u_star(cand, ctx.opt->inner);
        const mortality_path path =
            integrate_endogenous(cand, curve, ctx.path_ages, ctx.opt->step);
        const double mse =
            mortality_mse(path, ctx.data, ctx.opt->age_lo, ctx.opt->age_hi);
        feasible = true;
        return mse + box_pen;
    } catch (const invalid_parameter_error&) {
        return 2.0 + box_pen;
    } catch (const non_convergence_error&) {
        return 2.0 + box_pen;
    }
}

struct eval_counter {
    const fit_ctx* ctx;
    long evals = 0;
    bool any_feasible = false;

    bool budget_left() const { return evals < ctx->opt->max_evals; }
    double operator()(const vec3& x) {
        if (!budget_left()) return std::numeric_limits<double>::infinity();
        ++evals;
        bool ok = false;
        const double f = eval_point(*ctx, x, ok);
        any_feasible = any_feasible || ok;
        return f;
    }
};

struct nm_result {
    vec3 x{};
    double f = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Nelder-Mead with the standard coefficients (reflect 1, expand 2, contract
// 1/2, shrink 1/2). Stops when the vertex spread drops under tol in every
// coordinate or the shared budget runs out.
nm_result nelder_mead(eval_counter& ev, const vec3& start, double scale,
                      double tol) {
    constexpr int n = 3;
    std::array<vec3, n + 1> xs;
    std::array<double, n + 1> fs;
    xs[0] = start;
    fs[0] = ev(xs[0]);
    for (int i = 0; i < n; ++i) {
        xs[i + 1] = start;
        xs[i + 1][std::size_t(i)] += scale;
        fs[i + 1] = ev(xs[i + 1]);
    }

    nm_result out;
    auto order = [&] {
        std::array<int, n + 1> idx = {0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int p, int r) {
            return fs[std::size_t(p)] < fs[std::size_t(r)] ||
                   (fs[std::size_t(p)] == fs[std::size_t(r)] && p < r);
        });
        const std::array<vec3, n + 1> tx = xs;
        const std::array<double, n + 1> tf = fs;
        for (int i = 0; i <= n; ++i) {
            xs[std::size_t(i)] = tx[std::size_t(idx[std::size_t(i)])];
            fs[std::size_t(i)] = tf[std::size_t(idx[std::size_t(i)])];
        }
    };

    for (;;) {
        order();
        out.x = xs[0];
        out.f = fs[0];
        double spread = 0.0;
        for (int i = 1; i <= n; ++i)
            for (int j = 0; j < n; ++j)
                spread = std::max(spread, std::fabs(xs[std::size_t(i)][std::size_t(j)] -
                                                    xs[0][std::size_t(j)]));
        if (spread <= tol) {
            out.converged = true;
            return out;
        }
        if (!ev.budget_left()) return out;

        vec3 centroid = {0.0, 0.0, 0.0};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                centroid[std::size_t(j)] += xs[std::size_t(i)][std::size_t(j)] / n;
        auto blend = [&](double t) {
            vec3 p;
            for (int j = 0; j < n; ++j)
                p[std::size_t(j)] = centroid[std::size_t(j)] +
                                    t * (centroid[std::size_t(j)] -
                                         xs[n][std::size_t(j)]);
            return p;
        };

        const vec3 xr = blend(1.0);
        const double fr = ev(xr);
        bool do_shrink = false;
        if (fr < fs[0]) {
            const vec3 xe = blend(2.0);
            const double fe = ev(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else if (fr < fs[n]) {
            const vec3 xc = blend(0.5); // outside contraction
            const double fc = ev(xc);
            if (fc <= fr) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                do_shrink = true;
            }
        } else {
            const vec3 xc = blend(-0.5); // inside contraction
            const double fc = ev(xc);
            if (fc < fs[n]) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                do_shrink = true;
            }
        }
        if (do_shrink) {
            for (int i = 1; i <= n; ++i) {
                for (int j = 0; j < n; ++j)
                    xs[std::size_t(i)][std::size_t(j)] =
                        0.5 * (xs[0][std::size_t(j)] +
                               xs[std::size_t(i)][std::size_t(j)]);
                fs[std::size_t(i)] = ev(xs[std::size_t(i)]);
            }
        }
        if (!ev.budget_left()) {
            order();
            out.x = xs[0];
            out.f = fs[0];
            return out;
        }
    }
}

void check_opt(const optimizer_config& opt) {
    const char* bad = nullptr;
    if (!(opt.a_lo > 0.0 && opt.a_lo < opt.a_hi)) bad = "a bounds";
    else if (!(opt.q_lo > 0.0 && opt.q_lo < opt.q_hi && opt.q_hi < 1.0))
        bad = "q bounds";
    else if (!(opt.m0_lo > 0.0 && opt.m0_lo < opt.m0_hi)) bad = "m0 bounds";
    else if (!(opt.tol > 0.0)) bad = "tol";
    else if (opt.max_evals <= 0) bad = "max_evals";
    else if (opt.restarts < 0) bad = "restarts";
    else if (!(opt.step > 0.0)) bad = "step";
    if (bad)
        throw invalid_parameter_error(std::string("fit_healthcare: invalid ") +
                                      bad + " in optimizer config");
}

} // namespace

calibration_result fit_healthcare(const cohort_series& series1940, double beta,
                                  const model_params& params,
                                  const optimizer_config& opt) {
    check_opt(opt);
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw invalid_parameter_error("fit_healthcare: beta must be positive");
    if (!(params.d.k_star > 0.0)) {
        std::ostringstream os;
        os << "fit_healthcare: zero-hazard consumption share k* = "
           << params.d.k_star << " is not positive; no solution exists for "
              "these preference and market parameters";
        throw invalid_parameter_error(os.str());
    }

    // Also enforces >= 3 in-window points with positive rates.
    const double regression_mse =
        regression_baseline(series1940, opt.age_lo, opt.age_hi);

    fit_ctx ctx;
    ctx.base = &params;
    ctx.beta = beta;
    ctx.opt = &opt;
    {
        const window w = in_window(series1940, opt.age_lo, opt.age_hi,
                                   "fit_healthcare");
        ctx.data.ages = w.ages;
        ctx.data.rates = w.rates;
        ctx.path_ages.push_back(opt.age_lo);
        for (double age : w.ages)
            if (age > ctx.path_ages.back()) ctx.path_ages.push_back(age);
    }
    ctx.box_lo = to_search(opt.a_lo, opt.q_lo, opt.m0_lo);
    ctx.box_hi = to_search(opt.a_hi, opt.q_hi, opt.m0_hi);

    eval_counter ev{&ctx};

    // Seed candidates: the caller's efficacy block when present, plus an
    // optional coarse grid over the box. Grid points are independent, so
    // they run on worker threads; slots are preassigned by index and the
    // later argmin scans in index order, which keeps the outcome identical
    // for any thread count.
    std::vector<vec3> seeds;
    if (params.efficacy)
        seeds.push_back(to_search(params.efficacy->a, params.efficacy->q,
                                  params.m0));
    constexpr int grid_n = 5;
    const long grid_total = grid_n * grid_n * grid_n;
    if (opt.grid_start && opt.max_evals >= grid_total + 100) {
        for (int i = 0; i < grid_n; ++i)
            for (int j = 0; j < grid_n; ++j)
                for (int k = 0; k < grid_n; ++k) {
                    vec3 p;
                    const double ti = double(i) / (grid_n - 1);
                    const double tj = double(j) / (grid_n - 1);
                    const double tk = double(k) / (grid_n - 1);
                    p[0] = ctx.box_lo[0] + ti * (ctx.box_hi[0] - ctx.box_lo[0]);
                    p[1] = ctx.box_lo[1] + tj * (ctx.box_hi[1] - ctx.box_lo[1]);
                    p[2] = ctx.box_lo[2] + tk * (ctx.box_hi[2] - ctx.box_lo[2]);
                    seeds.push_back(p);
                }
    }
    if (seeds.empty()) {
        vec3 mid;
        for (int j = 0; j < 3; ++j)
            mid[std::size_t(j)] =
                0.5 * (ctx.box_lo[std::size_t(j)] + ctx.box_hi[std::size_t(j)]);
        seeds.push_back(mid);
    }

    std::vector<double> seed_f(seeds.size());
    std::vector<char> seed_ok(seeds.size(), 0);
    {
        unsigned nt = opt.threads > 0 ? unsigned(opt.threads)
                                      : std::thread::hardware_concurrency();
        nt = std::max(1u, std::min({nt, 8u, unsigned(seeds.size())}));
        auto run_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                bool ok = false;
                seed_f[i] = eval_point(ctx, seeds[i], ok);
                seed_ok[i] = ok ? 1 : 0;
            }
        };
        if (nt <= 1) {
            run_range(0, seeds.size());
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (seeds.size() + nt - 1) / nt;
            for (unsigned t = 0; t < nt; ++t) {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(seeds.size(), lo + chunk);
                if (lo < hi) pool.emplace_back(run_range, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        ev.evals += long(seeds.size());
        for (char ok : seed_ok) ev.any_feasible = ev.any_feasible || ok;
    }
    std::size_t best_seed = 0;
    for (std::size_t i = 1; i < seeds.size(); ++i)
        if (seed_f[i] < seed_f[best_seed]) best_seed = i;

    nm_result best = nelder_mead(ev, seeds[best_seed], 0.25, opt.tol);
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> jit(0.0, 0.1);
    for (int r = 0; r < opt.restarts && ev.budget_left(); ++r) {
        vec3 start = best.x;
        for (int j = 0; j < 3; ++j) start[std::size_t(j)] += jit(rng);
        const nm_result cand = nelder_mead(ev, start, 0.25, opt.tol);
        if (cand.f < best.f) best = cand;
    }

    if (!ev.any_feasible)
        throw invalid_parameter_error(
            "fit_healthcare: no feasible (a, q, m0) candidate in the search "
            "box; the growth band g(I(psi-1)) < beta is empty everywhere "
            "tried");

    calibration_result res;
    res.beta = beta;
    res.a = std::exp(best.x[0]);
    res.q = expit(best.x[1]);
    res.m0_1940 = std::exp(best.x[2]);
    res.evaluations = ev.evals;
    res.converged = best.converged;
    res.regression_mse = regression_mse;
    // Recompute the final MSE through the plain pipeline so the reported
    // number carries no box penalty.
    {
        const model_params cand =
            make_params(params.pref, params.mkt, beta, res.m0_1940,
                        efficacy_power{res.a, res.q});
        const rate_curve curve = solve_u_star(cand, opt.inner);
        const mortality_path path =
            integrate_endogenous(cand, curve, ctx.path_ages, opt.step);
        res.model_mse = mortality_mse(path, ctx.data, opt.age_lo, opt.age_hi);
    }
    return res;
}

} // namespace ezlife
