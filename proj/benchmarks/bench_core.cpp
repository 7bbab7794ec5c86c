// Microbenchmarks for the hot paths: closed-form rate evaluations, both ODE
// solve modes, endogenous path integration, the calibration objective they
// compose into, and the Monte-Carlo kernels.

#include <benchmark/benchmark.h>

#include "ezlife/calibrate.hpp"
#include "ezlife/closed_form.hpp"
#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"
#include "ezlife/simulate.hpp"

#include <vector>

using namespace ezlife;

namespace {

const model_params& us_params() {
    static const model_params p =
        make_params({2.0, 1.5, 0.03, 0.5}, {0.01, 0.052, 0.154}, 0.0724069,
                    1.34995e-4, efficacy_power{0.19, 0.61});
    return p;
}

std::vector<double> fit_ages() {
    std::vector<double> ages;
    for (int a = 40; a <= 80; ++a) ages.push_back(double(a));
    return ages;
}

// Cohort-style target series for the objective benchmark, generated once.
const cohort_series& forward_series() {
    static const cohort_series data = [] {
        const auto curve =
            solve_u_star(us_params(), calibration_inner_defaults());
        const auto path =
            integrate_endogenous(us_params(), curve, fit_ages(), 0.05);
        cohort_series s;
        s.ages = path.ages;
        s.rates = path.rates;
        return s;
    }();
    return data;
}

void bm_u_q(benchmark::State& state) {
    const auto& p = us_params();
    double m = 1e-4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(u_q(p, p.beta, m));
        m = m < 1.0 ? m * 1.07 : 1e-4; // sweep the hazard range
    }
}
BENCHMARK(bm_u_q);

void bm_u_q_with_prime(benchmark::State& state) {
    const auto& p = us_params();
    double m = 1e-4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(u_q_with_prime(p, p.beta, m));
        m = m < 1.0 ? m * 1.07 : 1e-4;
    }
}
BENCHMARK(bm_u_q_with_prime);

void bm_solve_bounds(benchmark::State& state) {
    const auto& p = us_params();
    auto cfg = calibration_inner_defaults();
    cfg.n_nodes = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_u_star(p, cfg));
}
BENCHMARK(bm_solve_bounds)->Arg(250)->Arg(700);

void bm_solve_collocation(benchmark::State& state) {
    const auto& p = us_params();
    solver_config cfg;
    cfg.n_nodes = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_u_star(p, cfg));
}
BENCHMARK(bm_solve_collocation)->Arg(500)->Arg(2000);

void bm_integrate_endogenous(benchmark::State& state) {
    const auto& p = us_params();
    const auto curve = solve_u_star(p, calibration_inner_defaults());
    const auto ages = fit_ages();
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_endogenous(p, curve, ages, 0.05));
}
BENCHMARK(bm_integrate_endogenous);

// One full objective evaluation as the fit optimizer sees it: inner solve,
// path integration, windowed MSE.
void bm_calibration_objective(benchmark::State& state) {
    const auto& p = us_params();
    const auto& data = forward_series();
    const auto ages = fit_ages();
    for (auto _ : state) {
        const auto curve = solve_u_star(p, calibration_inner_defaults());
        const auto path = integrate_endogenous(p, curve, ages, 0.05);
        benchmark::DoNotOptimize(mortality_mse(path, data, 40.0, 80.0));
    }
}
BENCHMARK(bm_calibration_objective);

void bm_simulate_wealth(benchmark::State& state) {
    const auto& p = us_params();
    const auto path =
        gompertz_path(p.m0, p.beta, [] {
            std::vector<double> v;
            for (int a = 0; a <= 30; ++a) v.push_back(double(a));
            return v;
        }());
    constant_policy policy{p.d.k_star, 0.0, p.d.pi_star};
    sim_config cfg;
    cfg.n_paths = 1000;
    cfg.horizon = 10.0;
    cfg.dt = 0.01;
    cfg.seed = 7;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_wealth(policy, p, path, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_paths *
                            std::int64_t(cfg.horizon / cfg.dt));
}
BENCHMARK(bm_simulate_wealth);

void bm_sample_lifetimes(benchmark::State& state) {
    const auto& p = us_params();
    const auto path = gompertz_path(p.m0, p.beta, [] {
        std::vector<double> v;
        for (double a = 0.0; a <= 130.0; a += 0.25) v.push_back(a);
        return v;
    }());
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_lifetimes(path, 10000, 11));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(bm_sample_lifetimes);

} // namespace

BENCHMARK_MAIN();
