#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_curve.hpp"

namespace ezlife {

// Fixed proportional controls: consumption u X, healthcare spending h X,
// constant risky share pi.
struct constant_policy {
    double consumption = 0.0;
    double healthcare = 0.0;
    double risky_fraction = 0.0;
};

// Either fixed rates, or a solved curve with rates looked up at the current
// hazard level and the Merton share pi_star. The curve must outlive the call.
using policy_source = std::variant<constant_policy, const rate_curve*>;

struct sim_config {
    long n_paths = 100000;
    double horizon = 30.0; // years; must be a whole number of dt steps
    double dt = 0.01;      // years per step
    std::uint64_t seed = 0;
    bool antithetic = false; // mirrored normals in pairs; n_paths must be even
    int threads = 0;         // 0 = hardware count; result is thread-count invariant
    double x0 = 1.0;         // initial wealth
};

struct wealth_stats {
    double mean_terminal_power = 0.0; // E[X_T^{1-gamma}] estimate
    double std_error = 0.0;
    double ruin_fraction = 0.0; // paths clamped at the numerical wealth floor
};

struct recursion_report {
    double lhs = 0.0;          // closed-form value at (x, m)
    double rhs_estimate = 0.0; // Monte-Carlo value-recursion right side
    double std_error = 0.0;
    double z_score = 0.0;
};

// The two benchmark regimes with known value functions: hazard frozen at m,
// or hazard growing exponentially from m with no healthcare control.
enum class regime_kind { no_aging, aging_no_healthcare };

struct lifetime_sample {
    // One age per draw; right-censored draws sit at the final grid age and
    // are counted in n_censored.
    std::vector<double> death_age;
    std::size_t n_censored = 0;
};

// Recursive-utility aggregator
//   f(c, v) = delta theta v [ (c ((1-gamma) v)^{-1/(1-gamma)})^{1-1/psi} - 1 ].
// Requires c >= 0 and (1-gamma) v > 0; a wrong-signed v is a hard error, not
// a NaN. Homogeneous: f(s c, s^{1-gamma} v) = s^{1-gamma} f(c, v).
double aggregator_f(const model_params& p, double c, double v);

// Value-recursion right side assembled on one uniform time grid by trapezoid
// rule: int_0^T e^{-H(s)} (f_s + zeta_pow M_s V_s) ds + e^{-H(T)} V_T, with
// H the prefix-trapezoid of M. M, f, V share the grid {0, dt, .., n dt}.
double recursion_rhs(const std::vector<double>& M, const std::vector<double>& f,
                     const std::vector<double>& V, double dt, double zeta_pow);

// Wealth paths under a proportional policy against a deterministic hazard
// path, by the exact log-Euler step
//   log X += (r + mu pi - h - u - sigma^2 pi^2 / 2) dt + sigma pi sqrt(dt) xi.
// Wealth stays positive by construction; the mortality path must cover
// [start_age, start_age + horizon] when a curve policy is used.
wealth_stats simulate_wealth(const policy_source& policy, const model_params& p,
                             const mortality_path& mortality, const sim_config& cfg);

// Death ages tau = inf{t : int M ds >= Z}, Z ~ Exp(1), with the cumulative
// hazard taken as the trapezoid prefix sum of the path and the crossing
// solved exactly on the linear segment. Draw i uses substream (seed, i).
lifetime_sample sample_lifetimes(const mortality_path& mortality, std::size_t n,
                                 std::uint64_t seed);

// Simulates the regime's optimal wealth, evaluates the closed-form value
// along each path, and compares the Monte-Carlo recursion right side at
// t = 0 against the closed form at (x, m). |z| <= 3 is the pass contract.
recursion_report verify_recursion(double x, double m, const model_params& p,
                                  const sim_config& cfg, regime_kind regime);

} // namespace ezlife
