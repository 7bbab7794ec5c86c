#include "ezlife/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ezlife/closed_form.hpp"
#include "ezlife/errors.hpp"
#include "ezlife/rate_ode.hpp"
#include "ezlife/rng.hpp"

namespace ezlife {

namespace {

// Deterministic regardless of accumulation order elsewhere: the tree shape
// depends only on n.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

struct mean_se {
    double mean = 0.0;
    double se = 0.0;
};

mean_se reduce(const std::vector<double>& vals) {
    mean_se out;
    const std::size_t n = vals.size();
    out.mean = pairwise_sum(vals.data(), n) / double(n);
    if (n < 2) return out;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = vals[i] - out.mean;
        sq[i] = d * d;
    }
    out.se = std::sqrt(pairwise_sum(sq.data(), n) / double(n - 1) / double(n));
    return out;
}

// Units are paths (or antithetic pairs); workers write disjoint index ranges
// so the result does not depend on the thread count.
template <class Fn>
void parallel_units(std::size_t n_units, int threads, Fn&& fn) {
    unsigned want = threads > 0 ? unsigned(threads)
                                : std::max(1u, std::thread::hardware_concurrency());
    want = std::min<std::size_t>(want, n_units);
    if (want <= 1) {
        fn(std::size_t(0), n_units);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(want - 1);
    const std::size_t chunk = (n_units + want - 1) / want;
    for (unsigned t = 1; t < want; ++t) {
        const std::size_t lo = t * chunk;
        if (lo >= n_units) break;
        pool.emplace_back(fn, lo, std::min(n_units, lo + chunk));
    }
    fn(std::size_t(0), std::min(n_units, chunk));
    for (auto& th : pool) th.join();
}

long step_count(const sim_config& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw invalid_parameter_error("sim_config: dt must be positive");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw invalid_parameter_error("sim_config: horizon must be positive");
    const long n = std::lround(cfg.horizon / cfg.dt);
    if (n < 1 || std::fabs(double(n) * cfg.dt - cfg.horizon) >
                     1e-9 * std::max(1.0, cfg.horizon))
        throw invalid_parameter_error(
            "sim_config: horizon must be a whole number of dt steps");
    return n;
}

void check_config(const sim_config& cfg) {
    if (cfg.n_paths < 1)
        throw invalid_parameter_error("sim_config: n_paths must be >= 1");
    if (cfg.antithetic && (cfg.n_paths < 2 || cfg.n_paths % 2 != 0))
        throw invalid_parameter_error(
            "sim_config: antithetic sampling needs an even n_paths >= 2");
    if (!(cfg.x0 > 0.0) || !std::isfinite(cfg.x0))
        throw invalid_parameter_error("sim_config: x0 must be positive");
    (void)step_count(cfg);
}

// Wealth floor in log space, set so X^{1-gamma} stays finite on clamped
// paths. Unreachable under the optimal policies; kept as a diagnostic.
double log_floor(double gamma) {
    return gamma > 1.0 ? 700.0 / (1.0 - gamma) : -690.0;
}

} // namespace

double aggregator_f(const model_params& p, double c, double v) {
    if (!(c >= 0.0) || !std::isfinite(c))
        throw invalid_parameter_error("aggregator_f: consumption must be >= 0");
    const double gamma = p.pref.gamma;
    const double w = (1.0 - gamma) * v;
    if (!(w > 0.0))
        throw invalid_parameter_error(
            "aggregator_f: (1-gamma) v must be positive, got v with the wrong sign");
    const double rho = 1.0 - 1.0 / p.pref.psi;
    const double scaled = c * std::pow(w, -1.0 / (1.0 - gamma));
    return p.pref.delta * p.d.theta * v * (std::pow(scaled, rho) - 1.0);
}

double recursion_rhs(const std::vector<double>& M, const std::vector<double>& f,
                     const std::vector<double>& V, double dt, double zeta_pow) {
    const std::size_t n = M.size();
    if (n < 2 || f.size() != n || V.size() != n)
        throw invalid_parameter_error("recursion_rhs: grids must match, length >= 2");
    if (!(dt > 0.0))
        throw invalid_parameter_error("recursion_rhs: dt must be positive");
    double hazard = 0.0;
    double acc = 0.5 * dt * (f[0] + zeta_pow * M[0] * V[0]);
    for (std::size_t i = 1; i < n; ++i) {
        hazard += 0.5 * dt * (M[i - 1] + M[i]);
        const double weight = (i + 1 == n) ? 0.5 * dt : dt;
        acc += weight * std::exp(-hazard) * (f[i] + zeta_pow * M[i] * V[i]);
    }
    return acc + std::exp(-hazard) * V.back();
}

wealth_stats simulate_wealth(const policy_source& policy, const model_params& p,
                             const mortality_path& mortality, const sim_config& cfg) {
    check_structure(p);
    check_config(cfg);
    const long n_steps = step_count(cfg);

    // The hazard path is deterministic, so the whole drift schedule can be
    // tabulated once.
    double pi = 0.0;
    std::vector<double> drift(static_cast<std::size_t>(n_steps));
    const double r = p.mkt.r, mu = p.mkt.mu, sg = p.mkt.sigma;
    if (const auto* cp = std::get_if<constant_policy>(&policy)) {
        if (!(cp->consumption >= 0.0) || !(cp->healthcare >= 0.0) ||
            !std::isfinite(cp->risky_fraction))
            throw invalid_parameter_error("constant_policy: rates must be >= 0");
        pi = cp->risky_fraction;
        const double d =
            (r + mu * pi - cp->healthcare - cp->consumption - 0.5 * sg * sg * pi * pi) *
            cfg.dt;
        std::fill(drift.begin(), drift.end(), d);
    } else {
        const rate_curve* curve = std::get<const rate_curve*>(policy);
        if (curve == nullptr)
            throw invalid_parameter_error("simulate_wealth: null curve policy");
        pi = p.d.pi_star;
        for (long i = 0; i < n_steps; ++i) {
            const double m = mortality.rate_at(mortality.start_age() + double(i) * cfg.dt);
            const double u = curve->value_at(m);
            const double h = h_star(p, *curve, m);
            drift[std::size_t(i)] =
                (r + mu * pi - h - u - 0.5 * sg * sg * pi * pi) * cfg.dt;
        }
    }
    const double vol = sg * pi * std::sqrt(cfg.dt);
    const double power = 1.0 - p.pref.gamma;
    const double floor_y = log_floor(p.pref.gamma);
    const double y0 = std::log(cfg.x0);

    const bool anti = cfg.antithetic;
    const std::size_t units = std::size_t(anti ? cfg.n_paths / 2 : cfg.n_paths);
    std::vector<double> value(units);
    std::vector<char> ruined(std::size_t(cfg.n_paths), 0);

    auto run_path = [&](std::uint64_t stream, double sign, std::size_t path_idx) {
        substream rng(cfg.seed, stream);
        double y = y0;
        for (long i = 0; i < n_steps; ++i) {
            y += drift[std::size_t(i)] + vol * sign * rng.normal();
            if (y < floor_y) {
                y = floor_y;
                ruined[path_idx] = 1;
            }
        }
        return std::exp(power * y);
    };

    parallel_units(units, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t u = lo; u < hi; ++u) {
            if (anti)
                value[u] = 0.5 * (run_path(u, 1.0, 2 * u) + run_path(u, -1.0, 2 * u + 1));
            else
                value[u] = run_path(u, 1.0, u);
        }
    });

    const mean_se ms = reduce(value);
    wealth_stats out;
    out.mean_terminal_power = ms.mean;
    out.std_error = ms.se;
    out.ruin_fraction =
        double(std::count(ruined.begin(), ruined.end(), char(1))) / double(cfg.n_paths);
    return out;
}

lifetime_sample sample_lifetimes(const mortality_path& mortality, std::size_t n,
                                 std::uint64_t seed) {
    const auto& ages = mortality.ages;
    const auto& rates = mortality.rates;
    if (ages.size() < 2)
        throw invalid_parameter_error("sample_lifetimes: path needs >= 2 nodes");

    std::vector<double> hazard(ages.size(), 0.0);
    for (std::size_t i = 1; i < ages.size(); ++i)
        hazard[i] = hazard[i - 1] +
                    0.5 * (rates[i - 1] + rates[i]) * (ages[i] - ages[i - 1]);

    lifetime_sample out;
    out.death_age.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double z = substream(seed, j).exponential();
        if (z >= hazard.back()) {
            out.death_age[j] = ages.back();
            ++out.n_censored;
            continue;
        }
        const std::size_t k = std::size_t(
            std::lower_bound(hazard.begin(), hazard.end(), z) - hazard.begin());
        // Crossing inside segment [k-1, k]: the hazard is linear there, so
        // the cumulative is quadratic; the stable root keeps precision when
        // the slope is small.
        const double m0 = rates[k - 1];
        const double slope = (rates[k] - rates[k - 1]) / (ages[k] - ages[k - 1]);
        const double excess = z - hazard[k - 1];
        const double tau =
            2.0 * excess / (m0 + std::sqrt(m0 * m0 + 2.0 * slope * excess));
        out.death_age[j] = ages[k - 1] + tau;
    }
    return out;
}

recursion_report verify_recursion(double x, double m, const model_params& p,
                                  const sim_config& cfg, regime_kind regime) {
    check_structure(p);
    check_config(cfg);
    if (!(x > 0.0) || !std::isfinite(x))
        throw invalid_parameter_error("verify_recursion: x must be positive");
    if (!(m > 0.0) || !std::isfinite(m))
        throw invalid_parameter_error("verify_recursion: m must be positive");

    const long n_steps = step_count(cfg);
    const std::size_t n_nodes = std::size_t(n_steps) + 1;
    const double power = 1.0 - p.pref.gamma;

    // Hazard, policy rate and unit-wealth value coefficient on the time
    // grid. Both regimes have deterministic hazard, so everything except the
    // wealth factor e^{(1-gamma) log X} is precomputable: with
    // V = D(M) X^{1-gamma} and c = u X, homogeneity of f gives
    // f(c, V) = f(u, D) X^{1-gamma} node by node.
    std::vector<double> M(n_nodes), rate(n_nodes), coef(n_nodes);
    double lhs = 0.0, pi = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double t = double(i) * cfg.dt;
        value_quote q;
        if (regime == regime_kind::no_aging) {
            M[i] = m;
            q = value_no_aging(p, 1.0, m);
        } else {
            M[i] = m * std::exp(p.beta * t);
            q = value_aging_no_healthcare(p, 1.0, M[i]);
        }
        rate[i] = q.consumption;
        coef[i] = q.value;
        if (i == 0) {
            pi = q.risky_fraction;
            lhs = q.value * std::pow(x, power);
        }
    }

    // Quadrature weights of the recursion right side, folded into one
    // coefficient per node so each path only supplies e^{(1-gamma) y}.
    const double zp = p.d.zeta_pow;
    std::vector<double> w(n_nodes);
    {
        double hazard = 0.0;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            if (i > 0) hazard += 0.5 * cfg.dt * (M[i - 1] + M[i]);
            const double trap = (i == 0 || i + 1 == n_nodes) ? 0.5 * cfg.dt : cfg.dt;
            const double f_unit = aggregator_f(p, rate[i], coef[i]);
            w[i] = std::exp(-hazard) * (trap * (f_unit + zp * M[i] * coef[i]) +
                                        (i + 1 == n_nodes ? coef[i] : 0.0));
        }
    }

    const double r = p.mkt.r, mu = p.mkt.mu, sg = p.mkt.sigma;
    std::vector<double> drift(static_cast<std::size_t>(n_steps));
    for (long i = 0; i < n_steps; ++i)
        drift[std::size_t(i)] =
            (r + mu * pi - rate[std::size_t(i)] - 0.5 * sg * sg * pi * pi) * cfg.dt;
    const double vol = sg * pi * std::sqrt(cfg.dt);
    const double floor_y = log_floor(p.pref.gamma);
    const double y0 = std::log(x);

    const bool anti = cfg.antithetic;
    const std::size_t units = std::size_t(anti ? cfg.n_paths / 2 : cfg.n_paths);
    std::vector<double> rhs(units);

    auto run_path = [&](std::uint64_t stream, double sign) {
        substream rng(cfg.seed, stream);
        double y = y0;
        double acc = w[0] * std::exp(power * y);
        for (long i = 0; i < n_steps; ++i) {
            y += drift[std::size_t(i)] + vol * sign * rng.normal();
            if (y < floor_y) y = floor_y;
            acc += w[std::size_t(i) + 1] * std::exp(power * y);
        }
        return acc;
    };

    parallel_units(units, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t u = lo; u < hi; ++u) {
            if (anti)
                rhs[u] = 0.5 * (run_path(u, 1.0) + run_path(u, -1.0));
            else
                rhs[u] = run_path(u, 1.0);
        }
    });

    const mean_se ms = reduce(rhs);
    recursion_report out;
    out.lhs = lhs;
    out.rhs_estimate = ms.mean;
    out.std_error = ms.se;
    out.z_score = ms.se > 0.0 ? (ms.mean - lhs) / ms.se
                              : (ms.mean == lhs ? 0.0 : HUGE_VAL);
    return out;
}

} // namespace ezlife
