#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ezlife/calibrate.hpp"
#include "ezlife/closed_form.hpp"
#include "ezlife/config.hpp"
#include "ezlife/data_io.hpp"
#include "ezlife/errors.hpp"
#include "ezlife/mortality.hpp"
#include "ezlife/params.hpp"
#include "ezlife/rate_ode.hpp"
#include "ezlife/simulate.hpp"

#ifndef EZLIFE_VERSION
#define EZLIFE_VERSION "0.0.0"
#endif

namespace {

using namespace ezlife;
namespace fs = std::filesystem;

struct global_opts {
    int threads = 0;
    std::string out_dir = ".";
    bool quiet = false;
};

void info(const global_opts& g, const std::string& msg) {
    if (!g.quiet) std::printf("%s\n", msg.c_str());
}

// All output paths resolve under --out-dir; absolute targets and ".."
// components are rejected so no subcommand can write elsewhere.
fs::path resolve_out(const global_opts& g, const std::string& name) {
    const fs::path rel(name);
    if (rel.is_absolute())
        throw invalid_parameter_error("output path '" + name +
                                      "' must be relative to --out-dir");
    for (const auto& part : rel)
        if (part == "..")
            throw invalid_parameter_error("output path '" + name +
                                          "' may not escape --out-dir");
    fs::path full = fs::path(g.out_dir) / rel;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    return full;
}

std::uint64_t fnv1a_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw io_error(p.string() + ": cannot open");
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf), in.gcount() > 0)
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[std::size_t(i)]);
            h *= 1099511628211ull;
        }
    return h;
}

// Sits beside every output file: the subcommand, tool version, seed when one
// was used, and a content digest per input file.
void write_manifest(const fs::path& out_file, const std::string& subcommand,
                    const std::vector<std::pair<std::string, fs::path>>& inputs,
                    std::optional<std::uint64_t> seed = std::nullopt) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("subcommand", subcommand);
    kv.emplace_back("version", EZLIFE_VERSION);
    if (seed) kv.emplace_back("seed", std::to_string(*seed));
    for (const auto& [name, path] : inputs) {
        char digest[24];
        std::snprintf(digest, sizeof digest, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(path)));
        kv.emplace_back("digest." + name, digest);
    }
    write_kv_report(out_file.string() + ".manifest", kv);
}

void require_solvable(const model_params& p) {
    if (!(p.d.k_star > 0.0)) {
        std::ostringstream os;
        os << "zero-hazard consumption share k* = delta psi + (1 - psi) "
              "(r + mu^2 / (2 gamma sigma^2)) = "
           << p.d.k_star << " is not positive; the problem has no solution";
        throw invalid_parameter_error(os.str());
    }
}

bool parse_field(const std::string& tok, double& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + tok.size() && !tok.empty() && std::isfinite(out);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && lo < hi) || n < 2)
        throw invalid_parameter_error("grid needs 0 < m_min < m_max and >= 2 nodes");
    std::vector<double> nodes(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) nodes[std::size_t(i)] = lo * std::exp(i * step);
    nodes.back() = hi;
    return nodes;
}

// Reads back a curve written by `solve`; finalize() re-checks the structural
// invariants, so a hand-edited file that breaks them is rejected here.
rate_curve load_curve_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw io_error(file.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line))
        throw io_error(file.string() + ": empty file");
    const auto head = split_csv(line);
    const char* want[] = {"m", "u_star", "u_prime", "h_star", "lower_env",
                          "upper_env"};
    if (head.size() < 6)
        throw io_error(file.string() + ": expected a curve written by 'solve'");
    for (std::size_t i = 0; i < 6; ++i)
        if (trimmed(head[i]) != want[i])
            throw io_error(file.string() + ": expected column '" +
                           std::string(want[i]) + "', found '" +
                           trimmed(head[i]) + "'");
    rate_curve c;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        const auto f = split_csv(line);
        double m, u, up, lo, hi;
        if (f.size() < 6 || !parse_field(trimmed(f[0]), m) ||
            !parse_field(trimmed(f[1]), u) || !parse_field(trimmed(f[2]), up) ||
            !parse_field(trimmed(f[4]), lo) || !parse_field(trimmed(f[5]), hi)) {
            std::ostringstream os;
            os << file.string() << ":" << lineno << ": unreadable curve row";
            throw io_error(os.str());
        }
        c.grid.push_back(m);
        c.values.push_back(u);
        c.derivs.push_back(up);
        c.lower.push_back(lo);
        c.upper.push_back(hi);
    }
    try {
        c.finalize();
    } catch (const std::exception& e) {
        throw io_error(file.string() + ": not a valid rate curve: " + e.what());
    }
    return c;
}

// ---- solve ----------------------------------------------------------------

struct solve_args {
    std::string params_file;
    std::string mode = "collocation";
    std::string out = "curve.csv";
    int nodes = 2000;
    double m_min = 1e-7;
    double m_max = 20.0;
    bool closed_form = false;
};

void run_solve(const global_opts& g, const solve_args& a) {
    const model_params p = params_from_config(a.params_file);
    require_solvable(p);
    const fs::path outp = resolve_out(g, a.out);
    std::ofstream os(outp);
    if (!os) throw io_error(outp.string() + ": cannot open for writing");

    if (a.closed_form) {
        if (p.efficacy && !(p.d.beta_lower > 0.0)) {
            std::ostringstream msg;
            msg << "efficacy empties the growth band: beta - g(I(psi-1)) = "
                << p.d.beta_lower << " <= 0";
            throw invalid_parameter_error(msg.str());
        }
        os << "m,tilde_c0,u_beta,u_beta_lower,bounds_ok\n";
        for (double m : log_grid(a.m_min, a.m_max, a.nodes)) {
            const double base = c0(p, m);
            const double ub = u_q(p, p.beta, m);
            const double ul = u_q(p, p.d.beta_lower, m);
            // Each curve must sit strictly inside (c0, c0 + rate).
            const bool ok = base < ub && ub < base + p.beta && base < ul &&
                            ul < base + p.d.beta_lower;
            os << format_full(m) << "," << format_full(base) << ","
               << format_full(ub) << "," << format_full(ul) << ","
               << (ok ? 1 : 0) << "\n";
        }
    } else {
        solver_config cfg;
        cfg.mode = a.mode == "bounds" ? solve_mode::bounds : solve_mode::collocation;
        cfg.n_nodes = a.nodes;
        cfg.m_min = a.m_min;
        cfg.m_max = a.m_max;
        const rate_curve curve = solve_u_star(p, cfg);
        const residual_report resid = residual_of(p, curve);
        os << "m,u_star,u_prime,h_star,lower_env,upper_env,residual\n";
        for (std::size_t i = 0; i < curve.grid.size(); ++i)
            os << format_full(curve.grid[i]) << "," << format_full(curve.values[i])
               << "," << format_full(curve.derivs[i]) << ","
               << format_full(h_star(p, curve, curve.grid[i])) << ","
               << format_full(curve.lower[i]) << "," << format_full(curve.upper[i])
               << "," << format_full(resid.scaled[i]) << "\n";
    }
    if (!os.flush()) throw io_error(outp.string() + ": write failed");
    write_manifest(outp, "solve", {{"params", a.params_file}});
    info(g, "wrote " + outp.string());
}

// ---- mortality ------------------------------------------------------------

struct mortality_args {
    std::string params_file;
    std::string curve_file;
    std::string out = "mortality.csv";
    double start_age = 40.0;
    double end_age = 110.0;
    double step = 1.0;
    double substep = 0.05;
};

void run_mortality(const global_opts& g, const mortality_args& a) {
    const model_params p = params_from_config(a.params_file);
    require_solvable(p);
    if (!(a.step > 0.0) || !(a.start_age < a.end_age))
        throw invalid_parameter_error(
            "mortality: need start-age < end-age and a positive step");
    std::vector<double> ages;
    for (double age = a.start_age; age <= a.end_age + 1e-9; age += a.step)
        ages.push_back(age);

    std::vector<std::pair<std::string, fs::path>> inputs = {
        {"params", a.params_file}};
    rate_curve curve;
    const bool endo = p.efficacy.has_value();
    if (endo) {
        if (!a.curve_file.empty()) {
            curve = load_curve_csv(a.curve_file);
            inputs.emplace_back("curve", a.curve_file);
        } else {
            info(g, "solving consumption rate curve (collocation defaults)");
            curve = solve_u_star(p, solver_config{});
        }
    }
    const mortality_path path =
        endo ? integrate_endogenous(p, curve, ages, a.substep)
             : gompertz_path(p.m0, p.beta, ages);

    const fs::path outp = resolve_out(g, a.out);
    std::ofstream os(outp);
    if (!os) throw io_error(outp.string() + ": cannot open for writing");
    os << "age,M,log10_M,h_star,growth_rate\n";
    for (std::size_t i = 0; i < path.ages.size(); ++i) {
        const double m = path.rates[i];
        const double h = endo ? h_star(p, curve, m) : 0.0;
        const double growth = endo ? p.beta - g_at_h_star(p, curve, m) : p.beta;
        os << format_full(path.ages[i]) << "," << format_full(m) << ","
           << format_full(std::log10(m)) << "," << format_full(h) << ","
           << format_full(growth) << "\n";
    }
    if (!os.flush()) throw io_error(outp.string() + ": write failed");
    write_manifest(outp, "mortality", inputs);
    info(g, "wrote " + outp.string());
}

// ---- calibrate ------------------------------------------------------------

struct calibrate_args {
    std::string cohort1900, cohort1940;
    std::string params_file;
    std::string opt_file;
    std::string out = "calibration.txt";
    int year1900 = 1900;
    int year1940 = 1940;
    std::string sex = "total";
    double gomp_age_lo = 40.0;
    double gomp_age_hi = 95.0;
};

sex_kind parse_sex(const std::string& s) {
    if (s == "total") return sex_kind::total;
    if (s == "male") return sex_kind::male;
    if (s == "female") return sex_kind::female;
    throw invalid_parameter_error("unknown sex '" + s +
                                  "' (want total, male or female)");
}

cohort_series load_series(const std::string& path, int year, sex_kind sex) {
    if (fs::path(path).extension() == ".csv") return load_csv_series(path);
    return load_hmd_cohort(path, year, sex);
}

optimizer_config overlay_opt_config(const optimizer_config& base,
                                    const fs::path& file) {
    optimizer_config opt = base;
    for (const auto& [key, value] : read_kv_config(file)) {
        if (key == "a_lo") opt.a_lo = value;
        else if (key == "a_hi") opt.a_hi = value;
        else if (key == "q_lo") opt.q_lo = value;
        else if (key == "q_hi") opt.q_hi = value;
        else if (key == "m0_lo") opt.m0_lo = value;
        else if (key == "m0_hi") opt.m0_hi = value;
        else if (key == "tol") opt.tol = value;
        else if (key == "max_evals") opt.max_evals = int(value);
        else if (key == "restarts") opt.restarts = int(value);
        else if (key == "seed") opt.seed = unsigned(value);
        else if (key == "grid_start") opt.grid_start = value != 0.0;
        else if (key == "age_lo") opt.age_lo = value;
        else if (key == "age_hi") opt.age_hi = value;
        else if (key == "step") opt.step = value;
        else if (key == "inner_nodes") opt.inner.n_nodes = int(value);
        else
            throw io_error(file.string() + ": unknown optimizer key '" + key +
                           "'");
    }
    return opt;
}

void run_calibrate(const global_opts& g, const calibrate_args& a) {
    const model_params p = params_from_config(a.params_file);
    require_solvable(p);
    const sex_kind sex = parse_sex(a.sex);
    const cohort_series s1900 = load_series(a.cohort1900, a.year1900, sex);
    const cohort_series s1940 = load_series(a.cohort1940, a.year1940, sex);

    optimizer_config opt;
    opt.threads = g.threads;
    if (!a.opt_file.empty()) opt = overlay_opt_config(opt, a.opt_file);

    const gompertz_fit gfit = fit_gompertz(s1900, a.gomp_age_lo, a.gomp_age_hi);
    info(g, "1900 cohort: beta = " + format_full(gfit.beta));
    calibration_result res = fit_healthcare(s1940, gfit.beta, p, opt);
    res.m0_1900 = gfit.m0;

    const fs::path outp = resolve_out(g, a.out);
    std::string country = s1940.country.empty() ? s1900.country : s1940.country;
    if (country.empty()) country = "unknown";
    write_kv_report(outp,
                    {{"country", country},
                     {"cohort_1900", std::to_string(a.year1900)},
                     {"cohort_1940", std::to_string(a.year1940)},
                     {"beta", format_full(res.beta)},
                     {"m0_1900", format_full(res.m0_1900)},
                     {"a", format_full(res.a)},
                     {"q", format_full(res.q)},
                     {"m0_1940", format_full(res.m0_1940)},
                     {"model_mse", format_full(res.model_mse)},
                     {"regression_mse", format_full(res.regression_mse)},
                     {"evaluations", std::to_string(res.evaluations)},
                     {"converged", res.converged ? "1" : "0"}});

    // Per-age residuals of the fitted path against the data window.
    fs::path resid_path = outp;
    resid_path.replace_filename(outp.stem().string() + "_residuals.csv");
    {
        const model_params fitted =
            make_params(p.pref, p.mkt, res.beta, res.m0_1940,
                        efficacy_power{res.a, res.q});
        const rate_curve curve = solve_u_star(fitted, opt.inner);
        std::vector<double> ages = {opt.age_lo};
        for (std::size_t i = 0; i < s1940.ages.size(); ++i)
            if (s1940.ages[i] > ages.back() && s1940.ages[i] <= opt.age_hi)
                ages.push_back(s1940.ages[i]);
        const mortality_path path =
            integrate_endogenous(fitted, curve, ages, opt.step);
        std::ofstream os(resid_path);
        if (!os) throw io_error(resid_path.string() + ": cannot open for writing");
        os << "age,data_rate,model_rate,residual\n";
        for (std::size_t i = 0; i < s1940.ages.size(); ++i) {
            const double age = s1940.ages[i];
            if (age < opt.age_lo || age > opt.age_hi) continue;
            const double model = path.rate_at(age);
            os << format_full(age) << "," << format_full(s1940.rates[i]) << ","
               << format_full(model) << ","
               << format_full(model - s1940.rates[i]) << "\n";
        }
        if (!os.flush()) throw io_error(resid_path.string() + ": write failed");
    }

    std::vector<std::pair<std::string, fs::path>> inputs = {
        {"cohort1900", a.cohort1900},
        {"cohort1940", a.cohort1940},
        {"params", a.params_file}};
    if (!a.opt_file.empty()) inputs.emplace_back("opt-config", a.opt_file);
    write_manifest(outp, "calibrate", inputs, opt.seed);
    info(g, "wrote " + outp.string() + " and " + resid_path.string());
    if (!res.converged) {
        std::ostringstream os;
        os << "calibration stopped at the evaluation budget (" << res.evaluations
           << " evals); best point written to " << outp.string();
        throw non_convergence_error(os.str());
    }
}

// ---- simulate -------------------------------------------------------------

struct simulate_args {
    std::string params_file;
    std::string policy = "no-aging"; // no-aging | curve | fixed
    std::string curve_file;
    std::string out = "simulate.txt";
    long paths = 100000;
    double horizon = 30.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    bool antithetic = false;
    double x0 = 1.0;
    double consumption = 0.0;
    double healthcare = 0.0;
    double risky = 0.0;
};

void run_simulate(const global_opts& g, const simulate_args& a) {
    const model_params p = params_from_config(a.params_file);
    require_solvable(p);
    sim_config cfg;
    cfg.n_paths = a.paths;
    cfg.horizon = a.horizon;
    cfg.dt = a.dt;
    cfg.seed = a.seed;
    cfg.antithetic = a.antithetic;
    cfg.threads = g.threads;
    cfg.x0 = a.x0;

    std::vector<std::pair<std::string, fs::path>> inputs = {
        {"params", a.params_file}};
    rate_curve curve;
    mortality_path path;
    policy_source policy = constant_policy{};
    if (a.policy == "no-aging") {
        policy = constant_policy{c0(p, p.m0), 0.0, p.d.pi_star};
        path = gompertz_path(p.m0, p.beta, {0.0, a.horizon});
    } else if (a.policy == "fixed") {
        policy = constant_policy{a.consumption, a.healthcare, a.risky};
        path = gompertz_path(p.m0, p.beta, {0.0, a.horizon});
    } else if (a.policy == "curve") {
        if (!a.curve_file.empty()) {
            curve = load_curve_csv(a.curve_file);
            inputs.emplace_back("curve", a.curve_file);
        } else {
            info(g, "solving consumption rate curve (collocation defaults)");
            curve = solve_u_star(p, solver_config{});
        }
        std::vector<double> ages;
        const int last = int(std::ceil(a.horizon - 1e-9));
        for (int y = 0; y <= std::max(last, 1); ++y) ages.push_back(double(y));
        path = integrate_endogenous(p, curve, ages);
        policy = &curve;
    } else {
        throw invalid_parameter_error("unknown policy '" + a.policy +
                                      "' (want no-aging, curve or fixed)");
    }

    const wealth_stats stats = simulate_wealth(policy, p, path, cfg);
    const fs::path outp = resolve_out(g, a.out);
    write_kv_report(outp,
                    {{"policy", a.policy},
                     {"n_paths", std::to_string(a.paths)},
                     {"horizon", format_full(a.horizon)},
                     {"dt", format_full(a.dt)},
                     {"seed", std::to_string(a.seed)},
                     {"antithetic", a.antithetic ? "1" : "0"},
                     {"x0", format_full(a.x0)},
                     {"mean_terminal_power", format_full(stats.mean_terminal_power)},
                     {"std_error", format_full(stats.std_error)},
                     {"ruin_fraction", format_full(stats.ruin_fraction)}});
    write_manifest(outp, "simulate", inputs, a.seed);
    info(g, "wrote " + outp.string());
}

// ---- verify ---------------------------------------------------------------

struct verify_args {
    std::string params_file;
    std::string regime = "no-aging"; // no-aging | aging-no-healthcare
    std::string out = "verify.txt";
    double x = 1.0;
    double m = -1.0; // default: params m0
    long paths = 100000;
    double horizon = 30.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

void run_verify(const global_opts& g, const verify_args& a) {
    const model_params p = params_from_config(a.params_file);
    require_solvable(p);
    regime_kind regime;
    if (a.regime == "no-aging") regime = regime_kind::no_aging;
    else if (a.regime == "aging-no-healthcare")
        regime = regime_kind::aging_no_healthcare;
    else
        throw invalid_parameter_error(
            "unknown regime '" + a.regime +
            "' (want no-aging or aging-no-healthcare)");
    const double m = a.m < 0.0 ? p.m0 : a.m;

    sim_config cfg;
    cfg.n_paths = a.paths;
    cfg.horizon = a.horizon;
    cfg.dt = a.dt;
    cfg.seed = a.seed;
    cfg.antithetic = a.antithetic;
    cfg.threads = g.threads;
    const recursion_report rep = verify_recursion(a.x, m, p, cfg, regime);

    const fs::path outp = resolve_out(g, a.out);
    write_kv_report(outp,
                    {{"regime", a.regime},
                     {"x", format_full(a.x)},
                     {"m", format_full(m)},
                     {"n_paths", std::to_string(a.paths)},
                     {"horizon", format_full(a.horizon)},
                     {"dt", format_full(a.dt)},
                     {"seed", std::to_string(a.seed)},
                     {"antithetic", a.antithetic ? "1" : "0"},
                     {"closed_form_value", format_full(rep.lhs)},
                     {"recursion_estimate", format_full(rep.rhs_estimate)},
                     {"std_error", format_full(rep.std_error)},
                     {"z", format_full(rep.z_score)}});
    write_manifest(outp, "verify", {{"params", a.params_file}}, a.seed);
    info(g, "wrote " + outp.string());
    if (!(std::fabs(rep.z_score) <= 3.0)) {
        std::ostringstream os;
        os << "recursion check failed: |z| = " << std::fabs(rep.z_score)
           << " > 3 (report at " << outp.string() << ")";
        throw non_convergence_error(os.str());
    }
    info(g, "recursion check passed: z = " + format_full(rep.z_score));
}

// ---- plot -----------------------------------------------------------------

struct plot_args {
    std::string kind = "mortality-compare";
    std::vector<std::string> inputs; // label=path
    std::string out = "figure.svg";
    std::string x_col, y_col; // default: first and second column
};

figure_series read_xy(const fs::path& file, const std::string& label,
                      const std::string& x_col, const std::string& y_col) {
    std::ifstream in(file);
    if (!in) throw io_error(file.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw io_error(file.string() + ": empty file");
    const auto head = split_csv(line);
    if (head.size() < 2)
        throw io_error(file.string() + ": need at least two columns");
    std::size_t xi = 0, yi = 1;
    auto find_col = [&](const std::string& name, std::size_t& idx) {
        for (std::size_t i = 0; i < head.size(); ++i)
            if (trimmed(head[i]) == name) {
                idx = i;
                return;
            }
        throw io_error(file.string() + ": no column named '" + name + "'");
    };
    if (!x_col.empty()) find_col(x_col, xi);
    if (!y_col.empty()) find_col(y_col, yi);

    figure_series s;
    s.label = label;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() <= std::max(xi, yi)) {
            std::ostringstream os;
            os << file.string() << ":" << lineno << ": row has too few columns";
            throw io_error(os.str());
        }
        const std::string xs = trimmed(f[xi]), ys = trimmed(f[yi]);
        if (xs.empty() || ys.empty()) continue; // union grids leave gaps
        double x, y;
        if (!parse_field(xs, x) || !parse_field(ys, y)) {
            std::ostringstream os;
            os << file.string() << ":" << lineno << ": unreadable number";
            throw io_error(os.str());
        }
        s.x.push_back(x);
        s.y.push_back(y);
    }
    return s;
}

void run_plot(const global_opts& g, const plot_args& a) {
    figure_kind kind;
    if (a.kind == "mortality-compare") kind = figure_kind::mortality_compare;
    else if (a.kind == "efficacy") kind = figure_kind::efficacy;
    else if (a.kind == "healthcare-share") kind = figure_kind::healthcare_share;
    else if (a.kind == "u-curve") kind = figure_kind::u_curve;
    else
        throw invalid_parameter_error(
            "unknown figure kind '" + a.kind +
            "' (want mortality-compare, efficacy, healthcare-share or u-curve)");

    std::vector<figure_series> series;
    std::vector<std::pair<std::string, fs::path>> inputs;
    for (const auto& spec : a.inputs) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        const std::string label =
            eq == std::string::npos ? fs::path(path).stem().string()
                                    : spec.substr(0, eq);
        series.push_back(read_xy(path, label, a.x_col, a.y_col));
        inputs.emplace_back(label, path);
    }
    const fs::path outp = resolve_out(g, a.out);
    emit_figure(kind, series, outp.string());
    write_manifest(outp, "plot", inputs);
    info(g, "wrote " + outp.string());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal consumption, investment and healthcare toolkit"};
    app.require_subcommand(1);
    global_opts g;
    app.add_option("--threads", g.threads, "worker threads (0 = hardware count)");
    app.add_option("--out-dir", g.out_dir, "directory all outputs land under")
        ->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress lines");

    solve_args sa;
    auto* solve = app.add_subcommand(
        "solve", "solve the consumption rate curve u*(m) or tabulate the "
                 "closed forms");
    solve->add_option("--params", sa.params_file, "parameter file")->required();
    solve->add_option("--mode", sa.mode, "bounds or collocation")
        ->check(CLI::IsMember({"bounds", "collocation"}))
        ->capture_default_str();
    solve->add_option("--nodes", sa.nodes, "grid nodes")->capture_default_str();
    solve->add_option("--m-min", sa.m_min, "left end of the hazard grid")
        ->capture_default_str();
    solve->add_option("--m-max", sa.m_max, "right end of the hazard grid")
        ->capture_default_str();
    solve->add_flag("--closed-form", sa.closed_form,
                    "emit the closed-form curves instead of solving");
    solve->add_option("--out", sa.out, "output CSV")->capture_default_str();
    solve->callback([&] { run_solve(g, sa); });

    mortality_args ma;
    auto* mort = app.add_subcommand("mortality",
                                    "integrate the mortality trajectory");
    mort->add_option("--params", ma.params_file, "parameter file")->required();
    mort->add_option("--curve", ma.curve_file,
                     "rate curve CSV from 'solve' (default: solve internally)");
    mort->add_option("--start-age", ma.start_age, "first age")
        ->capture_default_str();
    mort->add_option("--end-age", ma.end_age, "last age")->capture_default_str();
    mort->add_option("--step", ma.step, "output spacing in years")
        ->capture_default_str();
    mort->add_option("--substep", ma.substep, "integrator substep in years")
        ->capture_default_str();
    mort->add_option("--out", ma.out, "output CSV")->capture_default_str();
    mort->callback([&] { run_mortality(g, ma); });

    calibrate_args ca;
    auto* cal = app.add_subcommand("calibrate",
                                   "fit mortality growth and healthcare "
                                   "efficacy to two cohorts");
    cal->add_option("--cohort1900", ca.cohort1900,
                    "1900-cohort file (HMD text or age,rate CSV)")
        ->required();
    cal->add_option("--cohort1940", ca.cohort1940,
                    "1940-cohort file (HMD text or age,rate CSV)")
        ->required();
    cal->add_option("--params", ca.params_file, "parameter file")->required();
    cal->add_option("--opt-config", ca.opt_file, "optimizer key-value file");
    cal->add_option("--year-1900", ca.year1900, "cohort year in the first file")
        ->capture_default_str();
    cal->add_option("--year-1940", ca.year1940, "cohort year in the second file")
        ->capture_default_str();
    cal->add_option("--sex", ca.sex, "total, male or female")
        ->capture_default_str();
    cal->add_option("--gompertz-age-lo", ca.gomp_age_lo,
                    "1900 fit window start")
        ->capture_default_str();
    cal->add_option("--gompertz-age-hi", ca.gomp_age_hi, "1900 fit window end")
        ->capture_default_str();
    cal->add_option("--out", ca.out, "report file")->capture_default_str();
    cal->callback([&] { run_calibrate(g, ca); });

    simulate_args sma;
    auto* sim = app.add_subcommand("simulate",
                                   "simulate wealth paths under a policy");
    sim->add_option("--params", sma.params_file, "parameter file")->required();
    sim->add_option("--policy", sma.policy, "no-aging, curve or fixed")
        ->check(CLI::IsMember({"no-aging", "curve", "fixed"}))
        ->capture_default_str();
    sim->add_option("--curve", sma.curve_file,
                    "rate curve CSV for --policy curve");
    sim->add_option("--paths", sma.paths, "number of paths")
        ->capture_default_str();
    sim->add_option("--horizon", sma.horizon, "years")->capture_default_str();
    sim->add_option("--dt", sma.dt, "step in years")->capture_default_str();
    sim->add_option("--seed", sma.seed, "stream seed")->capture_default_str();
    sim->add_flag("--antithetic", sma.antithetic, "mirror normals in pairs");
    sim->add_option("--x0", sma.x0, "initial wealth")->capture_default_str();
    sim->add_option("--consumption", sma.consumption,
                    "consumption rate for --policy fixed");
    sim->add_option("--healthcare", sma.healthcare,
                    "healthcare rate for --policy fixed");
    sim->add_option("--risky", sma.risky, "risky share for --policy fixed");
    sim->add_option("--out", sma.out, "report file")->capture_default_str();
    sim->callback([&] { run_simulate(g, sma); });

    verify_args va;
    auto* ver = app.add_subcommand(
        "verify", "check the value recursion by Monte Carlo (exit 3 on |z|>3)");
    ver->add_option("--params", va.params_file, "parameter file")->required();
    ver->add_option("--regime", va.regime, "no-aging or aging-no-healthcare")
        ->check(CLI::IsMember({"no-aging", "aging-no-healthcare"}))
        ->capture_default_str();
    ver->add_option("--x", va.x, "initial wealth")->capture_default_str();
    ver->add_option("--m", va.m, "initial hazard (default: params m0)");
    ver->add_option("--paths", va.paths, "number of paths")
        ->capture_default_str();
    ver->add_option("--horizon", va.horizon, "years")->capture_default_str();
    ver->add_option("--dt", va.dt, "step in years")->capture_default_str();
    ver->add_option("--seed", va.seed, "stream seed")->capture_default_str();
    ver->add_flag("--antithetic", va.antithetic, "mirror normals in pairs");
    ver->add_option("--out", va.out, "report file")->capture_default_str();
    ver->callback([&] { run_verify(g, va); });

    plot_args pa;
    auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG figure");
    plot->add_option("--kind", pa.kind,
                     "mortality-compare, efficacy, healthcare-share or u-curve")
        ->capture_default_str();
    plot->add_option("--in", pa.inputs, "series as label=file.csv (repeatable)")
        ->required();
    plot->add_option("--x-col", pa.x_col, "x column name (default: first)");
    plot->add_option("--y-col", pa.y_col, "y column name (default: second)");
    plot->add_option("--out", pa.out, "output SVG")->capture_default_str();
    plot->callback([&] { run_plot(g, pa); });

    for (auto* sub : {solve, mort, cal, sim, ver, plot}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        const ezlife::exit_code code = ezlife::exit_code_for(e);
        std::fprintf(stderr, "ERROR %d: %s\n", int(code), e.what());
        return int(code);
    }
    return 0;
}
