#include "ezlife/rate_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ezlife/closed_form.hpp"
#include "ezlife/errors.hpp"

namespace ezlife {

void solve_tridiagonal(std::vector<double> dl, std::vector<double> d,
                       std::vector<double> du, std::vector<double>& b) {
    const size_t n = d.size();
    if (n == 0 || dl.size() != n - 1 || du.size() != n - 1 || b.size() != n)
        throw invalid_parameter_error("solve_tridiagonal: inconsistent sizes");
    // Row-pivoted elimination creates one extra superdiagonal.
    std::vector<double> du2(n >= 2 ? n - 2 : 0, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                throw invalid_parameter_error("solve_tridiagonal: singular matrix");
            const double f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            const double f = d[i] / dl[i];
            // Swap row i with row i+1, then eliminate.
            d[i] = dl[i];
            const double t_d = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t_d - f * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        }
    }
    if (d[n - 1] == 0.0)
        throw invalid_parameter_error("solve_tridiagonal: singular matrix");
    b[n - 1] /= d[n - 1];
    if (n >= 2)
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (size_t k = n; k-- > 2;) {
        const size_t i = k - 2;
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

namespace {

// Cached pieces of the ODE residual that depend only on the parameter set.
struct ode_terms {
    double beta;
    double psim1;
    bool has_eff = false;
    double pp = 0.0; // 1/(1-q)
    double cq = 0.0; // (1-q)/q * a^{1/(1-q)}
    double qp = 0.0; // q/(1-q)
};

ode_terms make_terms(const model_params& p) {
    ode_terms t;
    t.beta = p.beta;
    t.psim1 = p.pref.psi - 1.0;
    if (p.efficacy) {
        const double q = p.efficacy->q;
        t.has_eff = true;
        t.pp = 1.0 / (1.0 - q);
        t.cq = (1.0 - q) / q * std::pow(p.efficacy->a, t.pp);
        t.qp = q / (1.0 - q);
    }
    return t;
}

// Residual F(m, u, D) with D = m u'. The efficacy correction vanishes as
// D -> 0 because pp > 1.
double ode_residual(const ode_terms& t, double c0m, double u, double D) {
    double F = u * u - c0m * u - t.beta * D;
    if (t.has_eff && D > 0.0)
        F += t.cq * std::pow(t.psim1 * u, -t.qp) * std::pow(D, t.pp);
    return F;
}

// Solves the algebraic part of the equation for D = m u' at a state (m, u):
//
//   0 = A - beta D + E D^pp,  A = u (u - c0(m)),  E = cq ((psi-1) u)^{-qp}.
//
// With pp > 1 the right side is convex in D, so there are up to two roots;
// the economically meaningful one is the smaller, which continues the
// no-healthcare ratio A/beta as the efficacy level goes to zero. Returns
// false when the state is outside the admissible region (u below c0, or
// u - c0 past the Legendre wall where no real root exists) so that a trial
// Newton iterate can be rejected instead of aborting the solve.
bool d_from_state(const ode_terms& t, double c0m, double u, double& D, double* Du) {
    if (!(u > 0.0))
        return false;
    const double A = u * (u - c0m);
    if (A < 0.0)
        return false;
    if (!t.has_eff) {
        D = A / t.beta;
        if (Du)
            *Du = (2.0 * u - c0m) / t.beta;
        return true;
    }
    const double E = t.cq * std::pow(t.psim1 * u, -t.qp);
    // Vertex of the convex residual: the decreasing branch ends here.
    const double Dv = std::pow(t.beta / (t.pp * E), 1.0 / (t.pp - 1.0));
    auto F = [&](double d) { return A - t.beta * d + E * std::pow(d, t.pp); };
    if (!(F(Dv) <= 0.0))
        return false;
    // F >= 0 at A/beta (the root sits above the no-healthcare ratio) and
    // F <= 0 at the vertex; bisection-safeguarded Newton on that bracket.
    double lo = A / t.beta, hi = Dv, d = lo;
    for (int it = 0; it < 100; ++it) {
        const double Fd = F(d);
        (Fd >= 0.0 ? lo : hi) = d;
        const double dF = -t.beta + t.pp * E * std::pow(d, t.pp - 1.0);
        double dn = dF < 0.0 ? d - Fd / dF : 0.5 * (lo + hi);
        if (!(dn > lo && dn < hi))
            dn = 0.5 * (lo + hi);
        const bool done = std::abs(dn - d) <= 1e-14 * dn;
        d = dn;
        if (done)
            break;
    }
    D = d;
    if (Du) {
        const double F_D = -t.beta + t.pp * E * std::pow(d, t.pp - 1.0);
        if (!(F_D < -1e-12 * t.beta))
            return false; // root pinned at the vertex: marginal admissibility
        const double F_u = 2.0 * u - c0m - t.qp * (t.beta * d - A) / u;
        *Du = -F_u / F_D;
    }
    return true;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> g(n);
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i)
        g[i] = lo * std::exp(i * step);
    g.front() = lo;
    g.back() = hi;
    return g;
}

// Finite-difference weights for the first derivative at x0 from the given
// nodes (Fornberg's recurrence, specialized to orders 0 and 1).
std::vector<double> fd_weights_first(double x0, const double* xs, int nn) {
    std::vector<double> w0(nn, 0.0), w1(nn, 0.0);
    double c1 = 1.0;
    w0[0] = 1.0;
    for (int i = 1; i < nn; ++i) {
        double c2 = 1.0;
        const double c5 = xs[i - 1] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                w1[i] = c1 * (w0[i - 1] - c5 * w1[i - 1]) / c2;
                w0[i] = -c1 * c5 * w0[i - 1] / c2;
            }
            w1[j] = ((xs[i] - x0) * w1[j] - w0[j]) / c3;
            w0[j] = (xs[i] - x0) * w0[j] / c3;
        }
        c1 = c2;
    }
    return w1;
}

void fill_envelope(const model_params& p, const std::vector<double>& grid,
                   const quadrature_config& quad, std::vector<double>& lower,
                   std::vector<double>& upper, std::vector<double>& lo_d,
                   std::vector<double>& up_d) {
    const size_t n = grid.size();
    lower.resize(n);
    upper.resize(n);
    lo_d.resize(n);
    up_d.resize(n);
    const double slope = c0_slope(p);
    for (size_t i = 0; i < n; ++i) {
        const auto lo = u_q_with_prime(p, p.d.beta_lower, grid[i], quad);
        const auto hi = u_q_with_prime(p, p.beta, grid[i], quad);
        const double cap = c0(p, grid[i]) + p.d.beta_lower;
        lower[i] = lo.value;
        lo_d[i] = lo.deriv;
        if (hi.value <= cap) {
            upper[i] = hi.value;
            up_d[i] = hi.deriv;
        } else {
            upper[i] = cap;
            up_d[i] = slope;
        }
    }
}

} // namespace

rate_curve solve_u_star(const model_params& p, const solver_config& cfg) {
    check_structure(p);
    if (cfg.n_nodes < 16)
        throw invalid_parameter_error("solve_u_star: n_nodes must be at least 16");
    if (!(cfg.m_min > 0.0) || !(cfg.m_max > cfg.m_min))
        throw invalid_parameter_error("solve_u_star: need 0 < m_min < m_max");
    if (!(p.d.beta_lower > 0.0))
        throw invalid_parameter_error(
            "solve_u_star: beta_lower <= 0; efficacy saturates hazard growth");

    rate_curve out;
    out.mode = cfg.mode;
    out.bounds_slack = cfg.bounds_slack;
    out.grid = log_spaced(cfg.m_min, cfg.m_max, cfg.n_nodes);

    std::vector<double> lo_d, up_d;
    fill_envelope(p, out.grid, cfg.quad, out.lower, out.upper, lo_d, up_d);

    const size_t n = out.grid.size();
    out.values.resize(n);
    out.derivs.resize(n);

    if (p.d.zeta_pow == 1.0) {
        // Death carries no utility penalty, so the longevity value is flat at
        // k_star and the equation is solved exactly with zero slope.
        std::fill(out.values.begin(), out.values.end(), p.d.k_star);
        std::fill(out.derivs.begin(), out.derivs.end(), 0.0);
        out.finalize();
        return out;
    }

    // The far-field anchor is only trustworthy once the envelope has collapsed.
    const double gap = out.upper.back() - out.lower.back();
    if (!(gap < cfg.far_field_gap_tol)) {
        std::ostringstream os;
        os << "solve_u_star: envelope gap " << gap << " at m_max = " << cfg.m_max
           << " exceeds " << cfg.far_field_gap_tol << "; raise m_max";
        throw invalid_parameter_error(os.str());
    }

    if (cfg.mode == solve_mode::bounds) {
        for (size_t i = 0; i < n; ++i) {
            const double L = out.lower[i], U = out.upper[i];
            out.values[i] = std::sqrt(L * U);
            // d/dm sqrt(LU) = sqrt(LU)/2 (L'/L + U'/U)
            out.derivs[i] = 0.5 * out.values[i] * (lo_d[i] / L + up_d[i] / U);
        }
        out.finalize();
        return out;
    }

    // Collocation of the first-order form du/dln m = D(m, u) at cell
    // midpoints (box scheme). Central stencils on u directly are unusable
    // here: their discrete solution carries a near-null oscillatory mode at
    // the 1e-5 level, while the box recurrence contracts toward the left and
    // keeps the Newton system perfectly conditioned. The far end is closed by
    // slope matching against the asymptote c0(m) + beta_lower, whose residual
    // value error (~1/m_max^2) is far below that of pinning the end value;
    // the left end is free, landing inside the collapsing envelope as both
    // bounds meet at k_star.
    const ode_terms terms = make_terms(p);
    std::vector<double> c0s(n), dx(n - 1);
    for (size_t i = 0; i < n; ++i)
        c0s[i] = c0(p, out.grid[i]);
    for (size_t i = 0; i + 1 < n; ++i)
        dx[i] = std::log(out.grid[i + 1] / out.grid[i]);

    std::vector<double>& u = out.values;
    for (size_t i = 0; i < n; ++i)
        u[i] = std::sqrt(out.lower[i] * out.upper[i]);
    u.back() = out.upper.back();

    std::vector<double> D(n), Du(n), R(n);
    const double d_tail = out.grid.back() * c0_slope(p);

    // Box residuals R_i = u_{i+1} - u_i - dx_i (D_i + D_{i+1})/2 reported in
    // equation units (beta |R|/dx is the mismatch in beta m u'), plus the
    // far-field closure row D_{n-1} = m_max c0'.
    auto residuals = [&](const std::vector<double>& uu) {
        double worst = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (!d_from_state(terms, c0s[i], uu[i], D[i], &Du[i]))
                return -1.0;
        for (size_t i = 0; i + 1 < n; ++i) {
            R[i] = uu[i + 1] - uu[i] - 0.5 * dx[i] * (D[i] + D[i + 1]);
            const double um = 0.5 * (uu[i] + uu[i + 1]);
            worst = std::max(worst, terms.beta * std::abs(R[i]) /
                                        (dx[i] * std::max(1.0, um * um)));
        }
        R[n - 1] = D[n - 1] - d_tail;
        worst = std::max(worst, terms.beta * std::abs(R[n - 1]) /
                                    std::max(1.0, uu[n - 1] * uu[n - 1]));
        return worst;
    };

    std::vector<double> dl(n - 1, 0.0), dg(n), dsup(n - 1), rhs(n), trial(n);
    double worst = residuals(u);
    if (worst < 0.0)
        throw non_convergence_error("solve_u_star: infeasible initial iterate");

    int iters = 0;
    while (worst > cfg.newton_tol && iters < cfg.max_iters) {
        // Upper-bidiagonal Jacobian: box row i couples u_i and u_{i+1}; the
        // closure row touches only u_{n-1}.
        for (size_t i = 0; i + 1 < n; ++i) {
            dg[i] = -1.0 - 0.5 * dx[i] * Du[i];
            dsup[i] = 1.0 - 0.5 * dx[i] * Du[i + 1];
            rhs[i] = -R[i];
        }
        dg[n - 1] = Du[n - 1];
        rhs[n - 1] = -R[n - 1];
        solve_tridiagonal(dl, dg, dsup, rhs);

        double step = cfg.damping;
        bool accepted = false;
        for (int bt = 0; bt < 30 && !accepted; ++bt, step *= 0.5) {
            trial = u;
            for (size_t k = 0; k < n; ++k)
                trial[k] += step * rhs[k];
            const double w2 = residuals(trial);
            if (w2 >= 0.0 && w2 < worst) {
                u = trial;
                worst = w2;
                accepted = true;
            }
        }
        if (!accepted) {
            residuals(u); // restore D, Du, R for the current iterate
            break;
        }
        ++iters;
    }
    out.stats.newton_iters = iters;
    out.stats.max_scaled_residual = worst;
    if (worst > cfg.newton_tol) {
        std::ostringstream os;
        os << "solve_u_star: Newton stalled at scaled residual " << worst
           << " after " << iters << " iterations (tol " << cfg.newton_tol << ")";
        throw non_convergence_error(os.str());
    }

    // The equation itself supplies the node derivatives.
    for (size_t i = 0; i < n; ++i)
        out.derivs[i] = D[i] / out.grid[i];
    out.finalize();
    return out;
}

double h_star(const model_params& p, const rate_curve& curve, double m) {
    if (!p.efficacy || curve.flat())
        return 0.0;
    return p.efficacy->slope_inverse((p.pref.psi - 1.0) * curve.ratio_at(m));
}

double h_star_power_form(const model_params& p, const rate_curve& curve, double m) {
    if (!p.efficacy || curve.flat())
        return 0.0;
    const double y = (p.pref.psi - 1.0) * curve.ratio_at(m);
    // (y/a)^{-1/(1-q)} spelled with the reciprocal base, unlike slope_inverse.
    return std::pow(p.efficacy->a / y, 1.0 / (1.0 - p.efficacy->q));
}

double g_at_h_star(const model_params& p, const rate_curve& curve, double m) {
    if (!p.efficacy || curve.flat())
        return 0.0;
    const double q = p.efficacy->q;
    const double y = (p.pref.psi - 1.0) * curve.ratio_at(m);
    return std::pow(p.efficacy->a, 1.0 / (1.0 - q)) / q * std::pow(y, -q / (1.0 - q));
}

policy policy_at(const model_params& p, const rate_curve& curve, double m) {
    policy out;
    out.consumption_rate = curve.value_at(m);
    out.healthcare = h_star(p, curve, m);
    out.risky_fraction = p.d.pi_star;
    return out;
}

residual_report residual_of(const model_params& p, const rate_curve& curve) {
    const auto& g = curve.grid;
    const auto& u = curve.values;
    const size_t n = g.size();
    if (n < 8)
        throw invalid_parameter_error("residual_of: curve too short");
    const ode_terms terms = make_terms(p);

    residual_report rep;
    rep.scaled.resize(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        // Five-point window clipped at the ends.
        size_t first = i >= 2 ? i - 2 : 0;
        if (first + 5 > n)
            first = n - 5;
        const auto w = fd_weights_first(g[i], g.data() + first, 5);
        double up = 0.0;
        for (int j = 0; j < 5; ++j)
            up += w[j] * u[first + j];
        const double F = ode_residual(terms, c0(p, g[i]), u[i],
                                      std::max(g[i] * up, 0.0));
        rep.scaled[i] = F / std::max(1.0, u[i] * u[i]);
        rep.max_abs = std::max(rep.max_abs, std::abs(rep.scaled[i]));
        if (i >= 5 && i + 5 < n)
            rep.max_abs_interior = std::max(rep.max_abs_interior, std::abs(rep.scaled[i]));
    }
    return rep;
}

} // namespace ezlife
