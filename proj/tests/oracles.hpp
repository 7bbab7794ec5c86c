#pragma once

// Brute-force reference implementations used only by tests. These stay
// independent of the library code paths they check: fixed-step composite
// rules instead of adaptive quadrature, finite differences instead of
// differentiation under the integral sign.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ezlife/params.hpp"

namespace oracle {

// Composite-Simpson evaluation of the constant-aging-rate consumption curve
// on the bounded domain, 10^6 intervals by default.
inline double simpson_u_q(const ezlife::model_params& p, double q, double m,
                          std::int64_t n = 1'000'000) {
    const double k = p.pref.delta * p.pref.psi +
                     (1.0 - p.pref.psi) *
                         (p.mkt.r + p.mkt.mu * p.mkt.mu /
                                        (2.0 * p.pref.gamma * p.mkt.sigma * p.mkt.sigma));
    const double theta = (1.0 - p.pref.gamma) / (1.0 - 1.0 / p.pref.psi);
    const double zpow = std::pow(p.pref.zeta, 1.0 - p.pref.gamma);
    const double s = k / q;
    const double z = m * p.pref.psi * (1.0 - zpow) / (theta * q);
    if (z == 0.0)
        return k;
    auto f = [&](double w) {
        if (w <= 0.0)
            return 0.0;
        return std::exp(-z * (std::pow(w, -1.0 / s) - 1.0));
    };
    const double h = 1.0 / static_cast<double>(n);
    double acc = f(0.0) + f(1.0);
    for (std::int64_t i = 1; i < n; ++i)
        acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    const double J = acc * h / 3.0;
    return k / J;
}

// Five-point central difference, O(h^4).
template <class F>
double deriv5(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

// Dense Gaussian elimination with partial pivoting on a tridiagonal system
// materialized as a full matrix. Quadratic work, fine for oracle sizes.
inline std::vector<double> dense_tridiagonal_solve(const std::vector<double>& dl,
                                                   const std::vector<double>& d,
                                                   const std::vector<double>& du,
                                                   std::vector<double> b) {
    const std::size_t n = d.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = d[i];
        if (i > 0)
            a[i][i - 1] = dl[i - 1];
        if (i + 1 < n)
            a[i][i + 1] = du[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k]))
                piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j)
                a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j)
            b[k] -= a[k][j] * b[j];
        b[k] /= a[k][k];
    }
    return b;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF given as a callable.
// draws need not be sorted on entry.
template <class Cdf>
double ks_statistic(std::vector<double> draws, Cdf&& cdf) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double d = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double F = cdf(draws[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

} // namespace oracle
