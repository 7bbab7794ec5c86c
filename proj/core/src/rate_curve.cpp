#include "ezlife/rate_curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ezlife/errors.hpp"

namespace ezlife {

std::vector<double> pchip_tangents(const std::vector<double>& x,
                                   const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw invalid_parameter_error("pchip: need two or more matching nodes");
    std::vector<double> h(n - 1), s(n - 1), t(n);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        s[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            t[i] = 0.0;
        } else {
            // Weighted harmonic mean; the classic shape-preserving choice.
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            t[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    // One-sided endpoint slopes, clipped so monotonicity survives.
    auto endpoint = [](double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0)
            return 0.0;
        if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0))
            return 3.0 * s0;
        return d;
    };
    if (n == 2) {
        t[0] = t[1] = s[0];
    } else {
        t[0] = endpoint(h[0], h[1], s[0], s[1]);
        t[n - 1] = endpoint(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    }
    return t;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& t, double xx) {
    const size_t n = x.size();
    auto it = std::upper_bound(x.begin(), x.end(), xx);
    size_t i = it == x.begin() ? 0 : static_cast<size_t>(it - x.begin()) - 1;
    if (i >= n - 1)
        i = n - 2;
    const double h = x[i + 1] - x[i];
    const double u = (xx - x[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    return y[i] * (2 * u3 - 3 * u2 + 1) + h * t[i] * (u3 - 2 * u2 + u) +
           y[i + 1] * (-2 * u3 + 3 * u2) + h * t[i + 1] * (u3 - u2);
}

double rate_curve::clamp_arg(double m, const char* who) const {
    const double lo = grid.front(), hi = grid.back();
    const double slack_lo = lo * 1e-12, slack_hi = hi * 1e-12;
    if (m < lo - slack_lo || m > hi + slack_hi) {
        std::ostringstream os;
        os << who << ": m = " << m << " outside curve range [" << lo << ", " << hi << "]";
        throw invalid_parameter_error(os.str());
    }
    return std::clamp(m, lo, hi);
}

double rate_curve::value_at(double m) const {
    if (vt_.empty())
        throw invalid_parameter_error("rate_curve: finalize() before interpolating");
    return pchip_eval(grid, values, vt_, clamp_arg(m, "value_at"));
}

double rate_curve::deriv_at(double m) const {
    if (dt_.empty())
        throw invalid_parameter_error("rate_curve: finalize() before interpolating");
    return pchip_eval(grid, derivs, dt_, clamp_arg(m, "deriv_at"));
}

double rate_curve::ratio_at(double m) const {
    if (flat())
        throw invalid_parameter_error(
            "rate_curve: ratio u/(m u') undefined on a flat curve");
    if (rt_.empty())
        throw invalid_parameter_error("rate_curve: finalize() before interpolating");
    return pchip_eval(grid, ratios_, rt_, clamp_arg(m, "ratio_at"));
}

bool rate_curve::flat(double threshold) const {
    for (double d : derivs)
        if (d > threshold)
            return false;
    return true;
}

void rate_curve::check_invariants() const {
    const size_t n = grid.size();
    if (n < 8)
        throw invalid_parameter_error("rate_curve: need at least 8 nodes");
    if (values.size() != n || derivs.size() != n || lower.size() != n || upper.size() != n)
        throw invalid_parameter_error("rate_curve: mismatched column lengths");
    if (!(grid.front() > 0.0))
        throw invalid_parameter_error("rate_curve: grid must be positive");
    const bool is_flat = flat();
    for (size_t i = 0; i + 1 < n; ++i) {
        if (!(grid[i + 1] > grid[i]))
            throw invalid_parameter_error("rate_curve: grid must increase strictly");
        if (!is_flat && !(values[i + 1] > values[i])) {
            std::ostringstream os;
            os << "rate_curve: values must increase strictly; node " << i
               << " (m = " << grid[i] << "): " << values[i] << " -> " << values[i + 1];
            throw bound_violation_error(os.str());
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (derivs[i] < 0.0)
            throw bound_violation_error("rate_curve: negative derivative");
        // Slack turns relative above u = 1 so the far-field nodes are judged
        // on the same digit count as the small-m ones.
        const double slack = bounds_slack * std::max(1.0, std::abs(values[i]));
        if (!(lower[i] <= upper[i] + slack))
            throw bound_violation_error("rate_curve: crossed envelope columns");
        if (values[i] < lower[i] - slack || values[i] > upper[i] + slack) {
            std::ostringstream os;
            os << "rate_curve: node " << i << " (m = " << grid[i] << ", u = "
               << values[i] << ") exits the envelope [" << lower[i] << ", "
               << upper[i] << "] by more than " << slack;
            throw bound_violation_error(os.str());
        }
    }
    // Discrete concavity: chord slopes must not increase beyond slack. The
    // slack is relative and loose enough to absorb second-order truncation
    // wiggle near the exponential far field while still catching oscillating
    // or branch-crossed solves, whose slope jumps are orders larger.
    if (!is_flat) {
        for (size_t i = 0; i + 2 < n; ++i) {
            const double s0 = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
            const double s1 = (values[i + 2] - values[i + 1]) / (grid[i + 2] - grid[i + 1]);
            if (s1 - s0 > concavity_slack * std::max(1.0, std::abs(s0))) {
                std::ostringstream os;
                os << "rate_curve: convex kink at node " << i + 1 << " (m = "
                   << grid[i + 1] << "): slopes " << s0 << " -> " << s1;
                throw bound_violation_error(os.str());
            }
        }
    }
}

void rate_curve::finalize() {
    check_invariants();
    vt_ = pchip_tangents(grid, values);
    dt_ = pchip_tangents(grid, derivs);
    ratios_.clear();
    rt_.clear();
    if (!flat()) {
        ratios_.resize(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) {
            if (!(derivs[i] > 0.0))
                throw invalid_parameter_error(
                    "rate_curve: zero derivative on a non-flat curve");
            ratios_[i] = values[i] / (grid[i] * derivs[i]);
        }
        rt_ = pchip_tangents(grid, ratios_);
    }
}

} // namespace ezlife
