#pragma once

#include <vector>

namespace ezlife {

// Fritsch-Carlson monotone cubic interpolation on a strictly increasing grid.
// Tangents are chosen so the interpolant preserves monotone runs of the data;
// pchip_eval does Hermite evaluation with the precomputed tangents.
std::vector<double> pchip_tangents(const std::vector<double>& x,
                                   const std::vector<double>& y);
double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& t, double xx);

enum class solve_mode { bounds, collocation };

struct solve_stats {
    int newton_iters = 0;
    double max_scaled_residual = 0.0; // collocation stencil, scaled max(1,u^2)
};

// Consumption-rate curve u(m) on a log-spaced hazard grid, with node
// derivatives and the closed-form envelope it is required to respect.
// finalize() checks the structural invariants (positive strictly increasing
// grid and values, nonnegative derivatives, concave chord slopes, envelope
// containment) and builds the interpolation tables; curves coming out of
// solve_u_star arrive finalized.
struct rate_curve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> derivs;
    std::vector<double> lower;
    std::vector<double> upper;
    solve_mode mode = solve_mode::bounds;
    solve_stats stats;
    // Tolerated envelope overshoot, relative above u = 1. The default leaves
    // an order of magnitude over the measured discretization error of the
    // default solver grid; coarser grids need a looser value.
    double bounds_slack = 1e-6;
    double concavity_slack = 1e-4; // tolerated chord-slope increase, relative

    double m_min() const { return grid.front(); }
    double m_max() const { return grid.back(); }

    double value_at(double m) const;
    double deriv_at(double m) const;

    // u/(m u'), the ratio the healthcare policy feeds on, interpolated
    // monotone-cubically from the node ratios. Throws for flat curves.
    double ratio_at(double m) const;

    // True when the curve has no usable slope anywhere (the zeta = 1 family
    // collapses to the constant k_star and healthcare switches off).
    bool flat(double threshold = 1e-13) const;

    void finalize();

  private:
    std::vector<double> vt_, dt_, ratios_, rt_;
    double clamp_arg(double m, const char* who) const;
    void check_invariants() const;
};

} // namespace ezlife
