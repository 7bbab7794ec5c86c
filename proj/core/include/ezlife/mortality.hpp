#pragma once

#include <string>
#include <vector>

#include "ezlife/params.hpp"
#include "ezlife/rate_curve.hpp"

namespace ezlife {

enum class path_kind { gompertz, endogenous };

// Deterministic mortality trajectory on an age grid. Gompertz paths are
// exactly exponential; endogenous paths grow at beta - g(h*(M)) under the
// optimal healthcare policy read off a rate curve.
struct mortality_path {
    std::vector<double> ages;  // years, strictly increasing
    std::vector<double> rates; // per year, strictly positive
    path_kind kind = path_kind::gompertz;
    std::string params_ref;    // provenance note for reports

    double start_age() const { return ages.front(); }
    double end_age() const { return ages.back(); }

    // Interpolates linearly in log M between grid ages, which is exact on
    // Gompertz paths. Throws outside the age range.
    double rate_at(double age) const;
};

// M(age) = m0 exp(beta (age - ages[0])), one exp per node.
mortality_path gompertz_path(double m0, double beta, std::vector<double> ages);

// Integrates d log M / dt = beta - g(h*(M)) with classical Runge-Kutta,
// starting from params.m0 at ages[0] and reporting M on the given age grid.
// Internal substeps never exceed `step` years. Every substep's log growth is
// checked against the admissible band [beta - g(I(psi-1)), beta]; healthcare
// that is absent, or a flat curve, reduces the path to Gompertz growth.
mortality_path integrate_endogenous(const model_params& p, const rate_curve& curve,
                                    std::vector<double> ages, double step = 0.05);

} // namespace ezlife
