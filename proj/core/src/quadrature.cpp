#include "ezlife/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ezlife/errors.hpp"

namespace ezlife {

namespace {

using rule = boost::math::quadrature::gauss_kronrod<double, 15>;

struct panel {
    double a, b, value, err;
};

panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    panel p{a, b, 0.0, 0.0};
    double l1 = 0.0;
    // depth 0: one 15-point Kronrod application with its embedded estimate.
    p.value = rule::integrate(f, a, b, 0, 0.0, &p.err, &l1);
    return p;
}

} // namespace

// Globally adaptive scheme: keep a worklist of panels, always split the one
// with the largest error estimate, stop once the summed estimate meets
// rel_tol against the running total. Splitting order and summation order are
// fully determined by the inputs, so repeated calls are bit-identical.
double integrate01(const std::function<double(double)>& f, const quadrature_config& cfg) {
    const unsigned budget = std::max(2u, cfg.max_subdivisions);

    std::vector<panel> panels;
    panels.reserve(64);
    panels.push_back(eval_panel(f, 0.0, 1.0));

    auto totals = [&panels] {
        double v = 0.0, e = 0.0;
        for (const auto& p : panels) {
            v += p.value;
            e += p.err;
        }
        return std::pair{v, e};
    };

    for (unsigned splits = 0; splits < budget; ++splits) {
        const auto [value, err] = totals();
        if (err <= cfg.rel_tol * std::max(std::abs(value), 1e-300))
            return value;
        auto worst = std::max_element(
            panels.begin(), panels.end(),
            [](const panel& x, const panel& y) { return x.err < y.err; });
        const double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
        if (mid <= a || mid >= b)
            break; // interval at floating-point resolution; estimate is stuck
        *worst = eval_panel(f, a, mid);
        panels.push_back(eval_panel(f, mid, b));
    }

    const auto [value, err] = totals();
    if (err <= cfg.rel_tol * std::max(std::abs(value), 1e-300))
        return value;
    std::ostringstream os;
    os << "quadrature did not reach rel_tol " << cfg.rel_tol << " within "
       << budget << " subdivisions (error estimate " << err << ", value " << value << ")";
    throw non_convergence_error(os.str());
}

} // namespace ezlife
