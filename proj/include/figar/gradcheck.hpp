#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "figar/param.hpp"

namespace figar {

/// Compares an analytic gradient against central finite differences of f.
/// Returns max over coordinates of |analytic - numeric| / max(1, |analytic|).
inline double check_gradient(const std::function<double(const ParamVector&)>& f,
                             const ParamVector& p, const ParamVector& analytic,
                             double eps = 1e-5) {
    if (!(eps > 0.0 && eps <= 1e-2)) throw std::invalid_argument("check_gradient: eps must be in (0, 1e-2]");
    if (analytic.size() != p.size()) throw std::invalid_argument("check_gradient: gradient size mismatch");
    ParamVector work = p;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double orig = work[i];
        work[i] = orig + eps;
        double fp = f(work);
        work[i] = orig - eps;
        double fm = f(work);
        work[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("check_gradient: non-finite function value");
        }
        double numeric = (fp - fm) / (2.0 * eps);
        double err = std::fabs(analytic[i] - numeric) / std::max(1.0, std::fabs(analytic[i]));
        if (err > worst) worst = err;
    }
    return worst;
}

}  // namespace figar
