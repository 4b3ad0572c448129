#include "vmin/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "vmin/errors.hpp"

namespace vmin {

double grad_check(const std::function<double()>& loss_fn, const std::vector<ParamView>& params,
                  const GradList& analytic, double h) {
    if (h < 1e-8 || h > 1e-4) {
        throw ArgumentError("grad_check step size must lie in [1e-8, 1e-4]");
    }
    if (analytic.size() != params.size()) {
        throw DimensionError("grad_check: analytic gradient list must align with parameters");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].vec();
        if (analytic[i].size() != p.size()) {
            throw DimensionError("grad_check: gradient size mismatch for " + params[i].name);
        }
        for (Index j = 0; j < p.size(); ++j) {
            const double saved = p[j];
            p[j] = saved + h;
            const double up = loss_fn();
            p[j] = saved - h;
            const double down = loss_fn();
            p[j] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[i][j];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace vmin
