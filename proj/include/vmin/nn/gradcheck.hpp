#pragma once

#include <functional>
#include <vector>

#include "vmin/nn/params.hpp"

namespace vmin {

/// Compares analytic gradients against central finite differences of
/// `loss_fn`, which must evaluate the scalar loss at the parameters'
/// current values. Every entry of every tensor in `params` is perturbed
/// by +/- h in turn; `analytic` is aligned with `params`.
///
/// Returns the worst relative error max |a - n| / max(1, |a|, |n|).
/// h should sit in [1e-8, 1e-4] so truncation and roundoff stay balanced,
/// and the loss must be twice differentiable at the evaluation point
/// (perturb away from Leaky ReLU kinks).
double grad_check(const std::function<double()>& loss_fn, const std::vector<ParamView>& params,
                  const GradList& analytic, double h);

}  // namespace vmin
