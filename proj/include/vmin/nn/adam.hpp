#pragma once

#include <cstdint>
#include <vector>

#include "vmin/nn/params.hpp"
#include "vmin/types.hpp"

namespace vmin {

/// Adam moment estimates, one pair per parameter tensor.
struct AdamState {
    std::int64_t step_count = 0;
    std::vector<Vector> first_moment;
    std::vector<Vector> second_moment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double lr = 1e-3;
};

/// Zero-initialized state matching the given parameter list.
AdamState make_adam_state(const std::vector<ParamView>& params, double lr);

/// One Adam update with bias correction. Entries of `skip` mark parameter
/// tensors that receive no update and whose moments stay untouched (frozen
/// blocks). Throws TrainingError if a consumed gradient is non-finite.
void adam_step(const std::vector<ParamView>& params, const GradList& grads, AdamState& state,
               const std::vector<bool>& skip = {});

}  // namespace vmin
