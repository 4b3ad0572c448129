#include "vmin/nn/adam.hpp"

#include <cmath>

#include "vmin/errors.hpp"

namespace vmin {

std::string block_name(Block block) {
    switch (block) {
        case Block::Fusion: return "fusion";
        case Block::Embedding: return "embedding";
        case Block::Hidden: return "hidden";
        case Block::Output: return "output";
    }
    return "?";
}

AdamState make_adam_state(const std::vector<ParamView>& params, double lr) {
    AdamState state;
    state.lr = lr;
    state.first_moment.reserve(params.size());
    state.second_moment.reserve(params.size());
    for (const ParamView& p : params) {
        state.first_moment.push_back(Vector::Zero(p.size));
        state.second_moment.push_back(Vector::Zero(p.size));
    }
    return state;
}

void adam_step(const std::vector<ParamView>& params, const GradList& grads, AdamState& state,
               const std::vector<bool>& skip) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
        throw DimensionError("adam_step: parameter, gradient and state lists must align");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i < skip.size() && skip[i]) continue;
        const Vector& g = grads[i];
        if (g.size() != params[i].size) {
            throw DimensionError("adam_step: gradient size mismatch for " + params[i].name);
        }
        if (!g.allFinite()) {
            throw TrainingError("non-finite gradient in block " + params[i].name);
        }
        Vector& m = state.first_moment[i];
        Vector& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        auto p = params[i].vec();
        p.array() -= state.lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + state.epsilon);
    }
}

}  // namespace vmin
