#include "lia/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "lia/errors.hpp"

namespace lia {

OptimizerState OptimizerState::create(std::size_t size, double learning_rate,
                                      double beta1, double beta2, double epsilon) {
    OptimizerState state;
    state.first_moment.assign(size, 0.0);
    state.second_moment.assign(size, 0.0);
    state.max_second_moment.assign(size, 0.0);
    state.learning_rate = learning_rate;
    state.beta1 = beta1;
    state.beta2 = beta2;
    state.epsilon = epsilon;
    state.validate(size);
    return state;
}

void OptimizerState::validate(std::size_t size) const {
    if (first_moment.size() != size || second_moment.size() != size ||
        max_second_moment.size() != size)
        throw ShapeError("optimizer state arrays must match parameter length");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ConfigError("beta1 and beta2 must lie in [0, 1)");
}

void amsgrad_step(OptimizerState& state, std::span<double> params,
                  std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw ShapeError("amsgrad_step: parameter/gradient length mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw NumericError("non-finite gradient entry",
                               static_cast<std::ptrdiff_t>(i));

    const double b1 = state.beta1;
    const double b2 = state.beta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        state.max_second_moment[i] =
            std::max(state.max_second_moment[i], state.second_moment[i]);
        params[i] -= state.learning_rate * state.first_moment[i] /
                     (std::sqrt(state.max_second_moment[i]) + state.epsilon);
    }
    ++state.step_count;
}

double gradient_check(const Objective& objective, std::span<const double> params,
                      double step) {
    const ObjectiveEval base = objective(params);
    std::vector<double> perturbed(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < perturbed.size(); ++i) {
        const double original = perturbed[i];
        perturbed[i] = original + step;
        const double above = objective(perturbed).value;
        perturbed[i] = original - step;
        const double below = objective(perturbed).value;
        perturbed[i] = original;
        const double numeric = (above - below) / (2.0 * step);
        const double analytic = base.gradient[i];
        const double scale = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    return worst;
}

}  // namespace lia
