#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lia {

/// AMSGrad state (Reddi et al. form, no bias correction):
///   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,
///   vhat <- max(vhat, v),  theta <- theta - lr * m / (sqrt(vhat) + eps).
struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::vector<double> max_second_moment;
    std::uint64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState create(std::size_t size, double learning_rate,
                                 double beta1 = 0.9, double beta2 = 0.999,
                                 double epsilon = 1e-8);
    void validate(std::size_t size) const;
};

/// One minimization step in place. Throws NumericError naming the offending
/// index when a gradient entry is not finite.
void amsgrad_step(OptimizerState& state, std::span<double> params,
                  std::span<const double> grads);

struct ObjectiveEval {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Scalar objective of a flat parameter vector, returning its value and
/// analytic gradient.
using Objective = std::function<ObjectiveEval(std::span<const double>)>;

/// Max over coordinates of
///   |analytic - central_difference| / max(1e-8, |analytic| + |numeric|).
double gradient_check(const Objective& objective, std::span<const double> params,
                      double step);

}  // namespace lia
