#include <doctest.h>

#include <cmath>
#include <limits>

#include "lia/errors.hpp"
#include "lia/optimizer.hpp"
#include "lia/rng.hpp"

using namespace lia;

TEST_CASE("zero gradient leaves fresh parameters unchanged") {
    auto state = OptimizerState::create(3, 0.001);
    std::vector<double> params{1.0, -2.0, 0.5};
    const auto before = params;
    amsgrad_step(state, params, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(params == before);
    CHECK(state.step_count == 1);
}

TEST_CASE("first step with unit gradient matches the hand computation") {
    auto state = OptimizerState::create(1, 0.001, 0.9, 0.999, 1e-8);
    std::vector<double> params{0.0};
    amsgrad_step(state, params, std::vector<double>{1.0});
    // m = 0.1, v = 0.001, delta = -0.001 * 0.1 / (sqrt(0.001) + 1e-8)
    CHECK(params[0] == doctest::Approx(-0.003162).epsilon(1e-3));
}

TEST_CASE("200 steps shrink a quadratic") {
    auto state = OptimizerState::create(1, 0.01);
    std::vector<double> params{1.0};
    for (int step = 0; step < 200; ++step)
        amsgrad_step(state, params, std::vector<double>{2.0 * params[0]});
    CHECK(std::abs(params[0]) < 1.0);
}

TEST_CASE("max second moment never decreases") {
    auto state = OptimizerState::create(4, 0.001);
    std::vector<double> params(4, 0.0);
    Rng rng(5);
    for (int step = 0; step < 100; ++step) {
        const auto previous = state.max_second_moment;
        std::vector<double> grads(4);
        for (double& g : grads) g = uniform_real(rng, -3.0, 3.0);
        amsgrad_step(state, params, grads);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(state.max_second_moment[i] >= previous[i]);
    }
}

TEST_CASE("non-finite gradients raise a numeric error naming the index") {
    auto state = OptimizerState::create(3, 0.001);
    std::vector<double> params(3, 0.0);
    std::vector<double> grads{0.0, std::numeric_limits<double>::quiet_NaN(), 0.0};
    try {
        amsgrad_step(state, params, grads);
        FAIL("expected NumericError");
    } catch (const NumericError& err) {
        CHECK(err.index == 1);
    }
}

TEST_CASE("mismatched lengths raise a shape error") {
    auto state = OptimizerState::create(2, 0.001);
    std::vector<double> params(3, 0.0);
    CHECK_THROWS_AS(amsgrad_step(state, params, std::vector<double>{1.0, 2.0, 3.0}),
                    ShapeError);
}

TEST_CASE("gradient check is near-exact for quadratics") {
    const Objective quadratic = [](std::span<const double> p) {
        ObjectiveEval eval;
        eval.gradient.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            eval.value += p[i] * p[i];
            eval.gradient[i] = 2.0 * p[i];
        }
        return eval;
    };
    const std::vector<double> params{0.3, -1.2, 2.5};
    CHECK(gradient_check(quadratic, params, 1e-5) < 1e-8);
}

TEST_CASE("gradient check of a constant objective is zero") {
    const Objective constant = [](std::span<const double> p) {
        return ObjectiveEval{42.0, std::vector<double>(p.size(), 0.0)};
    };
    const std::vector<double> params{1.0, 2.0};
    CHECK(gradient_check(constant, params, 1e-5) == 0.0);
}
