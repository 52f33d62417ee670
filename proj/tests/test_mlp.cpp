#include <doctest.h>

#include <cmath>

#include "lia/errors.hpp"
#include "lia/mlp.hpp"
#include "oracles.hpp"

using namespace lia;

TEST_CASE("parameter count matches (fan_in+1)*fan_out per layer") {
    MlpSpec spec{2, {16, 16, 16, 16}, 2};
    CHECK(spec.parameter_count() == 3 * 16 + 3 * (17 * 16) + 17 * 2);
    MlpSpec linear{3, {}, 4};
    CHECK(linear.parameter_count() == 4 * 4);
}

TEST_CASE("all-zero parameters give all-zero logits") {
    MlpSpec spec{3, {4, 4}, 2};
    std::vector<double> params(spec.parameter_count(), 0.0);
    const auto logits = mlp_forward(spec, params, std::vector<double>{1.0, -2.0, 0.5});
    for (double v : logits) CHECK(v == 0.0);
}

TEST_CASE("identity linear layer reproduces its input") {
    MlpSpec spec{3, {}, 3};
    std::vector<double> params(spec.parameter_count(), 0.0);
    for (std::size_t o = 0; o < 3; ++o) params[o * 3 + o] = 1.0;  // W = I, b = 0
    const std::vector<double> input{0.3, -1.7, 4.0};
    const auto logits = mlp_forward(spec, params, input);
    for (std::size_t i = 0; i < 3; ++i) CHECK(logits[i] == doctest::Approx(input[i]));
}

TEST_CASE("seeded forward pass matches the scalar-loop oracle") {
    MlpSpec spec{2, {16, 16}, 2};
    std::vector<double> params(spec.parameter_count());
    Rng rng(7);
    init_mlp_params(spec, params, rng);
    const std::vector<double> input{1.0, 0.0};
    const auto logits = mlp_forward(spec, params, input);
    const auto expected = oracles::naive_mlp_forward(spec, params, input);
    REQUIRE(logits.size() == expected.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        CHECK(logits[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("forward rejects mismatched shapes") {
    MlpSpec spec{2, {4}, 2};
    std::vector<double> params(spec.parameter_count(), 0.0);
    CHECK_THROWS_AS(mlp_forward(spec, params, std::vector<double>{1.0, 2.0, 3.0}),
                    ShapeError);
    std::vector<double> short_params(3, 0.0);
    CHECK_THROWS_AS(mlp_forward(spec, short_params, std::vector<double>{1.0, 2.0}),
                    ShapeError);
}

TEST_CASE("zero upstream gradient gives zero gradients") {
    MlpSpec spec{2, {8}, 3};
    std::vector<double> params(spec.parameter_count());
    Rng rng(11);
    init_mlp_params(spec, params, rng);
    const auto [param_grad, input_grad] = mlp_backward(
        spec, params, std::vector<double>{0.4, -0.2}, std::vector<double>{0.0, 0.0, 0.0});
    for (double g : param_grad) CHECK(g == 0.0);
    for (double g : input_grad) CHECK(g == 0.0);
}

TEST_CASE("linear layer gradient is the analytic outer product") {
    MlpSpec spec{2, {}, 2};
    std::vector<double> params{1.0, 2.0, -1.0, 0.5, 0.1, -0.3};  // W rows then bias
    const std::vector<double> input{0.7, -1.1};
    const std::vector<double> upstream{2.0, -3.0};
    const auto [param_grad, input_grad] = mlp_backward(spec, params, input, upstream);
    // dL/dW[o][i] = upstream[o] * input[i], dL/db[o] = upstream[o]
    CHECK(param_grad[0] == doctest::Approx(2.0 * 0.7));
    CHECK(param_grad[1] == doctest::Approx(2.0 * -1.1));
    CHECK(param_grad[2] == doctest::Approx(-3.0 * 0.7));
    CHECK(param_grad[3] == doctest::Approx(-3.0 * -1.1));
    CHECK(param_grad[4] == doctest::Approx(2.0));
    CHECK(param_grad[5] == doctest::Approx(-3.0));
    // dL/dx[i] = sum_o upstream[o] * W[o][i]
    CHECK(input_grad[0] == doctest::Approx(2.0 * 1.0 - 3.0 * -1.0));
    CHECK(input_grad[1] == doctest::Approx(2.0 * 2.0 - 3.0 * 0.5));
}

TEST_CASE("backward matches central finite differences on seeded nets") {
    for (std::uint64_t seed : {3ull, 19ull, 40ull}) {
        MlpSpec spec{3, {8, 8}, 4};
        std::vector<double> params(spec.parameter_count());
        Rng rng(seed);
        init_mlp_params(spec, params, rng);
        std::vector<double> input(3), upstream(4);
        for (double& v : input) v = uniform_real(rng, -1.0, 1.0);
        for (double& v : upstream) v = uniform_real(rng, -1.0, 1.0);

        const auto [param_grad, input_grad] = mlp_backward(spec, params, input, upstream);
        const auto numeric = oracles::numeric_gradient(
            [&](const std::vector<double>& p) {
                const auto logits = mlp_forward(spec, p, input);
                double value = 0.0;
                for (std::size_t i = 0; i < logits.size(); ++i)
                    value += upstream[i] * logits[i];
                return value;
            },
            params, 1e-5);
        CHECK(oracles::max_relative_error(param_grad, numeric) < 1e-4);

        const auto numeric_input = oracles::numeric_gradient(
            [&](const std::vector<double>& x) {
                const auto logits = mlp_forward(spec, params, x);
                double value = 0.0;
                for (std::size_t i = 0; i < logits.size(); ++i)
                    value += upstream[i] * logits[i];
                return value;
            },
            input, 1e-5);
        CHECK(oracles::max_relative_error(input_grad, numeric_input) < 1e-4);
    }
}

TEST_CASE("softmax of [0,0] is uniform") {
    const auto out = softmax(std::vector<double>{0.0, 0.0});
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("softmax is stable under huge logits") {
    const auto out = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(std::isfinite(out[0]));
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(0.0));
}

TEST_CASE("softmax of [2,0] matches the hand computation") {
    const auto out = softmax(std::vector<double>{2.0, 0.0});
    CHECK(out[0] == doctest::Approx(0.880797).epsilon(1e-6));
    CHECK(out[1] == doctest::Approx(0.119203).epsilon(1e-6));
}

TEST_CASE("softmax outputs lie on the simplex and shift-invariance holds") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 6);
        std::vector<double> logits(n), shifted(n);
        const double shift = uniform_real(rng, -50.0, 50.0);
        for (std::size_t i = 0; i < n; ++i) {
            logits[i] = uniform_real(rng, -30.0, 30.0);
            shifted[i] = logits[i] + shift;
        }
        const auto a = softmax(logits);
        const auto b = softmax(shifted);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(a[i] >= 0.0);
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
            total += a[i];
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("initialization is reproducible and bounded") {
    MlpSpec spec{4, {16}, 3};
    std::vector<double> a(spec.parameter_count()), b(spec.parameter_count());
    Rng r1(99), r2(99);
    init_mlp_params(spec, a, r1);
    init_mlp_params(spec, b, r2);
    CHECK(a == b);
    const double bound = std::sqrt(6.0 / (4 + 16));
    for (std::size_t w = 0; w < 4 * 16; ++w) CHECK(std::abs(a[w]) <= bound);
    for (std::size_t k = 4 * 16; k < 4 * 16 + 16; ++k) CHECK(a[k] == 0.0);  // biases
}
