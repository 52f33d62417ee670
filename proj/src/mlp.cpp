#include "lia/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "lia/errors.hpp"

namespace lia {

namespace {

constexpr double kLeakySlope = 0.01;

double activate(Activation activation, double x) {
    switch (activation) {
        case Activation::LeakyRelu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
        case Activation::Identity: return x;
    }
    return x;
}

double activate_derivative(Activation activation, double pre, double post) {
    switch (activation) {
        case Activation::LeakyRelu: return pre > 0.0 ? 1.0 : kLeakySlope;
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

}  // namespace

std::string activation_name(Activation activation) {
    switch (activation) {
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "leaky_relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw ConfigError("unknown activation: " + name);
}

std::vector<std::size_t> MlpSpec::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(hidden_layers.size() + 2);
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_layers.begin(), hidden_layers.end());
    dims.push_back(output_dim);
    return dims;
}

std::size_t MlpSpec::parameter_count() const {
    const auto dims = layer_dims();
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        count += (dims[l] + 1) * dims[l + 1];
    return count;
}

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1)
        throw ConfigError("MLP input and output dims must be >= 1");
    for (std::size_t w : hidden_layers)
        if (w < 1) throw ConfigError("MLP hidden widths must be >= 1");
}

std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> input, MlpTape* tape) {
    if (params.size() != spec.parameter_count())
        throw ShapeError("mlp_forward: parameter vector has wrong length");
    if (input.size() != spec.input_dim)
        throw ShapeError("mlp_forward: input has wrong length");

    const auto dims = spec.layer_dims();
    const std::size_t num_layers = dims.size() - 1;
    if (tape) {
        tape->post.assign(num_layers, {});
        tape->pre.assign(num_layers - 1, {});
        tape->post.resize(num_layers);
    }

    std::vector<double> current(input.begin(), input.end());
    std::size_t offset = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        if (tape) tape->post[l] = current;
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double* weights = params.data() + offset;
        const double* bias = weights + fan_in * fan_out;
        std::vector<double> next(fan_out);
        for (std::size_t o = 0; o < fan_out; ++o) {
            double acc = bias[o];
            const double* row = weights + o * fan_in;
            for (std::size_t i = 0; i < fan_in; ++i) acc += row[i] * current[i];
            next[o] = acc;
        }
        const bool is_output = (l + 1 == num_layers);
        if (!is_output) {
            if (tape) tape->pre[l] = next;
            for (double& v : next) v = activate(spec.activation, v);
        }
        current = std::move(next);
        offset += (fan_in + 1) * fan_out;
    }
    return current;
}

void mlp_backward_accumulate(const MlpSpec& spec, std::span<const double> params,
                             const MlpTape& tape, std::span<const double> upstream,
                             std::span<double> param_grad, std::span<double> input_grad) {
    if (param_grad.size() != spec.parameter_count())
        throw ShapeError("mlp_backward: parameter gradient has wrong length");
    if (upstream.size() != spec.output_dim)
        throw ShapeError("mlp_backward: upstream gradient has wrong length");
    if (input_grad.size() != spec.input_dim)
        throw ShapeError("mlp_backward: input gradient has wrong length");

    const auto dims = spec.layer_dims();
    const std::size_t num_layers = dims.size() - 1;

    // Offsets of each layer's parameter block.
    std::vector<std::size_t> offsets(num_layers);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        offsets[l] = offset;
        offset += (dims[l] + 1) * dims[l + 1];
    }

    std::vector<double> delta(upstream.begin(), upstream.end());
    for (std::size_t l = num_layers; l-- > 0;) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double* weights = params.data() + offsets[l];
        double* weight_grad = param_grad.data() + offsets[l];
        double* bias_grad = weight_grad + fan_in * fan_out;
        const std::vector<double>& layer_input = tape.post[l];

        std::vector<double> prev_delta(fan_in, 0.0);
        for (std::size_t o = 0; o < fan_out; ++o) {
            const double d = delta[o];
            const double* row = weights + o * fan_in;
            double* grad_row = weight_grad + o * fan_in;
            bias_grad[o] += d;
            for (std::size_t i = 0; i < fan_in; ++i) {
                grad_row[i] += d * layer_input[i];
                prev_delta[i] += d * row[i];
            }
        }
        if (l > 0) {
            const std::vector<double>& pre = tape.pre[l - 1];
            const std::vector<double>& post = tape.post[l];
            for (std::size_t i = 0; i < fan_in; ++i)
                prev_delta[i] *= activate_derivative(spec.activation, pre[i], post[i]);
        } else {
            for (std::size_t i = 0; i < fan_in; ++i) input_grad[i] += prev_delta[i];
        }
        delta = std::move(prev_delta);
    }
}

std::pair<std::vector<double>, std::vector<double>> mlp_backward(
    const MlpSpec& spec, std::span<const double> params,
    std::span<const double> input, std::span<const double> upstream) {
    MlpTape tape;
    mlp_forward(spec, params, input, &tape);
    std::vector<double> param_grad(spec.parameter_count(), 0.0);
    std::vector<double> input_grad(spec.input_dim, 0.0);
    mlp_backward_accumulate(spec, params, tape, upstream, param_grad, input_grad);
    return {std::move(param_grad), std::move(input_grad)};
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(log_softmax(logits));
    for (double& v : out) v = std::exp(v);
    return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
    const double shift = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double v : logits) total += std::exp(v - shift);
    const double log_norm = shift + std::log(total);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
    return out;
}

void init_mlp_params(const MlpSpec& spec, std::span<double> params, Rng& rng) {
    if (params.size() != spec.parameter_count())
        throw ShapeError("init_mlp_params: parameter vector has wrong length");
    const auto dims = spec.layer_dims();
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t w = 0; w < fan_in * fan_out; ++w)
            params[offset + w] = uniform_real(rng, -bound, bound);
        for (std::size_t b = 0; b < fan_out; ++b)
            params[offset + fan_in * fan_out + b] = 0.0;
        offset += (fan_in + 1) * fan_out;
    }
}

}  // namespace lia
