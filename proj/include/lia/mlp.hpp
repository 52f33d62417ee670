#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lia/rng.hpp"

namespace lia {

enum class Activation { LeakyRelu, Relu, Tanh, Identity };

std::string activation_name(Activation activation);
Activation activation_from_name(const std::string& name);

/// Fully connected network: hidden layers share one nonlinearity, the output
/// layer is linear. Parameters are packed per layer as the row-major weight
/// matrix (fan_out x fan_in) followed by the bias vector.
struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_layers;
    std::size_t output_dim = 0;
    Activation activation = Activation::LeakyRelu;

    /// [input_dim, hidden..., output_dim]
    std::vector<std::size_t> layer_dims() const;
    /// sum over layers of (fan_in + 1) * fan_out
    std::size_t parameter_count() const;
    void validate() const;
};

/// Forward cache for backpropagation. post[0] is the input; post[l] and
/// pre[l-1] are the activations and pre-activations after hidden layer l.
struct MlpTape {
    std::vector<std::vector<double>> post;
    std::vector<std::vector<double>> pre;
};

/// Returns the output logits. Fills `tape` when given.
std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> input, MlpTape* tape = nullptr);

/// Gradients of <upstream, logits> with respect to parameters and input,
/// accumulated (+=) into `param_grad` and `input_grad`.
void mlp_backward_accumulate(const MlpSpec& spec, std::span<const double> params,
                             const MlpTape& tape, std::span<const double> upstream,
                             std::span<double> param_grad, std::span<double> input_grad);

/// One-shot convenience form: runs the forward pass internally and returns
/// freshly allocated (param_grad, input_grad).
std::pair<std::vector<double>, std::vector<double>> mlp_backward(
    const MlpSpec& spec, std::span<const double> params,
    std::span<const double> input, std::span<const double> upstream);

/// Max-shifted softmax; output is on the simplex for any finite input.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
void init_mlp_params(const MlpSpec& spec, std::span<double> params, Rng& rng);

}  // namespace lia
