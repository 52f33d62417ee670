#pragma once

// Test-only reference implementations, written independently of the library
// code paths they check: plain scalar loops, explicit products instead of
// log-domain sums, and integer counting.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "lia/data.hpp"
#include "lia/mlp.hpp"

namespace oracles {

/// Straightforward per-layer forward pass with the same parameter packing
/// (row-major weights then bias per layer, hidden activation, linear output).
inline std::vector<double> naive_mlp_forward(const lia::MlpSpec& spec,
                                             const std::vector<double>& params,
                                             const std::vector<double>& input) {
    std::vector<std::size_t> dims;
    dims.push_back(spec.input_dim);
    for (std::size_t h : spec.hidden_layers) dims.push_back(h);
    dims.push_back(spec.output_dim);

    std::vector<double> activations = input;
    std::size_t cursor = 0;
    for (std::size_t layer = 0; layer + 1 < dims.size(); ++layer) {
        std::vector<double> next(dims[layer + 1], 0.0);
        for (std::size_t o = 0; o < dims[layer + 1]; ++o) {
            double total = 0.0;
            for (std::size_t i = 0; i < dims[layer]; ++i)
                total += params[cursor + o * dims[layer] + i] * activations[i];
            total += params[cursor + dims[layer] * dims[layer + 1] + o];
            next[o] = total;
        }
        cursor += (dims[layer] + 1) * dims[layer + 1];
        if (layer + 2 < dims.size()) {
            for (double& v : next) {
                switch (spec.activation) {
                    case lia::Activation::LeakyRelu: v = v > 0 ? v : 0.01 * v; break;
                    case lia::Activation::Relu: v = v > 0 ? v : 0.0; break;
                    case lia::Activation::Tanh: v = std::tanh(v); break;
                    case lia::Activation::Identity: break;
                }
            }
        }
        activations = next;
    }
    return activations;
}

inline std::vector<double> naive_softmax(const std::vector<double>& logits) {
    double top = logits[0];
    for (double v : logits) top = std::max(top, v);
    double total = 0.0;
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

/// Central finite differences of a value-only function.
inline std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> params, double step) {
    std::vector<double> gradient(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double original = params[i];
        params[i] = original + step;
        const double above = objective(params);
        params[i] = original - step;
        const double below = objective(params);
        params[i] = original;
        gradient[i] = (above - below) / (2.0 * step);
    }
    return gradient;
}

inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale =
            std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric[i]));
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

/// Direct posterior computation with explicit products: lambda_k = h_k *
/// prod_j Q_j[k, observed_j], normalized.
inline std::vector<double> product_posterior(
    const std::vector<double>& h_row,
    const std::vector<std::pair<std::vector<double>, int>>& q_and_observed,
    int num_classes) {
    std::vector<double> lambda(num_classes, 0.0);
    double total = 0.0;
    for (int k = 0; k < num_classes; ++k) {
        double value = h_row[k];
        for (const auto& [q, observed] : q_and_observed)
            value *= q[k * num_classes + observed];
        lambda[k] = value;
        total += value;
    }
    for (double& v : lambda) v /= total;
    return lambda;
}

/// Integer counting majority vote for one instance.
inline std::vector<double> counting_vote(const std::vector<int>& labels, int num_classes) {
    std::vector<long> counts(num_classes, 0);
    for (int label : labels) counts[label] += 1;
    std::vector<double> out(num_classes);
    for (int k = 0; k < num_classes; ++k)
        out[k] = static_cast<double>(counts[k]) / static_cast<double>(labels.size());
    return out;
}

/// Minimal dataset assembly for tests. Annotations are (instance, predictor,
/// label) triples; features are optional.
inline lia::AnnotationDataset make_dataset(
    int num_classes, std::size_t num_instances, std::size_t num_predictors,
    const std::vector<std::tuple<std::size_t, std::size_t, int>>& annotations,
    const std::vector<std::vector<double>>& features = {}) {
    lia::AnnotationDataset dataset;
    dataset.num_classes = num_classes;
    for (int k = 0; k < num_classes; ++k)
        dataset.class_catalog.push_back(std::to_string(k));
    for (std::size_t i = 0; i < num_instances; ++i) {
        lia::Instance instance;
        instance.id = "i" + std::to_string(i);
        if (!features.empty()) instance.features = features[i];
        dataset.instances.push_back(std::move(instance));
    }
    for (std::size_t j = 0; j < num_predictors; ++j)
        dataset.predictors.push_back(lia::Predictor{"p" + std::to_string(j), std::nullopt});
    for (const auto& [i, j, label] : annotations)
        dataset.annotations.push_back(lia::Annotation{i, j, label, std::nullopt});
    dataset.rebuild_index();
    dataset.validate();
    return dataset;
}

}  // namespace oracles
