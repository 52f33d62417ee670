#include "lia/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "lia/errors.hpp"
#include "lia/optimizer.hpp"
#include "lia/rng.hpp"

namespace lia {

AggregatedLabels majority_vote(const AnnotationDataset& dataset) {
    const Posteriors posteriors = init_posteriors_majority(dataset);
    AggregatedLabels labels;
    labels.num_classes = posteriors.num_classes;
    labels.values = posteriors.values;
    labels.method = "maj";
    return labels;
}

ObjectiveEval aggregated_cross_entropy(const Parameters& params, const ModelConfig& config,
                                       const std::vector<Instance>& instances,
                                       const AggregatedLabels& targets,
                                       std::span<const std::size_t> batch) {
    const int num_classes = config.num_classes;
    ObjectiveEval out;
    out.gradient.assign(params.layout.total, 0.0);
    std::span<double> theta_grad{out.gradient.data() + params.layout.theta_offset,
                                 params.layout.theta_size};
    std::vector<double> upstream(num_classes), input_grad;
    MlpTape tape;
    for (std::size_t i : batch) {
        const auto target = targets.row(i);
        const auto input = instance_input(params, config, instances, i);
        const auto h_log =
            log_softmax(mlp_forward(config.h_spec, params.theta(), input, &tape));
        for (int k = 0; k < num_classes; ++k) {
            out.value += target[k] * h_log[k];
            upstream[k] = target[k] - std::exp(h_log[k]);
        }
        input_grad.assign(input.size(), 0.0);
        mlp_backward_accumulate(config.h_spec, params.theta(), tape, upstream, theta_grad,
                                input_grad);
        // Route the input gradient into the embedding tables, mirroring the
        // EM engine's wiring for the h path.
        const ParameterLayout& layout = params.layout;
        std::size_t pos = 0;
        if (config.instance_mode == ReprMode::LearnedEmbedding) {
            double* row = out.gradient.data() + layout.instance_emb_offset +
                          i * layout.instance_emb_dim;
            for (std::size_t c = 0; c < layout.instance_emb_dim; ++c)
                row[c] += input_grad[c];
            pos = layout.instance_emb_dim;
        } else {
            pos = instances[i].features->size();
        }
        if (config.multi_label) {
            double* row = out.gradient.data() + layout.label_emb_offset +
                          *instances[i].task * layout.label_emb_dim;
            for (std::size_t c = 0; c < layout.label_emb_dim; ++c)
                row[c] += input_grad[pos + c];
        }
    }
    if (!std::isfinite(out.value))
        throw NumericError("two-stage objective is not finite");
    return out;
}

Parameters two_stage_train(const std::vector<Instance>& instances,
                           const AggregatedLabels& aggregated, const ModelConfig& config,
                           const EmConfig& optimizer_config) {
    if (!config.finalized) throw ConfigError("model config must be finalized");
    if (aggregated.num_instances() != instances.size())
        throw ShapeError("aggregated labels do not match the instance set");
    if (aggregated.num_classes != config.num_classes)
        throw ShapeError("aggregated labels have the wrong class count");

    Parameters params =
        init_ground_truth_parameters(config, instances, optimizer_config.seed);
    if (optimizer_config.m_step_iterations == 0) return params;

    OptimizerState optimizer =
        OptimizerState::create(params.values.size(), optimizer_config.learning_rate);
    Rng shuffle_rng(optimizer_config.seed ^ 0xbb67ae8584caa73bull);
    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> neg_grad(params.values.size());

    int steps_done = 0;
    while (steps_done < optimizer_config.m_step_iterations) {
        shuffle(order, shuffle_rng);
        for (std::size_t start = 0;
             start < order.size() && steps_done < optimizer_config.m_step_iterations;
             start += optimizer_config.batch_size) {
            const std::size_t stop =
                std::min(order.size(), start + optimizer_config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const ObjectiveEval eval =
                aggregated_cross_entropy(params, config, instances, aggregated, batch);
            for (std::size_t c = 0; c < neg_grad.size(); ++c)
                neg_grad[c] = -eval.gradient[c];
            amsgrad_step(optimizer, params.all(), neg_grad);
            ++steps_done;
        }
    }
    return params;
}

}  // namespace lia
