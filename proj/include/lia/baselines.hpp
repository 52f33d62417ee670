#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lia/data.hpp"
#include "lia/em.hpp"
#include "lia/model.hpp"

namespace lia {

/// Per-instance aggregated label distribution produced by a standalone
/// aggregator (the first stage of the two-stage pipeline).
struct AggregatedLabels {
    int num_classes = 0;
    std::vector<double> values;  // row-major, rows on the simplex
    std::string method;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * num_classes, static_cast<std::size_t>(num_classes)};
    }
    std::size_t num_instances() const {
        return num_classes == 0 ? 0 : values.size() / num_classes;
    }
};

/// Soft majority vote. Same computation as the EM initializer, exposed as a
/// standalone aggregator.
AggregatedLabels majority_vote(const AnnotationDataset& dataset);

/// Cross-entropy of the ground-truth head against the aggregated targets:
/// sum_i sum_k p_ik log h_k(x_i), with gradients for theta and the
/// instance/label embeddings.
ObjectiveEval aggregated_cross_entropy(const Parameters& params, const ModelConfig& config,
                                       const std::vector<Instance>& instances,
                                       const AggregatedLabels& targets,
                                       std::span<const std::size_t> batch);

/// Second stage: trains the ground-truth head (and the embeddings it reads)
/// with cross-entropy against the aggregated labels. Takes instances only,
/// so annotations are unreachable once aggregation has happened.
Parameters two_stage_train(const std::vector<Instance>& instances,
                           const AggregatedLabels& aggregated, const ModelConfig& config,
                           const EmConfig& optimizer_config);

}  // namespace lia
