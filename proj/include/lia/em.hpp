#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lia/data.hpp"
#include "lia/model.hpp"
#include "lia/optimizer.hpp"

namespace lia {

/// Row-stochastic N x C matrix of current posterior label beliefs.
struct Posteriors {
    int num_classes = 0;
    std::vector<double> values;  // row-major

    std::size_t num_instances() const {
        return num_classes == 0 ? 0 : values.size() / num_classes;
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * num_classes, static_cast<std::size_t>(num_classes)};
    }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * num_classes, static_cast<std::size_t>(num_classes)};
    }
    void validate() const;
};

struct EmConfig {
    int em_iterations = 10;
    int m_step_iterations = 1000;
    int batch_size = 1024;
    double learning_rate = 1e-3;
    bool fine_tune = true;
    int fine_tune_iterations = 1000;
    /// Max-norm parameter change below which EM stops early.
    double convergence_tolerance = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EmIterationStats {
    int iteration = 0;
    double objective_before = 0.0;  // expected complete-data log-likelihood at M-step entry
    double objective_after = 0.0;   // and at M-step exit
    double marginal_before = 0.0;
    double marginal_after = 0.0;
    double max_param_delta = 0.0;
    double elapsed_seconds = 0.0;
};

struct FineTuneStats {
    double marginal_before = 0.0;
    double marginal_after = 0.0;
    double max_param_delta = 0.0;
    int iterations = 0;
    double elapsed_seconds = 0.0;
};

struct TrainTrace {
    std::vector<EmIterationStats> iterations;
    std::optional<FineTuneStats> fine_tune;

    /// CSV with header iteration,phase,objective,marginal_ll,max_param_delta.
    void write_csv(const std::string& path) const;
};

/// Majority vote over each instance's annotations (soft labels when
/// present); instances without annotations get a uniform row.
Posteriors init_posteriors_majority(const AnnotationDataset& dataset);

/// Posterior p(y_i | data) with parameters held fixed, computed in the log
/// domain and normalized per instance.
Posteriors e_step(const Parameters& params, const ModelConfig& config,
                  const AnnotationDataset& dataset);

/// Expected complete-data log-likelihood over the batch of instances, with
/// its exact gradient for every parameter group.
ObjectiveEval m_step_objective(const Parameters& params, const ModelConfig& config,
                               const AnnotationDataset& dataset,
                               const Posteriors& posteriors,
                               std::span<const std::size_t> batch);
double m_step_value(const Parameters& params, const ModelConfig& config,
                    const AnnotationDataset& dataset, const Posteriors& posteriors);

/// Observed-data log-likelihood with the latent labels summed out.
double marginal_likelihood(const Parameters& params, const ModelConfig& config,
                           const AnnotationDataset& dataset);
ObjectiveEval marginal_objective(const Parameters& params, const ModelConfig& config,
                                 const AnnotationDataset& dataset,
                                 std::span<const std::size_t> batch);

struct EmResult {
    Parameters params;
    Posteriors posteriors;
    TrainTrace trace;
    ModelConfig config;  // finalized copy actually used
};

/// Full training loop: majority-vote initialization, then alternating
/// E-steps and AMSGrad M-steps with warm-started parameters, stopping after
/// em_iterations or when the parameter change drops below tolerance.
/// `initial_posteriors` overrides the majority-vote initialization.
EmResult run_em(const AnnotationDataset& dataset, const ModelConfig& config,
                const EmConfig& em_config,
                const std::optional<Posteriors>& initial_posteriors = std::nullopt);

/// Post-EM ascent on the marginal likelihood from the converged parameters.
Parameters fine_tune(const Parameters& params, const ModelConfig& config,
                     const AnnotationDataset& dataset, const EmConfig& em_config,
                     TrainTrace* trace = nullptr);

}  // namespace lia
