#include "lia/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "lia/errors.hpp"
#include "lia/rng.hpp"

namespace lia {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Forward cache for competence tensors, one slot per (predictor, task).
struct CompetenceCache {
    const Parameters& params;
    const ModelConfig& config;
    const AnnotationDataset& dataset;
    std::size_t num_tasks;
    std::vector<char> have;
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> tensors;

    CompetenceCache(const Parameters& p, const ModelConfig& c, const AnnotationDataset& d)
        : params(p), config(c), dataset(d), num_tasks(d.num_tasks()) {
        const std::size_t slots = d.predictors.size() * num_tasks;
        have.assign(slots, 0);
        inputs.resize(slots);
        tensors.resize(slots);
    }

    std::size_t slot(std::size_t predictor, std::size_t task) const {
        return predictor * num_tasks + task;
    }

    std::size_t ensure(std::size_t predictor, std::optional<std::size_t> task_opt) {
        const std::size_t task = task_opt.value_or(0);
        const std::size_t s = slot(predictor, task);
        if (!have[s]) {
            inputs[s] = predictor_input(params, config, dataset.predictors, predictor,
                                        config.multi_label ? task_opt : std::nullopt);
            const auto tensor =
                competence(params, config, dataset.predictors, predictor,
                           config.multi_label ? task_opt : std::nullopt);
            tensors[s] = tensor.values;
            have[s] = 1;
        }
        return s;
    }
};

/// Row-wise log-softmax of the bilinear confusion logits.
/// logq and q must hold C*C entries.
void q_log_rows(const double* d_vals, const double* c_vals, int num_classes, int latent,
                double* logq, double* q) {
    const int c2 = num_classes;
    for (int k = 0; k < num_classes; ++k) {
        double* log_row = logq + k * c2;
        for (int l = 0; l < num_classes; ++l) {
            const double* d_ptr = d_vals + (static_cast<std::size_t>(k) * c2 + l) * latent;
            const double* c_ptr = c_vals + (static_cast<std::size_t>(k) * c2 + l) * latent;
            double acc = 0.0;
            for (int m = 0; m < latent; ++m) acc += d_ptr[m] * c_ptr[m];
            log_row[l] = acc;
        }
        double shift = log_row[0];
        for (int l = 1; l < num_classes; ++l) shift = std::max(shift, log_row[l]);
        double total = 0.0;
        for (int l = 0; l < num_classes; ++l) total += std::exp(log_row[l] - shift);
        const double log_norm = shift + std::log(total);
        double* q_row = q + k * c2;
        for (int l = 0; l < num_classes; ++l) {
            log_row[l] -= log_norm;
            q_row[l] = std::exp(log_row[l]);
        }
    }
}

std::span<double> grad_segment(std::vector<double>& grad, std::size_t offset,
                               std::size_t size) {
    return {grad.data() + offset, size};
}

/// Adds the gradient w.r.t. an instance's model input to the embedding
/// tables it was assembled from. No-op for the feature part.
void route_instance_grad(std::vector<double>& grad, const Parameters& params,
                         const ModelConfig& config, const Instance& instance,
                         std::size_t index, std::span<const double> input_grad) {
    const ParameterLayout& layout = params.layout;
    std::size_t pos = 0;
    if (config.instance_mode == ReprMode::LearnedEmbedding) {
        const std::size_t dim = layout.instance_emb_dim;
        double* row = grad.data() + layout.instance_emb_offset + index * dim;
        for (std::size_t c = 0; c < dim; ++c) row[c] += input_grad[c];
        pos = dim;
    } else {
        pos = instance.features->size();
    }
    if (config.multi_label) {
        const std::size_t dim = layout.label_emb_dim;
        double* row = grad.data() + layout.label_emb_offset + *instance.task * dim;
        for (std::size_t c = 0; c < dim; ++c) row[c] += input_grad[pos + c];
    }
}

void route_predictor_grad(std::vector<double>& grad, const Parameters& params,
                          const ModelConfig& config, const Predictor& predictor,
                          std::size_t index, std::size_t task,
                          std::span<const double> input_grad) {
    const ParameterLayout& layout = params.layout;
    std::size_t pos = 0;
    if (config.predictor_mode == ReprMode::LearnedEmbedding) {
        const std::size_t dim = layout.predictor_emb_dim;
        double* row = grad.data() + layout.predictor_emb_offset + index * dim;
        for (std::size_t c = 0; c < dim; ++c) row[c] += input_grad[c];
        pos = dim;
    } else {
        pos = predictor.representation->size();
    }
    if (config.multi_label) {
        const std::size_t dim = layout.label_emb_dim;
        double* row = grad.data() + layout.label_emb_offset + task * dim;
        for (std::size_t c = 0; c < dim; ++c) row[c] += input_grad[pos + c];
    }
}

/// Turns accumulated competence-tensor gradients into psi, predictor
/// embedding and label embedding gradients.
void flush_competence_grads(std::vector<double>& grad, const Parameters& params,
                            const ModelConfig& config, const AnnotationDataset& dataset,
                            const CompetenceCache& cache,
                            const std::vector<std::vector<double>>& tensor_grads) {
    const std::size_t out = config.confusion_size();
    const auto weights = params.psi_weights();
    std::vector<double> input_grad;
    for (std::size_t s = 0; s < tensor_grads.size(); ++s) {
        if (tensor_grads[s].empty()) continue;
        const std::vector<double>& input = cache.inputs[s];
        const std::vector<double>& tensor_grad = tensor_grads[s];
        double* weight_grad = grad.data() + params.layout.psi_weight_offset;
        double* bias_grad = grad.data() + params.layout.psi_bias_offset;
        input_grad.assign(input.size(), 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double g = tensor_grad[o];
            if (g == 0.0) continue;
            const double* weight_row = weights.data() + o * input.size();
            double* grad_row = weight_grad + o * input.size();
            bias_grad[o] += g;
            for (std::size_t c = 0; c < input.size(); ++c) {
                grad_row[c] += g * input[c];
                input_grad[c] += g * weight_row[c];
            }
        }
        const std::size_t predictor = s / cache.num_tasks;
        const std::size_t task = s % cache.num_tasks;
        route_predictor_grad(grad, params, config, dataset.predictors[predictor], predictor,
                             task, input_grad);
    }
}

void check_ready(const Parameters& params, const ModelConfig& config,
                 const AnnotationDataset& dataset) {
    if (!config.finalized) throw ConfigError("model config must be finalized");
    if (params.values.size() != params.layout.total)
        throw ShapeError("parameter vector does not match its layout");
    if (config.instance_mode == ReprMode::LearnedEmbedding &&
        params.layout.instance_emb_rows < dataset.instances.size())
        throw ShapeError("instance embedding table smaller than the dataset");
}

}  // namespace

void Posteriors::validate() const {
    if (num_classes < 2) throw ValidationError("posteriors need num_classes >= 2");
    if (values.size() % num_classes != 0)
        throw ShapeError("posterior matrix size is not a multiple of num_classes");
    for (std::size_t i = 0; i < num_instances(); ++i) {
        double total = 0.0;
        for (double v : row(i)) {
            if (!(v >= 0.0)) throw ValidationError("posterior entries must be >= 0");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("posterior row does not sum to 1");
    }
}

void EmConfig::validate() const {
    if (em_iterations < 1) throw ConfigError("em_iterations must be >= 1");
    if (m_step_iterations < 1) throw ConfigError("m_step_iterations must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (fine_tune_iterations < 0) throw ConfigError("fine_tune_iterations must be >= 0");
    if (convergence_tolerance < 0.0)
        throw ConfigError("convergence_tolerance must be >= 0");
}

void TrainTrace::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write trace: " + path);
    out << "iteration,phase,objective,marginal_ll,max_param_delta\n";
    char line[256];
    for (const auto& it : iterations) {
        std::snprintf(line, sizeof line, "%d,e_step,%.17g,%.17g,0\n", it.iteration,
                      it.objective_before, it.marginal_before);
        out << line;
        std::snprintf(line, sizeof line, "%d,m_step,%.17g,%.17g,%.17g\n", it.iteration,
                      it.objective_after, it.marginal_after, it.max_param_delta);
        out << line;
    }
    if (fine_tune) {
        const int it = iterations.empty() ? 0 : iterations.back().iteration + 1;
        std::snprintf(line, sizeof line, "%d,fine_tune_entry,%.17g,%.17g,0\n", it,
                      fine_tune->marginal_before, fine_tune->marginal_before);
        out << line;
        std::snprintf(line, sizeof line, "%d,fine_tune_exit,%.17g,%.17g,%.17g\n", it,
                      fine_tune->marginal_after, fine_tune->marginal_after,
                      fine_tune->max_param_delta);
        out << line;
    }
}

Posteriors init_posteriors_majority(const AnnotationDataset& dataset) {
    Posteriors posteriors;
    posteriors.num_classes = dataset.num_classes;
    posteriors.values.assign(dataset.instances.size() * dataset.num_classes, 0.0);
    const double uniform = 1.0 / dataset.num_classes;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        auto row = posteriors.row(i);
        const auto& anns = dataset.annotations_of[i];
        if (anns.empty()) {
            for (double& v : row) v = uniform;
            continue;
        }
        for (std::size_t a : anns) {
            const Annotation& annotation = dataset.annotations[a];
            if (annotation.soft_label)
                for (int k = 0; k < dataset.num_classes; ++k)
                    row[k] += (*annotation.soft_label)[k];
            else
                row[annotation.label] += 1.0;
        }
        const double count = static_cast<double>(anns.size());
        for (double& v : row) v /= count;
    }
    return posteriors;
}

Posteriors e_step(const Parameters& params, const ModelConfig& config,
                  const AnnotationDataset& dataset) {
    check_ready(params, config, dataset);
    const int num_classes = config.num_classes;
    Posteriors posteriors;
    posteriors.num_classes = num_classes;
    posteriors.values.assign(dataset.instances.size() * num_classes, 0.0);

    CompetenceCache cache(params, config, dataset);
    std::vector<double> logq(num_classes * num_classes);
    std::vector<double> q(num_classes * num_classes);

    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const auto input = instance_input(params, config, dataset.instances, i);
        std::vector<double> log_lambda =
            log_softmax(mlp_forward(config.h_spec, params.theta(), input));
        const auto& anns = dataset.annotations_of[i];
        if (!anns.empty()) {
            const auto d_vals = mlp_forward(config.d_spec, params.phi(), input);
            for (std::size_t a : anns) {
                const Annotation& annotation = dataset.annotations[a];
                const std::size_t s =
                    cache.ensure(annotation.predictor, dataset.instances[i].task);
                q_log_rows(d_vals.data(), cache.tensors[s].data(), num_classes,
                           config.latent_dim, logq.data(), q.data());
                for (int k = 0; k < num_classes; ++k)
                    log_lambda[k] += logq[k * num_classes + annotation.label];
            }
        }
        const auto row = softmax(log_lambda);
        for (int k = 0; k < num_classes; ++k) {
            if (!std::isfinite(row[k]))
                throw NumericError("e_step produced a non-finite posterior",
                                   static_cast<std::ptrdiff_t>(i * num_classes + k));
            posteriors.values[i * num_classes + k] = row[k];
        }
    }
    return posteriors;
}

ObjectiveEval m_step_objective(const Parameters& params, const ModelConfig& config,
                               const AnnotationDataset& dataset,
                               const Posteriors& posteriors,
                               std::span<const std::size_t> batch) {
    check_ready(params, config, dataset);
    if (batch.empty()) throw ConfigError("m_step_objective: batch must be nonempty");
    if (posteriors.num_instances() != dataset.instances.size())
        throw ShapeError("posteriors do not match the dataset");

    const int num_classes = config.num_classes;
    const std::size_t ccl = config.confusion_size();
    ObjectiveEval out;
    out.gradient.assign(params.layout.total, 0.0);

    CompetenceCache cache(params, config, dataset);
    std::vector<std::vector<double>> comp_grads(cache.have.size());
    std::vector<double> logq(num_classes * num_classes), q(num_classes * num_classes);
    std::vector<double> d_grad(ccl), h_up(num_classes), input_grad;
    MlpTape h_tape, d_tape;

    const auto theta_grad =
        grad_segment(out.gradient, params.layout.theta_offset, params.layout.theta_size);
    const auto phi_grad =
        grad_segment(out.gradient, params.layout.phi_offset, params.layout.phi_size);

    for (std::size_t i : batch) {
        const auto w = posteriors.row(i);
        const auto input = instance_input(params, config, dataset.instances, i);
        const auto h_logits = mlp_forward(config.h_spec, params.theta(), input, &h_tape);
        const auto h_log = log_softmax(h_logits);
        for (int k = 0; k < num_classes; ++k) {
            out.value += w[k] * h_log[k];
            h_up[k] = w[k] - std::exp(h_log[k]);
        }
        input_grad.assign(input.size(), 0.0);
        mlp_backward_accumulate(config.h_spec, params.theta(), h_tape, h_up, theta_grad,
                                input_grad);

        const auto& anns = dataset.annotations_of[i];
        if (!anns.empty()) {
            const auto d_vals = mlp_forward(config.d_spec, params.phi(), input, &d_tape);
            std::fill(d_grad.begin(), d_grad.end(), 0.0);
            for (std::size_t a : anns) {
                const Annotation& annotation = dataset.annotations[a];
                const int observed = annotation.label;
                const std::size_t s =
                    cache.ensure(annotation.predictor, dataset.instances[i].task);
                const std::vector<double>& c_vals = cache.tensors[s];
                q_log_rows(d_vals.data(), c_vals.data(), num_classes, config.latent_dim,
                           logq.data(), q.data());
                if (comp_grads[s].empty()) comp_grads[s].assign(ccl, 0.0);
                std::vector<double>& c_grad = comp_grads[s];
                for (int k = 0; k < num_classes; ++k) {
                    const double wk = w[k];
                    out.value += wk * logq[k * num_classes + observed];
                    for (int l = 0; l < num_classes; ++l) {
                        const double qg =
                            wk * ((l == observed ? 1.0 : 0.0) - q[k * num_classes + l]);
                        const std::size_t base =
                            (static_cast<std::size_t>(k) * num_classes + l) *
                            config.latent_dim;
                        for (int m = 0; m < config.latent_dim; ++m) {
                            d_grad[base + m] += qg * c_vals[base + m];
                            c_grad[base + m] += qg * d_vals[base + m];
                        }
                    }
                }
            }
            mlp_backward_accumulate(config.d_spec, params.phi(), d_tape, d_grad, phi_grad,
                                    input_grad);
        }
        route_instance_grad(out.gradient, params, config, dataset.instances[i], i,
                            input_grad);
    }
    flush_competence_grads(out.gradient, params, config, dataset, cache, comp_grads);
    if (!std::isfinite(out.value))
        throw NumericError("m_step objective is not finite");
    return out;
}

double m_step_value(const Parameters& params, const ModelConfig& config,
                    const AnnotationDataset& dataset, const Posteriors& posteriors) {
    check_ready(params, config, dataset);
    if (posteriors.num_instances() != dataset.instances.size())
        throw ShapeError("posteriors do not match the dataset");
    const int num_classes = config.num_classes;
    CompetenceCache cache(params, config, dataset);
    std::vector<double> logq(num_classes * num_classes), q(num_classes * num_classes);
    double value = 0.0;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const auto w = posteriors.row(i);
        const auto input = instance_input(params, config, dataset.instances, i);
        const auto h_log = log_softmax(mlp_forward(config.h_spec, params.theta(), input));
        for (int k = 0; k < num_classes; ++k) value += w[k] * h_log[k];
        const auto& anns = dataset.annotations_of[i];
        if (anns.empty()) continue;
        const auto d_vals = mlp_forward(config.d_spec, params.phi(), input);
        for (std::size_t a : anns) {
            const Annotation& annotation = dataset.annotations[a];
            const std::size_t s = cache.ensure(annotation.predictor, dataset.instances[i].task);
            q_log_rows(d_vals.data(), cache.tensors[s].data(), num_classes,
                       config.latent_dim, logq.data(), q.data());
            for (int k = 0; k < num_classes; ++k)
                value += w[k] * logq[k * num_classes + annotation.label];
        }
    }
    if (!std::isfinite(value)) throw NumericError("m_step objective is not finite");
    return value;
}

ObjectiveEval marginal_objective(const Parameters& params, const ModelConfig& config,
                                 const AnnotationDataset& dataset,
                                 std::span<const std::size_t> batch) {
    check_ready(params, config, dataset);
    const int num_classes = config.num_classes;
    const std::size_t ccl = config.confusion_size();
    ObjectiveEval out;
    out.gradient.assign(params.layout.total, 0.0);

    CompetenceCache cache(params, config, dataset);
    std::vector<std::vector<double>> comp_grads(cache.have.size());
    std::vector<double> logq(num_classes * num_classes), q(num_classes * num_classes);
    std::vector<double> d_grad(ccl), h_up(num_classes), weights_buf(num_classes);
    std::vector<double> input_grad;
    MlpTape h_tape, d_tape;

    const auto theta_grad =
        grad_segment(out.gradient, params.layout.theta_offset, params.layout.theta_size);
    const auto phi_grad =
        grad_segment(out.gradient, params.layout.phi_offset, params.layout.phi_size);

    for (std::size_t i : batch) {
        const auto& anns = dataset.annotations_of[i];
        if (anns.empty()) continue;  // no observation terms for this instance
        const auto input = instance_input(params, config, dataset.instances, i);
        const auto h_logits = mlp_forward(config.h_spec, params.theta(), input, &h_tape);
        const auto h_log = log_softmax(h_logits);
        const auto d_vals = mlp_forward(config.d_spec, params.phi(), input, &d_tape);
        std::fill(h_up.begin(), h_up.end(), 0.0);
        std::fill(d_grad.begin(), d_grad.end(), 0.0);
        for (std::size_t a : anns) {
            const Annotation& annotation = dataset.annotations[a];
            const int observed = annotation.label;
            const std::size_t s =
                cache.ensure(annotation.predictor, dataset.instances[i].task);
            const std::vector<double>& c_vals = cache.tensors[s];
            q_log_rows(d_vals.data(), c_vals.data(), num_classes, config.latent_dim,
                       logq.data(), q.data());
            // log sum_k exp(log h_k + log Q[k, observed]), stabilized
            double shift = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < num_classes; ++k) {
                weights_buf[k] = h_log[k] + logq[k * num_classes + observed];
                shift = std::max(shift, weights_buf[k]);
            }
            double total = 0.0;
            for (int k = 0; k < num_classes; ++k)
                total += std::exp(weights_buf[k] - shift);
            const double log_sum = shift + std::log(total);
            out.value += log_sum;
            for (int k = 0; k < num_classes; ++k)
                weights_buf[k] = std::exp(weights_buf[k] - log_sum);

            if (comp_grads[s].empty()) comp_grads[s].assign(ccl, 0.0);
            std::vector<double>& c_grad = comp_grads[s];
            for (int k = 0; k < num_classes; ++k) {
                const double wk = weights_buf[k];
                h_up[k] += wk - std::exp(h_log[k]);
                for (int l = 0; l < num_classes; ++l) {
                    const double qg =
                        wk * ((l == observed ? 1.0 : 0.0) - q[k * num_classes + l]);
                    const std::size_t base =
                        (static_cast<std::size_t>(k) * num_classes + l) * config.latent_dim;
                    for (int m = 0; m < config.latent_dim; ++m) {
                        d_grad[base + m] += qg * c_vals[base + m];
                        c_grad[base + m] += qg * d_vals[base + m];
                    }
                }
            }
        }
        input_grad.assign(input.size(), 0.0);
        mlp_backward_accumulate(config.h_spec, params.theta(), h_tape, h_up, theta_grad,
                                input_grad);
        mlp_backward_accumulate(config.d_spec, params.phi(), d_tape, d_grad, phi_grad,
                                input_grad);
        route_instance_grad(out.gradient, params, config, dataset.instances[i], i,
                            input_grad);
    }
    flush_competence_grads(out.gradient, params, config, dataset, cache, comp_grads);
    if (!std::isfinite(out.value))
        throw NumericError("marginal objective is not finite");
    return out;
}

double marginal_likelihood(const Parameters& params, const ModelConfig& config,
                           const AnnotationDataset& dataset) {
    check_ready(params, config, dataset);
    const int num_classes = config.num_classes;
    CompetenceCache cache(params, config, dataset);
    std::vector<double> logq(num_classes * num_classes), q(num_classes * num_classes);
    std::vector<double> terms(num_classes);
    double value = 0.0;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const auto& anns = dataset.annotations_of[i];
        if (anns.empty()) continue;
        const auto input = instance_input(params, config, dataset.instances, i);
        const auto h_log = log_softmax(mlp_forward(config.h_spec, params.theta(), input));
        const auto d_vals = mlp_forward(config.d_spec, params.phi(), input);
        for (std::size_t a : anns) {
            const Annotation& annotation = dataset.annotations[a];
            const std::size_t s =
                cache.ensure(annotation.predictor, dataset.instances[i].task);
            q_log_rows(d_vals.data(), cache.tensors[s].data(), num_classes,
                       config.latent_dim, logq.data(), q.data());
            double shift = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < num_classes; ++k) {
                terms[k] = h_log[k] + logq[k * num_classes + annotation.label];
                shift = std::max(shift, terms[k]);
            }
            double total = 0.0;
            for (int k = 0; k < num_classes; ++k) total += std::exp(terms[k] - shift);
            value += shift + std::log(total);
        }
    }
    return value;
}

namespace {

struct MStepOutcome {
    double exit_value = 0.0;
};

/// AMSGrad ascent on one objective. When the whole dataset fits in a single
/// batch the objective value is deterministic per step, so the best point
/// along the trajectory (including the entry point) is adopted; that keeps
/// each M-step a proper generalized-EM update. With minibatches the final
/// iterate is kept.
template <typename ObjectiveFn, typename ValueFn>
MStepOutcome ascend(Parameters& params, const EmConfig& em_config, int iterations,
                    std::size_t num_instances, const ObjectiveFn& objective,
                    const ValueFn& full_value, Rng& shuffle_rng) {
    std::vector<std::size_t> order(num_instances);
    for (std::size_t i = 0; i < num_instances; ++i) order[i] = i;
    OptimizerState optimizer =
        OptimizerState::create(params.values.size(), em_config.learning_rate);
    std::vector<double> neg_grad(params.values.size());
    const bool full_batch =
        num_instances <= static_cast<std::size_t>(em_config.batch_size);

    if (full_batch) {
        double best_value = full_value(params);
        std::vector<double> best_params = params.values;
        for (int step = 0; step < iterations; ++step) {
            const ObjectiveEval eval = objective(params, order);
            if (eval.value > best_value) {
                best_value = eval.value;
                best_params = params.values;
            }
            for (std::size_t c = 0; c < neg_grad.size(); ++c)
                neg_grad[c] = -eval.gradient[c];
            amsgrad_step(optimizer, params.all(), neg_grad);
        }
        const double final_value = full_value(params);
        if (final_value > best_value) {
            best_value = final_value;
        } else {
            params.values = std::move(best_params);
        }
        return {best_value};
    }

    int steps_done = 0;
    while (steps_done < iterations) {
        shuffle(order, shuffle_rng);
        for (std::size_t start = 0; start < order.size() && steps_done < iterations;
             start += em_config.batch_size) {
            const std::size_t stop =
                std::min(order.size(), start + em_config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const ObjectiveEval eval = objective(params, batch);
            for (std::size_t c = 0; c < neg_grad.size(); ++c)
                neg_grad[c] = -eval.gradient[c];
            amsgrad_step(optimizer, params.all(), neg_grad);
            ++steps_done;
        }
    }
    return {full_value(params)};
}

double max_abs_delta(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

EmResult run_em(const AnnotationDataset& dataset, const ModelConfig& config,
                const EmConfig& em_config,
                const std::optional<Posteriors>& initial_posteriors) {
    em_config.validate();
    if (dataset.instances.empty()) throw ConfigError("run_em: dataset has no instances");
    ModelConfig cfg = config;
    if (!cfg.finalized) cfg.finalize(dataset);

    const auto start = Clock::now();
    Parameters params = init_parameters(cfg, dataset, em_config.seed);
    Posteriors posteriors =
        initial_posteriors ? *initial_posteriors : init_posteriors_majority(dataset);
    posteriors.validate();
    if (posteriors.num_instances() != dataset.instances.size())
        throw ShapeError("initial posteriors do not match the dataset");

    Rng shuffle_rng(em_config.seed ^ 0x9e3779b97f4a7c15ull);
    TrainTrace trace;

    for (int t = 0; t < em_config.em_iterations; ++t) {
        if (t > 0) posteriors = e_step(params, cfg, dataset);

        EmIterationStats stats;
        stats.iteration = t;
        stats.objective_before = m_step_value(params, cfg, dataset, posteriors);
        stats.marginal_before = marginal_likelihood(params, cfg, dataset);
        const std::vector<double> entry = params.values;

        const MStepOutcome outcome = ascend(
            params, em_config, em_config.m_step_iterations, dataset.instances.size(),
            [&](const Parameters& p, std::span<const std::size_t> batch) {
                return m_step_objective(p, cfg, dataset, posteriors, batch);
            },
            [&](const Parameters& p) { return m_step_value(p, cfg, dataset, posteriors); },
            shuffle_rng);

        stats.objective_after = outcome.exit_value;
        stats.marginal_after = marginal_likelihood(params, cfg, dataset);
        stats.max_param_delta = max_abs_delta(entry, params.values);
        stats.elapsed_seconds = seconds_since(start);
        trace.iterations.push_back(stats);
        if (stats.max_param_delta < em_config.convergence_tolerance) break;
    }

    Posteriors final_posteriors = e_step(params, cfg, dataset);
    return {std::move(params), std::move(final_posteriors), std::move(trace), cfg};
}

Parameters fine_tune(const Parameters& params, const ModelConfig& config,
                     const AnnotationDataset& dataset, const EmConfig& em_config,
                     TrainTrace* trace) {
    em_config.validate();
    ModelConfig cfg = config;
    if (!cfg.finalized) cfg.finalize(dataset);

    const auto start = Clock::now();
    Parameters tuned = params;
    FineTuneStats stats;
    stats.marginal_before = marginal_likelihood(tuned, cfg, dataset);
    stats.iterations = em_config.fine_tune_iterations;

    if (em_config.fine_tune_iterations > 0) {
        Rng shuffle_rng(em_config.seed ^ 0x6a09e667f3bcc908ull);
        ascend(
            tuned, em_config, em_config.fine_tune_iterations, dataset.instances.size(),
            [&](const Parameters& p, std::span<const std::size_t> batch) {
                return marginal_objective(p, cfg, dataset, batch);
            },
            [&](const Parameters& p) { return marginal_likelihood(p, cfg, dataset); },
            shuffle_rng);
    }
    stats.marginal_after = marginal_likelihood(tuned, cfg, dataset);
    stats.max_param_delta = max_abs_delta(params.values, tuned.values);
    stats.elapsed_seconds = seconds_since(start);
    if (trace) trace->fine_tune = stats;
    return tuned;
}

}  // namespace lia
