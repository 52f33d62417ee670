#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lia/data.hpp"
#include "lia/mlp.hpp"
#include "lia/tensor.hpp"

namespace lia {

enum class ReprMode { Features, LearnedEmbedding };

std::string repr_mode_name(ReprMode mode);
ReprMode repr_mode_from_name(const std::string& name);

/// Shapes of the ground-truth head h, the difficulty net d, the linear
/// competence map c, and the optional embedding tables.
struct ModelConfig {
    int num_classes = 2;   // C
    int latent_dim = 1;    // L
    ReprMode instance_mode = ReprMode::Features;
    int instance_embedding_dim = 16;
    ReprMode predictor_mode = ReprMode::LearnedEmbedding;
    int predictor_embedding_dim = 16;
    std::vector<std::size_t> hidden_layers{16, 16, 16, 16};
    Activation activation = Activation::LeakyRelu;
    bool multi_label = false;
    int label_embedding_dim = 8;

    // Derived by finalize(); input dims depend on the dataset.
    MlpSpec h_spec;
    MlpSpec d_spec;
    bool finalized = false;

    std::size_t confusion_size() const {
        return static_cast<std::size_t>(num_classes) * num_classes * latent_dim;
    }
    std::size_t instance_repr_dim(const AnnotationDataset& dataset) const;
    std::size_t predictor_repr_dim(const AnnotationDataset& dataset) const;

    /// Fills h_spec/d_spec input and output dims from the dataset and modes.
    void finalize(const AnnotationDataset& dataset);
    void validate() const;
};

/// Named segments of the flat parameter vector, in storage order:
/// theta | phi | psi weights | psi bias | instance | predictor | label
/// embedding tables. Zero-sized segments are simply absent.
struct ParameterLayout {
    std::size_t theta_offset = 0, theta_size = 0;
    std::size_t phi_offset = 0, phi_size = 0;
    std::size_t psi_weight_offset = 0, psi_weight_size = 0;
    std::size_t psi_bias_offset = 0, psi_bias_size = 0;
    std::size_t instance_emb_offset = 0, instance_emb_rows = 0, instance_emb_dim = 0;
    std::size_t predictor_emb_offset = 0, predictor_emb_rows = 0, predictor_emb_dim = 0;
    std::size_t label_emb_offset = 0, label_emb_rows = 0, label_emb_dim = 0;
    std::size_t total = 0;

    bool operator==(const ParameterLayout&) const = default;
};

struct Parameters {
    ParameterLayout layout;
    std::vector<double> values;

    std::span<double> all() { return values; }
    std::span<const double> all() const { return values; }
    std::span<const double> theta() const { return segment(layout.theta_offset, layout.theta_size); }
    std::span<const double> phi() const { return segment(layout.phi_offset, layout.phi_size); }
    std::span<const double> psi_weights() const {
        return segment(layout.psi_weight_offset, layout.psi_weight_size);
    }
    std::span<const double> psi_bias() const {
        return segment(layout.psi_bias_offset, layout.psi_bias_size);
    }
    std::span<const double> instance_embedding(std::size_t row) const {
        return segment(layout.instance_emb_offset + row * layout.instance_emb_dim,
                       layout.instance_emb_dim);
    }
    std::span<const double> predictor_embedding(std::size_t row) const {
        return segment(layout.predictor_emb_offset + row * layout.predictor_emb_dim,
                       layout.predictor_emb_dim);
    }
    std::span<const double> label_embedding(std::size_t row) const {
        return segment(layout.label_emb_offset + row * layout.label_emb_dim,
                       layout.label_emb_dim);
    }
    void check_finite() const;

  private:
    std::span<const double> segment(std::size_t offset, std::size_t size) const {
        return {values.data() + offset, size};
    }
};

/// Full parameter set for EM training (theta, phi, psi and any embeddings
/// the modes require). Draw order is fixed so runs are reproducible.
Parameters init_parameters(const ModelConfig& config, const AnnotationDataset& dataset,
                           std::uint64_t seed);

/// Ground-truth-head-only parameters for the two-stage baselines: phi, psi
/// and predictor embeddings are left out entirely.
Parameters init_ground_truth_parameters(const ModelConfig& config,
                                        const std::vector<Instance>& instances,
                                        std::uint64_t seed);

/// Representation fed to h and d for one instance (features or embedding
/// row, with the task's label embedding appended in multi-label mode).
std::vector<double> instance_input(const Parameters& params, const ModelConfig& config,
                                   const std::vector<Instance>& instances, std::size_t i);
/// Representation fed to c for one predictor, given the annotated
/// instance's task.
std::vector<double> predictor_input(const Parameters& params, const ModelConfig& config,
                                    const std::vector<Predictor>& predictors, std::size_t j,
                                    std::optional<std::size_t> task);

/// p(y_i = . | x_i): softmax of the h head.
std::vector<double> ground_truth(const Parameters& params, const ModelConfig& config,
                                 const std::vector<Instance>& instances, std::size_t i);

/// Raw difficulty tensor D_i, shape (C, C, L) in (true, observed, latent) order.
DenseTensor difficulty(const Parameters& params, const ModelConfig& config,
                       const std::vector<Instance>& instances, std::size_t i);

/// Raw competence tensor C_j = reshape(W r + b), same layout as difficulty.
DenseTensor competence(const Parameters& params, const ModelConfig& config,
                       const std::vector<Predictor>& predictors, std::size_t j,
                       std::optional<std::size_t> task = std::nullopt);

/// Bilinear logits: logits[k, l] = sum_m D[k, l, m] * C[k, l, m].
DenseTensor confusion_logits(const DenseTensor& difficulty_tensor,
                             const DenseTensor& competence_tensor);

/// Row-stochastic confusion matrix: each row is the softmax of its logits.
DenseTensor assemble_confusion(const DenseTensor& difficulty_tensor,
                               const DenseTensor& competence_tensor);

struct ConfusionTensorBatch {
    /// (instance index, predictor index) -> C x C row-stochastic matrix
    std::map<std::pair<std::size_t, std::size_t>, DenseTensor> entries;
};

/// One confusion matrix per observed (instance, predictor) pair.
ConfusionTensorBatch build_confusions(const Parameters& params, const ModelConfig& config,
                                      const AnnotationDataset& dataset);

struct Checkpoint {
    ModelConfig config;
    Parameters params;
    std::uint64_t seed = 0;
    int em_iteration = 0;
};

/// JSON checkpoint; doubles round-trip bit-exactly.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lia
