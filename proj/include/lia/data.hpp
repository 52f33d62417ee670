#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lia {

struct Instance {
    std::string id;
    std::optional<std::vector<double>> features;
    /// Index into AnnotationDataset::label_catalog; set in multi-label mode only.
    std::optional<std::size_t> task;
};

struct Predictor {
    std::string id;
    std::optional<std::vector<double>> representation;
};

struct Annotation {
    std::size_t instance = 0;   // index into AnnotationDataset::instances
    std::size_t predictor = 0;  // index into AnnotationDataset::predictors
    int label = 0;              // class index in [0, num_classes)
    std::optional<std::vector<double>> soft_label;
};

/// Instances, predictors and the sparse observed labels. Ground-truth labels
/// deliberately live outside this type (see GroundTruth) so that nothing on
/// the training path can read them.
struct AnnotationDataset {
    int num_classes = 0;
    std::vector<Instance> instances;
    std::vector<Predictor> predictors;
    std::vector<Annotation> annotations;
    /// class index -> external label string; may be shorter than num_classes
    std::vector<std::string> class_catalog;
    /// task names in multi-label mode; empty in single-label mode
    std::vector<std::string> label_catalog;

    std::unordered_map<std::string, std::size_t> instance_index;
    std::unordered_map<std::string, std::size_t> predictor_index;
    /// instance -> indices into `annotations`
    std::vector<std::vector<std::size_t>> annotations_of;

    std::size_t num_tasks() const { return label_catalog.empty() ? 1 : label_catalog.size(); }
    std::optional<std::size_t> feature_dim() const;
    std::optional<std::size_t> predictor_repr_dim() const;
    std::string class_name(int label) const;

    /// Rebuilds the id maps and the per-instance annotation lists.
    void rebuild_index();
    void validate() const;
};

/// Evaluation-only labels, aligned with AnnotationDataset::instances.
struct GroundTruth {
    std::vector<std::optional<int>> labels;
};

struct LabeledDataset {
    AnnotationDataset data;
    GroundTruth truth;
};

struct LoadConfig {
    int num_classes = 0;
    /// Fixed external-label order; when absent, integer labels are read as
    /// class indices and other labels get first-seen order.
    std::optional<std::vector<std::string>> class_catalog;
    /// Instance ids of the form "<base>::<task>" carry the task name.
    bool multi_label = false;
};

/// Reads the annotation file plus optional features/predictors files
/// (.csv or .json by extension) into a validated dataset.
AnnotationDataset load_dataset(const std::string& annotations_path,
                               const std::optional<std::string>& features_path,
                               const std::optional<std::string>& predictors_path,
                               const LoadConfig& config);

GroundTruth load_ground_truth(const std::string& path, const AnnotationDataset& dataset);

void save_dataset(const AnnotationDataset& dataset, const std::string& annotations_path,
                  const std::optional<std::string>& features_path = std::nullopt,
                  const std::optional<std::string>& predictors_path = std::nullopt);

void save_ground_truth(const LabeledDataset& labeled, const std::string& path);

/// Keeps at most `max_per_instance` annotations per instance, chosen
/// uniformly without replacement. Deterministic per seed.
AnnotationDataset subsample_redundancy(const AnnotationDataset& dataset,
                                       std::size_t max_per_instance, std::uint64_t seed);
LabeledDataset subsample_redundancy(const LabeledDataset& labeled,
                                    std::size_t max_per_instance, std::uint64_t seed);

/// Disjoint instance-level partition; annotations follow their instances and
/// all predictors are retained on both sides. `fraction` is the train share.
std::pair<AnnotationDataset, AnnotationDataset> train_eval_split(
    const AnnotationDataset& dataset, double fraction, std::uint64_t seed);
std::pair<LabeledDataset, LabeledDataset> train_eval_split(const LabeledDataset& labeled,
                                                           double fraction,
                                                           std::uint64_t seed);

}  // namespace lia
