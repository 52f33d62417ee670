#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lia/data.hpp"

namespace lia {

/// Error profile of one simulated predictor: either a diagonal strength per
/// class (off-diagonal mass spread uniformly) or an explicit row-stochastic
/// C x C confusion matrix.
struct PredictorProfile {
    std::optional<std::vector<double>> diagonal;
    std::optional<std::vector<double>> confusion;  // row-major C*C

    /// Resolved row-stochastic matrix, row-major.
    std::vector<double> confusion_matrix(int num_classes) const;
};

struct SyntheticSpec {
    std::size_t num_instances = 0;
    std::size_t num_predictors = 0;
    int num_classes = 2;
    int latent_dim = 1;
    std::size_t feature_dim = 2;
    /// Distance of each class mean from the origin along its own axis.
    double class_separation = 4.0;
    /// One profile shared by everyone, or one per predictor.
    std::vector<PredictorProfile> profiles;
    /// Exactly one missingness mechanism; both absent means every predictor
    /// labels every instance.
    std::optional<std::size_t> redundancy;
    std::optional<double> labeling_probability;
    std::uint64_t seed = 0;

    void validate() const;
    static SyntheticSpec from_json_file(const std::string& path);
};

/// Draws a dataset from the generative process: uniform true labels,
/// Gaussian per-class feature clusters, annotator subsets per instance, and
/// observed labels through each predictor's confusion row.
LabeledDataset sample_dataset(const SyntheticSpec& spec);

/// Appends an always-correct and an always-wrong predictor, each annotating
/// every instance (the wrong one with the cyclic next class).
LabeledDataset add_oracles(const LabeledDataset& labeled);

inline constexpr const char* kOracleCorrectId = "oracle_correct";
inline constexpr const char* kOracleWrongId = "oracle_wrong";

}  // namespace lia
