#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lia/baselines.hpp"
#include "lia/data.hpp"
#include "lia/em.hpp"
#include "lia/model.hpp"

namespace lia {

struct PredictorScore {
    std::string predictor_id;
    double score = 0.0;
    std::size_t annotations = 0;
};

/// Everything recorded about one training/evaluation run. Serializes to
/// JSON and reloads field-for-field; `timestamp`, `wall_seconds` and the
/// per-iteration elapsed times are excluded from equivalence checks.
struct RunReport {
    std::string method;
    std::string dataset_name;
    int redundancy = 0;  // 0 = full dataset
    std::optional<double> accuracy;
    std::vector<EmIterationStats> trace;
    std::optional<FineTuneStats> fine_tune;
    std::vector<PredictorScore> competences;
    std::vector<std::string> excluded_predictors;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::string timestamp;

    nlohmann::ordered_json to_json() const;
    static RunReport from_json(const nlohmann::ordered_json& in);
    void save(const std::string& path) const;
    static RunReport load(const std::string& path);
    /// Equality ignoring wall-clock fields.
    bool equivalent(const RunReport& other) const;
};

/// Mean over instances of 1[argmax(row) == true label]; ties resolve to the
/// lowest class index. Every instance must carry a true label.
double accuracy(int num_classes, std::span<const double> rows, const GroundTruth& truth);
double accuracy(const Posteriors& posteriors, const GroundTruth& truth);
double accuracy(const AggregatedLabels& labels, const GroundTruth& truth);

struct CompetenceReport {
    std::vector<PredictorScore> scores;
    std::vector<std::string> excluded;  // predictors with no annotations
};

/// Per-predictor quality: the posterior-weighted diagonal mass of Q_ij
/// averaged over the predictor's annotated instances.
CompetenceReport estimate_competence_scores(const Parameters& params,
                                            const ModelConfig& config,
                                            const AnnotationDataset& dataset);

struct MethodRun {
    RunReport report;
    std::optional<Checkpoint> checkpoint;
    TrainTrace trace;
    std::optional<Posteriors> posteriors;
};

/// Runs one method (lia | lia-e | lia-ml | maj | maj-star) on an
/// already-subsampled dataset and assembles its report.
MethodRun run_method(const LabeledDataset& labeled, const std::string& method,
                     const ModelConfig& model_config, const EmConfig& em_config,
                     std::uint64_t seed, const std::string& dataset_name,
                     int redundancy_level);

struct SweepMethod {
    std::string name;
    ModelConfig model;
    EmConfig em;
};

struct SweepCell {
    std::string dataset_name;
    std::string method;
    int level = 0;
    int repeats = 0;
    double mean_accuracy = 0.0;
    double std_error = 0.0;
    bool single_repeat = false;
    std::vector<RunReport> runs;
    std::vector<std::string> failures;
};

/// level x method x repeat grid: subsample with seed base_seed + repeat,
/// train with the same seed, evaluate. Failures are recorded per cell.
std::vector<SweepCell> redundancy_sweep(const LabeledDataset& labeled,
                                        const std::vector<int>& levels,
                                        const std::vector<SweepMethod>& methods,
                                        int repeats, std::uint64_t base_seed,
                                        const std::string& dataset_name);

/// CSV with header dataset,method,redundancy,mean_acc,std_err,repeats.
void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

/// CSV of learned predictor embeddings, plus empirical false-positive and
/// false-negative rates when binary ground truth is supplied.
void export_predictor_embeddings(const Parameters& params, const ModelConfig& config,
                                 const AnnotationDataset& dataset,
                                 const GroundTruth* truth, const std::string& path);

}  // namespace lia
