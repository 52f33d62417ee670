#include "lia/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "lia/errors.hpp"

namespace lia {

using nlohmann::ordered_json;

namespace {

std::string now_iso8601() {
    const std::time_t now = std::time(nullptr);
    char buffer[32];
    std::tm parts{};
    gmtime_r(&now, &parts);
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
    return buffer;
}

ordered_json stats_to_json(const EmIterationStats& stats) {
    return ordered_json{{"iteration", stats.iteration},
                        {"objective_before", stats.objective_before},
                        {"objective_after", stats.objective_after},
                        {"marginal_before", stats.marginal_before},
                        {"marginal_after", stats.marginal_after},
                        {"max_param_delta", stats.max_param_delta},
                        {"elapsed_seconds", stats.elapsed_seconds}};
}

EmIterationStats stats_from_json(const ordered_json& in) {
    EmIterationStats stats;
    stats.iteration = in.at("iteration").get<int>();
    stats.objective_before = in.at("objective_before").get<double>();
    stats.objective_after = in.at("objective_after").get<double>();
    stats.marginal_before = in.at("marginal_before").get<double>();
    stats.marginal_after = in.at("marginal_after").get<double>();
    stats.max_param_delta = in.at("max_param_delta").get<double>();
    stats.elapsed_seconds = in.at("elapsed_seconds").get<double>();
    return stats;
}

void strip_clock_fields(ordered_json& node) {
    if (node.is_object()) {
        node.erase("timestamp");
        node.erase("wall_seconds");
        node.erase("elapsed_seconds");
        for (auto& [key, value] : node.items()) strip_clock_fields(value);
    } else if (node.is_array()) {
        for (auto& value : node) strip_clock_fields(value);
    }
}

std::size_t argmax_lowest(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k] > row[best]) best = k;
    return best;
}

}  // namespace

ordered_json RunReport::to_json() const {
    ordered_json out;
    out["method"] = method;
    out["dataset"] = dataset_name;
    out["redundancy"] = redundancy;
    out["seed"] = seed;
    out["accuracy"] = accuracy ? ordered_json(*accuracy) : ordered_json(nullptr);
    ordered_json trace_json = ordered_json::array();
    for (const auto& stats : trace) trace_json.push_back(stats_to_json(stats));
    out["trace"] = std::move(trace_json);
    if (fine_tune) {
        out["fine_tune"] = ordered_json{{"marginal_before", fine_tune->marginal_before},
                                        {"marginal_after", fine_tune->marginal_after},
                                        {"max_param_delta", fine_tune->max_param_delta},
                                        {"iterations", fine_tune->iterations},
                                        {"elapsed_seconds", fine_tune->elapsed_seconds}};
    } else {
        out["fine_tune"] = nullptr;
    }
    ordered_json comp = ordered_json::array();
    for (const auto& score : competences)
        comp.push_back(ordered_json{{"predictor_id", score.predictor_id},
                                    {"score", score.score},
                                    {"annotations", score.annotations}});
    out["competences"] = std::move(comp);
    out["excluded_predictors"] = excluded_predictors;
    out["wall_seconds"] = wall_seconds;
    out["timestamp"] = timestamp;
    return out;
}

RunReport RunReport::from_json(const ordered_json& in) {
    RunReport report;
    report.method = in.at("method").get<std::string>();
    report.dataset_name = in.at("dataset").get<std::string>();
    report.redundancy = in.at("redundancy").get<int>();
    report.seed = in.at("seed").get<std::uint64_t>();
    if (!in.at("accuracy").is_null()) report.accuracy = in.at("accuracy").get<double>();
    for (const auto& stats : in.at("trace")) report.trace.push_back(stats_from_json(stats));
    if (!in.at("fine_tune").is_null()) {
        const auto& ft = in.at("fine_tune");
        FineTuneStats stats;
        stats.marginal_before = ft.at("marginal_before").get<double>();
        stats.marginal_after = ft.at("marginal_after").get<double>();
        stats.max_param_delta = ft.at("max_param_delta").get<double>();
        stats.iterations = ft.at("iterations").get<int>();
        stats.elapsed_seconds = ft.at("elapsed_seconds").get<double>();
        report.fine_tune = stats;
    }
    for (const auto& entry : in.at("competences"))
        report.competences.push_back(PredictorScore{
            entry.at("predictor_id").get<std::string>(), entry.at("score").get<double>(),
            entry.at("annotations").get<std::size_t>()});
    report.excluded_predictors =
        in.at("excluded_predictors").get<std::vector<std::string>>();
    report.wall_seconds = in.at("wall_seconds").get<double>();
    report.timestamp = in.at("timestamp").get<std::string>();
    return report;
}

void RunReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report: " + path);
    out << to_json().dump(2) << '\n';
}

RunReport RunReport::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report: " + path);
    ordered_json parsed;
    try {
        in >> parsed;
    } catch (const std::exception& err) {
        throw ParseError(path + ": " + err.what());
    }
    return from_json(parsed);
}

bool RunReport::equivalent(const RunReport& other) const {
    ordered_json a = to_json();
    ordered_json b = other.to_json();
    strip_clock_fields(a);
    strip_clock_fields(b);
    return a == b;
}

double accuracy(int num_classes, std::span<const double> rows, const GroundTruth& truth) {
    if (num_classes < 2) throw ValidationError("accuracy: num_classes must be >= 2");
    const std::size_t n = rows.size() / num_classes;
    if (rows.size() != n * static_cast<std::size_t>(num_classes) ||
        truth.labels.size() != n)
        throw ShapeError("accuracy: predictions and truth have different sizes");
    if (n == 0) throw ValidationError("accuracy: no instances to evaluate");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!truth.labels[i])
            throw ValidationError("accuracy: instance " + std::to_string(i) +
                                  " has no true label");
        const auto row = rows.subspan(i * num_classes, num_classes);
        if (static_cast<int>(argmax_lowest(row)) == *truth.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

double accuracy(const Posteriors& posteriors, const GroundTruth& truth) {
    return accuracy(posteriors.num_classes, posteriors.values, truth);
}

double accuracy(const AggregatedLabels& labels, const GroundTruth& truth) {
    return accuracy(labels.num_classes, labels.values, truth);
}

CompetenceReport estimate_competence_scores(const Parameters& params,
                                            const ModelConfig& config,
                                            const AnnotationDataset& dataset) {
    const Posteriors posteriors = e_step(params, config, dataset);
    const ConfusionTensorBatch batch = build_confusions(params, config, dataset);
    std::vector<double> totals(dataset.predictors.size(), 0.0);
    std::vector<std::size_t> counts(dataset.predictors.size(), 0);
    for (const auto& annotation : dataset.annotations) {
        const DenseTensor& q =
            batch.entries.at({annotation.instance, annotation.predictor});
        const auto w = posteriors.row(annotation.instance);
        double diagonal_mass = 0.0;
        for (int k = 0; k < config.num_classes; ++k) diagonal_mass += w[k] * q.at(k, k);
        totals[annotation.predictor] += diagonal_mass;
        counts[annotation.predictor] += 1;
    }
    CompetenceReport report;
    for (std::size_t j = 0; j < dataset.predictors.size(); ++j) {
        if (counts[j] == 0) {
            report.excluded.push_back(dataset.predictors[j].id);
            continue;
        }
        report.scores.push_back(PredictorScore{dataset.predictors[j].id,
                                               totals[j] / static_cast<double>(counts[j]),
                                               counts[j]});
    }
    return report;
}

namespace {

bool truth_is_complete(const GroundTruth& truth) {
    return !truth.labels.empty() &&
           std::all_of(truth.labels.begin(), truth.labels.end(),
                       [](const std::optional<int>& label) { return label.has_value(); });
}

bool truth_is_empty(const GroundTruth& truth) {
    return std::none_of(truth.labels.begin(), truth.labels.end(),
                        [](const std::optional<int>& label) { return label.has_value(); });
}

}  // namespace

MethodRun run_method(const LabeledDataset& labeled, const std::string& method,
                     const ModelConfig& model_config, const EmConfig& em_config,
                     std::uint64_t seed, const std::string& dataset_name,
                     int redundancy_level) {
    const auto start = std::chrono::steady_clock::now();
    const AnnotationDataset& dataset = labeled.data;

    MethodRun run;
    run.report.method = method;
    run.report.dataset_name = dataset_name;
    run.report.redundancy = redundancy_level;
    run.report.seed = seed;
    run.report.timestamp = now_iso8601();

    const bool have_truth = truth_is_complete(labeled.truth);
    // Partial truth is an error surfaced by accuracy(); absent truth just
    // skips the metric.
    const bool evaluate =
        have_truth || (!truth_is_empty(labeled.truth) && !labeled.truth.labels.empty());

    ModelConfig config = model_config;
    EmConfig em = em_config;
    em.seed = seed;

    if (method == "maj") {
        const AggregatedLabels labels = majority_vote(dataset);
        if (evaluate) run.report.accuracy = accuracy(labels, labeled.truth);
    } else if (method == "maj-star") {
        const AggregatedLabels labels = majority_vote(dataset);
        if (!config.finalized) config.finalize(dataset);
        Parameters params =
            two_stage_train(dataset.instances, labels, config, em);
        AggregatedLabels predicted;
        predicted.num_classes = config.num_classes;
        predicted.method = method;
        predicted.values.reserve(dataset.instances.size() * config.num_classes);
        for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
            const auto row = ground_truth(params, config, dataset.instances, i);
            predicted.values.insert(predicted.values.end(), row.begin(), row.end());
        }
        if (evaluate) run.report.accuracy = accuracy(predicted, labeled.truth);
        run.checkpoint = Checkpoint{config, std::move(params), seed, 0};
    } else if (method == "lia" || method == "lia-e" || method == "lia-ml") {
        if (method == "lia-e") config.instance_mode = ReprMode::LearnedEmbedding;
        if (method == "lia-ml") config.multi_label = true;
        if (!config.finalized) config.finalize(dataset);
        EmResult result = run_em(dataset, config, em);
        run.trace = result.trace;
        Parameters params = std::move(result.params);
        Posteriors posteriors = std::move(result.posteriors);
        if (em.fine_tune && em.fine_tune_iterations > 0) {
            params = fine_tune(params, result.config, dataset, em, &run.trace);
            posteriors = e_step(params, result.config, dataset);
        }
        if (evaluate) run.report.accuracy = accuracy(posteriors, labeled.truth);
        const CompetenceReport competences =
            estimate_competence_scores(params, result.config, dataset);
        run.report.competences = competences.scores;
        run.report.excluded_predictors = competences.excluded;
        run.report.trace = run.trace.iterations;
        run.report.fine_tune = run.trace.fine_tune;
        run.checkpoint = Checkpoint{result.config, std::move(params), seed,
                                    static_cast<int>(run.trace.iterations.size())};
        run.posteriors = std::move(posteriors);
    } else {
        throw ConfigError("unknown method: " + method);
    }

    run.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

std::vector<SweepCell> redundancy_sweep(const LabeledDataset& labeled,
                                        const std::vector<int>& levels,
                                        const std::vector<SweepMethod>& methods,
                                        int repeats, std::uint64_t base_seed,
                                        const std::string& dataset_name) {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    for (int level : levels)
        if (level < 1) throw ConfigError("redundancy levels must be >= 1");

    std::vector<SweepCell> cells;
    for (int level : levels) {
        for (const auto& method : methods) {
            SweepCell cell;
            cell.dataset_name = dataset_name;
            cell.method = method.name;
            cell.level = level;
            cell.repeats = repeats;
            cell.single_repeat = repeats == 1;
            std::vector<double> accuracies;
            for (int r = 0; r < repeats; ++r) {
                const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
                try {
                    const LabeledDataset subsampled = subsample_redundancy(
                        labeled, static_cast<std::size_t>(level), seed);
                    MethodRun run = run_method(subsampled, method.name, method.model,
                                               method.em, seed, dataset_name, level);
                    if (run.report.accuracy) accuracies.push_back(*run.report.accuracy);
                    cell.runs.push_back(std::move(run.report));
                } catch (const Error& err) {
                    cell.failures.push_back("repeat " + std::to_string(r) + ": " +
                                            err.what());
                }
            }
            if (!accuracies.empty()) {
                double mean = 0.0;
                for (double a : accuracies) mean += a;
                mean /= static_cast<double>(accuracies.size());
                double variance = 0.0;
                for (double a : accuracies) variance += (a - mean) * (a - mean);
                cell.mean_accuracy = mean;
                cell.std_error =
                    accuracies.size() > 1
                        ? std::sqrt(variance / static_cast<double>(accuracies.size() - 1)) /
                              std::sqrt(static_cast<double>(accuracies.size()))
                        : 0.0;
            } else {
                cell.mean_accuracy = std::nan("");
                cell.std_error = std::nan("");
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write sweep table: " + path);
    out << "dataset,method,redundancy,mean_acc,std_err,repeats\n";
    char line[256];
    for (const auto& cell : cells) {
        std::snprintf(line, sizeof line, "%s,%s,%d,%.17g,%.17g,%d\n",
                      cell.dataset_name.c_str(), cell.method.c_str(), cell.level,
                      cell.mean_accuracy, cell.std_error, cell.repeats);
        out << line;
    }
}

void export_predictor_embeddings(const Parameters& params, const ModelConfig& config,
                                 const AnnotationDataset& dataset,
                                 const GroundTruth* truth, const std::string& path) {
    if (config.predictor_mode != ReprMode::LearnedEmbedding)
        throw ConfigError("embedding export requires predictor_mode = embedding");
    const std::size_t dim = params.layout.predictor_emb_dim;
    if (params.layout.predictor_emb_rows != dataset.predictors.size())
        throw ShapeError("embedding table does not match the predictor list");

    const bool rates = truth != nullptr && config.num_classes == 2;
    std::vector<std::size_t> false_pos(dataset.predictors.size(), 0);
    std::vector<std::size_t> negatives(dataset.predictors.size(), 0);
    std::vector<std::size_t> false_neg(dataset.predictors.size(), 0);
    std::vector<std::size_t> positives(dataset.predictors.size(), 0);
    if (rates) {
        for (const auto& annotation : dataset.annotations) {
            const auto& label = truth->labels[annotation.instance];
            if (!label) continue;
            if (*label == 0) {  // class 1 is "positive"
                negatives[annotation.predictor] += 1;
                if (annotation.label == 1) false_pos[annotation.predictor] += 1;
            } else {
                positives[annotation.predictor] += 1;
                if (annotation.label == 0) false_neg[annotation.predictor] += 1;
            }
        }
    }

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write embeddings: " + path);
    std::string header = "predictor_id";
    for (std::size_t c = 0; c < dim; ++c) header += ",e_" + std::to_string(c);
    if (rates) header += ",fp_rate,fn_rate";
    out << header << '\n';
    char buffer[64];
    for (std::size_t j = 0; j < dataset.predictors.size(); ++j) {
        std::string line = dataset.predictors[j].id;
        for (double v : params.predictor_embedding(j)) {
            std::snprintf(buffer, sizeof buffer, ",%.17g", v);
            line += buffer;
        }
        if (rates) {
            if (negatives[j] > 0) {
                std::snprintf(buffer, sizeof buffer, ",%.17g",
                              static_cast<double>(false_pos[j]) /
                                  static_cast<double>(negatives[j]));
                line += buffer;
            } else {
                line += ",";
            }
            if (positives[j] > 0) {
                std::snprintf(buffer, sizeof buffer, ",%.17g",
                              static_cast<double>(false_neg[j]) /
                                  static_cast<double>(positives[j]));
                line += buffer;
            } else {
                line += ",";
            }
        }
        out << line << '\n';
    }
}

}  // namespace lia
