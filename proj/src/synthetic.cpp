#include "lia/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>

#include <json.hpp>

#include "lia/errors.hpp"
#include "lia/rng.hpp"

namespace lia {

using nlohmann::json;

std::vector<double> PredictorProfile::confusion_matrix(int num_classes) const {
    if (diagonal.has_value() == confusion.has_value())
        throw ConfigError("predictor profile needs exactly one of diagonal/confusion");
    const std::size_t c = static_cast<std::size_t>(num_classes);
    std::vector<double> matrix(c * c, 0.0);
    if (diagonal) {
        if (diagonal->size() != c)
            throw ConfigError("diagonal profile must list one strength per class");
        for (std::size_t k = 0; k < c; ++k) {
            const double d = (*diagonal)[k];
            if (!(d >= 0.0 && d <= 1.0))
                throw ConfigError("diagonal strengths must lie in [0, 1]");
            const double off = c > 1 ? (1.0 - d) / static_cast<double>(c - 1) : 0.0;
            for (std::size_t l = 0; l < c; ++l) matrix[k * c + l] = (k == l) ? d : off;
        }
        return matrix;
    }
    if (confusion->size() != c * c)
        throw ConfigError("explicit confusion must have C*C entries");
    matrix = *confusion;
    for (std::size_t k = 0; k < c; ++k) {
        double total = 0.0;
        for (std::size_t l = 0; l < c; ++l) {
            if (!(matrix[k * c + l] >= 0.0))
                throw ConfigError("confusion entries must be >= 0");
            total += matrix[k * c + l];
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ConfigError("confusion rows must sum to 1");
    }
    return matrix;
}

void SyntheticSpec::validate() const {
    std::vector<std::string> problems;
    if (num_instances < 1) problems.push_back("num_instances must be >= 1");
    if (num_predictors < 1) problems.push_back("num_predictors must be >= 1");
    if (num_classes < 2) problems.push_back("num_classes must be >= 2");
    if (latent_dim < 1) problems.push_back("latent_dim must be >= 1");
    if (feature_dim < 1) problems.push_back("feature_dim must be >= 1");
    if (!(class_separation >= 0.0)) problems.push_back("class_separation must be >= 0");
    if (profiles.empty())
        problems.push_back("at least one predictor profile is required");
    else if (profiles.size() != 1 && profiles.size() != num_predictors)
        problems.push_back("profiles must have length 1 or num_predictors");
    if (redundancy && labeling_probability)
        problems.push_back("set only one of redundancy/labeling_probability");
    if (redundancy && (*redundancy < 1 || *redundancy > num_predictors))
        problems.push_back("redundancy must lie in [1, num_predictors]");
    if (labeling_probability &&
        !(*labeling_probability >= 0.0 && *labeling_probability <= 1.0))
        problems.push_back("labeling_probability must lie in [0, 1]");
    if (!problems.empty()) {
        std::string message = "invalid synthetic spec:";
        for (const auto& p : problems) message += "\n  - " + p;
        throw ConfigError(message);
    }
    for (const auto& profile : profiles) profile.confusion_matrix(num_classes);
}

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ValidationError("cannot open synthetic spec: " + path);
    json in;
    try {
        file >> in;
    } catch (const std::exception& err) {
        throw ParseError(path + ": " + err.what());
    }
    SyntheticSpec spec;
    spec.num_instances = in.at("num_instances").get<std::size_t>();
    spec.num_predictors = in.at("num_predictors").get<std::size_t>();
    spec.num_classes = in.at("num_classes").get<int>();
    if (in.contains("latent_dim")) spec.latent_dim = in.at("latent_dim").get<int>();
    if (in.contains("feature_dim")) spec.feature_dim = in.at("feature_dim").get<std::size_t>();
    if (in.contains("class_separation"))
        spec.class_separation = in.at("class_separation").get<double>();
    if (in.contains("redundancy")) spec.redundancy = in.at("redundancy").get<std::size_t>();
    if (in.contains("labeling_probability"))
        spec.labeling_probability = in.at("labeling_probability").get<double>();
    if (in.contains("seed")) spec.seed = in.at("seed").get<std::uint64_t>();
    if (!in.contains("profiles") || !in.at("profiles").is_array())
        throw ConfigError("synthetic spec needs a 'profiles' array");
    for (const json& entry : in.at("profiles")) {
        PredictorProfile profile;
        if (entry.contains("diagonal"))
            profile.diagonal = entry.at("diagonal").get<std::vector<double>>();
        if (entry.contains("confusion"))
            profile.confusion = entry.at("confusion").get<std::vector<double>>();
        spec.profiles.push_back(std::move(profile));
    }
    spec.validate();
    return spec;
}

namespace {

int sample_categorical(std::span<const double> probabilities, Rng& rng) {
    const double draw = uniform01(rng);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        cumulative += probabilities[k];
        if (draw < cumulative) return static_cast<int>(k);
    }
    return static_cast<int>(probabilities.size()) - 1;
}

std::string padded_id(const char* prefix, std::size_t index, std::size_t count) {
    std::size_t width = 1;
    for (std::size_t w = count; w > 10; w /= 10) ++width;
    std::string digits = std::to_string(index);
    while (digits.size() < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

}  // namespace

LabeledDataset sample_dataset(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t c = static_cast<std::size_t>(spec.num_classes);

    std::vector<std::vector<double>> confusions(spec.num_predictors);
    for (std::size_t j = 0; j < spec.num_predictors; ++j)
        confusions[j] = spec.profiles[spec.profiles.size() == 1 ? 0 : j].confusion_matrix(
            spec.num_classes);

    // Class means: separation along each class's own axis when the feature
    // space is wide enough, otherwise random unit directions.
    std::vector<std::vector<double>> means(c, std::vector<double>(spec.feature_dim, 0.0));
    if (spec.feature_dim >= c) {
        for (std::size_t k = 0; k < c; ++k) means[k][k] = spec.class_separation;
    } else {
        for (std::size_t k = 0; k < c; ++k) {
            double norm = 0.0;
            for (double& v : means[k]) {
                v = normal(rng);
                norm += v * v;
            }
            norm = std::sqrt(std::max(norm, 1e-12));
            for (double& v : means[k]) v *= spec.class_separation / norm;
        }
    }

    LabeledDataset labeled;
    AnnotationDataset& dataset = labeled.data;
    dataset.num_classes = spec.num_classes;
    for (std::size_t k = 0; k < c; ++k) dataset.class_catalog.push_back(std::to_string(k));

    for (std::size_t j = 0; j < spec.num_predictors; ++j)
        dataset.predictors.push_back(
            Predictor{padded_id("p", j, spec.num_predictors), std::nullopt});

    std::vector<std::size_t> pool(spec.num_predictors);
    for (std::size_t i = 0; i < spec.num_instances; ++i) {
        const int label = static_cast<int>(uniform_index(rng, c));
        Instance instance;
        instance.id = padded_id("i", i, spec.num_instances);
        std::vector<double> features(spec.feature_dim);
        for (std::size_t d = 0; d < spec.feature_dim; ++d)
            features[d] = means[label][d] + normal(rng);
        instance.features = std::move(features);
        dataset.instances.push_back(std::move(instance));
        labeled.truth.labels.push_back(label);

        // Which predictors annotate this instance.
        std::vector<std::size_t> chosen;
        if (spec.redundancy) {
            for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = j;
            for (std::size_t k = 0; k < *spec.redundancy; ++k) {
                const std::size_t pick =
                    k + static_cast<std::size_t>(uniform_index(rng, pool.size() - k));
                std::swap(pool[k], pool[pick]);
                chosen.push_back(pool[k]);
            }
            std::sort(chosen.begin(), chosen.end());
        } else if (spec.labeling_probability) {
            for (std::size_t j = 0; j < spec.num_predictors; ++j)
                if (uniform01(rng) < *spec.labeling_probability) chosen.push_back(j);
        } else {
            for (std::size_t j = 0; j < spec.num_predictors; ++j) chosen.push_back(j);
        }

        for (std::size_t j : chosen) {
            const double* row = confusions[j].data() + static_cast<std::size_t>(label) * c;
            Annotation annotation;
            annotation.instance = i;
            annotation.predictor = j;
            annotation.label = sample_categorical({row, c}, rng);
            dataset.annotations.push_back(std::move(annotation));
        }
    }

    dataset.rebuild_index();
    dataset.validate();
    return labeled;
}

LabeledDataset add_oracles(const LabeledDataset& labeled) {
    for (std::size_t i = 0; i < labeled.data.instances.size(); ++i)
        if (!labeled.truth.labels[i])
            throw ValidationError("add_oracles requires a true label for every instance");
    if (labeled.data.predictor_repr_dim())
        throw ValidationError(
            "add_oracles requires embedding-mode predictors (no representations)");

    LabeledDataset result = labeled;
    AnnotationDataset& dataset = result.data;
    const std::size_t correct = dataset.predictors.size();
    const std::size_t wrong = correct + 1;
    dataset.predictors.push_back(Predictor{kOracleCorrectId, std::nullopt});
    dataset.predictors.push_back(Predictor{kOracleWrongId, std::nullopt});
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const int truth = *result.truth.labels[i];
        dataset.annotations.push_back(Annotation{i, correct, truth, std::nullopt});
        dataset.annotations.push_back(
            Annotation{i, wrong, (truth + 1) % dataset.num_classes, std::nullopt});
    }
    dataset.rebuild_index();
    dataset.validate();
    return result;
}

}  // namespace lia
