#include "lia/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lia/errors.hpp"

namespace lia {

using nlohmann::ordered_json;

std::string repr_mode_name(ReprMode mode) {
    return mode == ReprMode::Features ? "features" : "embedding";
}

ReprMode repr_mode_from_name(const std::string& name) {
    if (name == "features") return ReprMode::Features;
    if (name == "embedding") return ReprMode::LearnedEmbedding;
    throw ConfigError("unknown representation mode: " + name);
}

std::size_t ModelConfig::instance_repr_dim(const AnnotationDataset& dataset) const {
    if (instance_mode == ReprMode::LearnedEmbedding)
        return static_cast<std::size_t>(instance_embedding_dim);
    const auto dim = dataset.feature_dim();
    if (!dim)
        throw ConfigError("instance_mode is 'features' but the dataset has no features");
    return *dim;
}

std::size_t ModelConfig::predictor_repr_dim(const AnnotationDataset& dataset) const {
    if (predictor_mode == ReprMode::LearnedEmbedding)
        return static_cast<std::size_t>(predictor_embedding_dim);
    const auto dim = dataset.predictor_repr_dim();
    if (!dim)
        throw ConfigError(
            "predictor_mode is 'features' but the dataset has no predictor representations");
    return *dim;
}

void ModelConfig::finalize(const AnnotationDataset& dataset) {
    if (multi_label && dataset.label_catalog.empty())
        throw ConfigError("multi-label model requires a dataset with a label catalog");
    const std::size_t label_part =
        multi_label ? static_cast<std::size_t>(label_embedding_dim) : 0;
    h_spec.input_dim = instance_repr_dim(dataset) + label_part;
    h_spec.hidden_layers = hidden_layers;
    h_spec.output_dim = static_cast<std::size_t>(num_classes);
    h_spec.activation = activation;
    d_spec.input_dim = h_spec.input_dim;
    d_spec.hidden_layers = hidden_layers;
    d_spec.output_dim = confusion_size();
    d_spec.activation = activation;
    finalized = true;
    validate();
}

void ModelConfig::validate() const {
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (instance_embedding_dim < 1 || predictor_embedding_dim < 1)
        throw ConfigError("embedding dims must be >= 1");
    if (multi_label && label_embedding_dim < 1)
        throw ConfigError("label_embedding_dim must be >= 1");
    if (!finalized) return;
    h_spec.validate();
    d_spec.validate();
    if (h_spec.output_dim != static_cast<std::size_t>(num_classes))
        throw ConfigError("h output dim must equal num_classes");
    if (d_spec.output_dim != confusion_size())
        throw ConfigError("d output dim must equal C*C*L");
}

void Parameters::check_finite() const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw NumericError("non-finite parameter", static_cast<std::ptrdiff_t>(i));
}

namespace {

void init_embedding_table(std::span<double> table, std::size_t dim, Rng& rng) {
    // Same uniform family as the MLP weights; the row norm stays near 1.
    const double bound = std::sqrt(3.0 / static_cast<double>(dim));
    for (double& v : table) v = uniform_real(rng, -bound, bound);
}

void init_linear_map(std::span<double> weights, std::span<double> bias,
                     std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : weights) v = uniform_real(rng, -bound, bound);
    for (double& v : bias) v = 0.0;
}

ParameterLayout make_layout(const ModelConfig& config, std::size_t num_instances,
                            std::size_t num_predictors, std::size_t num_tasks,
                            std::size_t predictor_repr, bool ground_truth_only) {
    if (!config.finalized) throw ConfigError("model config must be finalized first");
    ParameterLayout layout;
    std::size_t offset = 0;
    auto place = [&offset](std::size_t& seg_offset, std::size_t& seg_size, std::size_t size) {
        seg_offset = offset;
        seg_size = size;
        offset += size;
    };
    place(layout.theta_offset, layout.theta_size, config.h_spec.parameter_count());
    if (!ground_truth_only) {
        place(layout.phi_offset, layout.phi_size, config.d_spec.parameter_count());
        place(layout.psi_weight_offset, layout.psi_weight_size,
              config.confusion_size() * predictor_repr);
        place(layout.psi_bias_offset, layout.psi_bias_size, config.confusion_size());
    }
    if (config.instance_mode == ReprMode::LearnedEmbedding) {
        layout.instance_emb_dim = static_cast<std::size_t>(config.instance_embedding_dim);
        std::size_t dummy = 0;
        place(layout.instance_emb_offset, dummy, num_instances * layout.instance_emb_dim);
        layout.instance_emb_rows = num_instances;
    }
    if (!ground_truth_only && config.predictor_mode == ReprMode::LearnedEmbedding) {
        layout.predictor_emb_dim = static_cast<std::size_t>(config.predictor_embedding_dim);
        std::size_t dummy = 0;
        place(layout.predictor_emb_offset, dummy,
              num_predictors * layout.predictor_emb_dim);
        layout.predictor_emb_rows = num_predictors;
    }
    if (config.multi_label) {
        layout.label_emb_dim = static_cast<std::size_t>(config.label_embedding_dim);
        std::size_t dummy = 0;
        place(layout.label_emb_offset, dummy, num_tasks * layout.label_emb_dim);
        layout.label_emb_rows = num_tasks;
    }
    layout.total = offset;
    return layout;
}

Parameters init_from_layout(const ModelConfig& config, ParameterLayout layout,
                            std::uint64_t seed, std::size_t predictor_repr) {
    Parameters params;
    params.layout = layout;
    params.values.assign(layout.total, 0.0);
    Rng rng(seed);
    std::span<double> values(params.values);
    init_mlp_params(config.h_spec, values.subspan(layout.theta_offset, layout.theta_size),
                    rng);
    if (layout.phi_size > 0)
        init_mlp_params(config.d_spec, values.subspan(layout.phi_offset, layout.phi_size),
                        rng);
    if (layout.psi_weight_size > 0)
        init_linear_map(values.subspan(layout.psi_weight_offset, layout.psi_weight_size),
                        values.subspan(layout.psi_bias_offset, layout.psi_bias_size),
                        predictor_repr, config.confusion_size(), rng);
    if (layout.instance_emb_rows > 0)
        init_embedding_table(
            values.subspan(layout.instance_emb_offset,
                           layout.instance_emb_rows * layout.instance_emb_dim),
            layout.instance_emb_dim, rng);
    if (layout.predictor_emb_rows > 0)
        init_embedding_table(
            values.subspan(layout.predictor_emb_offset,
                           layout.predictor_emb_rows * layout.predictor_emb_dim),
            layout.predictor_emb_dim, rng);
    if (layout.label_emb_rows > 0)
        init_embedding_table(values.subspan(layout.label_emb_offset,
                                            layout.label_emb_rows * layout.label_emb_dim),
                             layout.label_emb_dim, rng);
    return params;
}

}  // namespace

Parameters init_parameters(const ModelConfig& config, const AnnotationDataset& dataset,
                           std::uint64_t seed) {
    const std::size_t predictor_repr = config.predictor_repr_dim(dataset) +
                                       (config.multi_label
                                            ? static_cast<std::size_t>(config.label_embedding_dim)
                                            : 0);
    const ParameterLayout layout =
        make_layout(config, dataset.instances.size(), dataset.predictors.size(),
                    dataset.num_tasks(), predictor_repr, /*ground_truth_only=*/false);
    return init_from_layout(config, layout, seed, predictor_repr);
}

Parameters init_ground_truth_parameters(const ModelConfig& config,
                                        const std::vector<Instance>& instances,
                                        std::uint64_t seed) {
    std::size_t num_tasks = 1;
    for (const auto& instance : instances)
        if (instance.task) num_tasks = std::max(num_tasks, *instance.task + 1);
    const ParameterLayout layout = make_layout(config, instances.size(), 0, num_tasks, 0,
                                               /*ground_truth_only=*/true);
    return init_from_layout(config, layout, seed, 0);
}

std::vector<double> instance_input(const Parameters& params, const ModelConfig& config,
                                   const std::vector<Instance>& instances, std::size_t i) {
    const Instance& instance = instances[i];
    std::vector<double> input;
    if (config.instance_mode == ReprMode::Features) {
        if (!instance.features)
            throw ConfigError("instance " + instance.id + " has no features");
        input = *instance.features;
    } else {
        const auto row = params.instance_embedding(i);
        input.assign(row.begin(), row.end());
    }
    if (config.multi_label) {
        if (!instance.task)
            throw ConfigError("multi-label model requires a task for instance " + instance.id);
        const auto label_row = params.label_embedding(*instance.task);
        input.insert(input.end(), label_row.begin(), label_row.end());
    }
    return input;
}

std::vector<double> predictor_input(const Parameters& params, const ModelConfig& config,
                                    const std::vector<Predictor>& predictors, std::size_t j,
                                    std::optional<std::size_t> task) {
    const Predictor& predictor = predictors[j];
    std::vector<double> input;
    if (config.predictor_mode == ReprMode::Features) {
        if (!predictor.representation)
            throw ConfigError("predictor " + predictor.id + " has no representation");
        input = *predictor.representation;
    } else {
        const auto row = params.predictor_embedding(j);
        input.assign(row.begin(), row.end());
    }
    if (config.multi_label) {
        if (!task)
            throw ConfigError("multi-label competence requires a task index");
        const auto label_row = params.label_embedding(*task);
        input.insert(input.end(), label_row.begin(), label_row.end());
    }
    return input;
}

std::vector<double> ground_truth(const Parameters& params, const ModelConfig& config,
                                 const std::vector<Instance>& instances, std::size_t i) {
    const auto input = instance_input(params, config, instances, i);
    return softmax(mlp_forward(config.h_spec, params.theta(), input));
}

DenseTensor difficulty(const Parameters& params, const ModelConfig& config,
                       const std::vector<Instance>& instances, std::size_t i) {
    const auto input = instance_input(params, config, instances, i);
    DenseTensor tensor({static_cast<std::size_t>(config.num_classes),
                        static_cast<std::size_t>(config.num_classes),
                        static_cast<std::size_t>(config.latent_dim)});
    tensor.values = mlp_forward(config.d_spec, params.phi(), input);
    return tensor;
}

DenseTensor competence(const Parameters& params, const ModelConfig& config,
                       const std::vector<Predictor>& predictors, std::size_t j,
                       std::optional<std::size_t> task) {
    const auto input = predictor_input(params, config, predictors, j, task);
    const std::size_t out = config.confusion_size();
    const auto weights = params.psi_weights();
    const auto bias = params.psi_bias();
    if (weights.size() != out * input.size() || bias.size() != out)
        throw ShapeError("competence: psi does not match the predictor representation");
    DenseTensor tensor({static_cast<std::size_t>(config.num_classes),
                        static_cast<std::size_t>(config.num_classes),
                        static_cast<std::size_t>(config.latent_dim)});
    for (std::size_t o = 0; o < out; ++o) {
        double acc = bias[o];
        const double* row = weights.data() + o * input.size();
        for (std::size_t c = 0; c < input.size(); ++c) acc += row[c] * input[c];
        tensor.values[o] = acc;
    }
    return tensor;
}

DenseTensor confusion_logits(const DenseTensor& difficulty_tensor,
                             const DenseTensor& competence_tensor) {
    require_same_shape(difficulty_tensor, competence_tensor, "confusion_logits");
    if (difficulty_tensor.shape.size() != 3)
        throw ShapeError("confusion_logits: expected rank-3 tensors");
    const std::size_t classes = difficulty_tensor.shape[0];
    const std::size_t latent = difficulty_tensor.shape[2];
    DenseTensor logits({classes, classes});
    for (std::size_t k = 0; k < classes; ++k)
        for (std::size_t l = 0; l < classes; ++l) {
            double acc = 0.0;
            for (std::size_t m = 0; m < latent; ++m)
                acc += difficulty_tensor.at(k, l, m) * competence_tensor.at(k, l, m);
            logits.at(k, l) = acc;
        }
    return logits;
}

DenseTensor assemble_confusion(const DenseTensor& difficulty_tensor,
                               const DenseTensor& competence_tensor) {
    DenseTensor matrix = confusion_logits(difficulty_tensor, competence_tensor);
    const std::size_t classes = matrix.shape[0];
    for (std::size_t k = 0; k < classes; ++k) {
        const auto row = softmax({matrix.values.data() + k * classes, classes});
        std::copy(row.begin(), row.end(), matrix.values.begin() + k * classes);
    }
    return matrix;
}

ConfusionTensorBatch build_confusions(const Parameters& params, const ModelConfig& config,
                                      const AnnotationDataset& dataset) {
    ConfusionTensorBatch batch;
    std::map<std::pair<std::size_t, std::size_t>, DenseTensor> competence_cache;
    for (const auto& annotation : dataset.annotations) {
        const auto key = std::make_pair(annotation.instance, annotation.predictor);
        if (batch.entries.count(key)) continue;
        const auto task = dataset.instances[annotation.instance].task;
        const auto cache_key = std::make_pair(annotation.predictor, task.value_or(0));
        auto cached = competence_cache.find(cache_key);
        if (cached == competence_cache.end())
            cached = competence_cache
                         .emplace(cache_key, competence(params, config, dataset.predictors,
                                                        annotation.predictor, task))
                         .first;
        batch.entries.emplace(
            key, assemble_confusion(
                     difficulty(params, config, dataset.instances, annotation.instance),
                     cached->second));
    }
    return batch;
}

namespace {

ordered_json config_to_json(const ModelConfig& config) {
    ordered_json out;
    out["num_classes"] = config.num_classes;
    out["latent_dim"] = config.latent_dim;
    out["instance_mode"] = repr_mode_name(config.instance_mode);
    out["instance_embedding_dim"] = config.instance_embedding_dim;
    out["predictor_mode"] = repr_mode_name(config.predictor_mode);
    out["predictor_embedding_dim"] = config.predictor_embedding_dim;
    out["hidden_layers"] = config.hidden_layers;
    out["activation"] = activation_name(config.activation);
    out["multi_label"] = config.multi_label;
    out["label_embedding_dim"] = config.label_embedding_dim;
    out["h_input_dim"] = config.h_spec.input_dim;
    out["d_input_dim"] = config.d_spec.input_dim;
    return out;
}

ModelConfig config_from_json(const ordered_json& in) {
    ModelConfig config;
    config.num_classes = in.at("num_classes").get<int>();
    config.latent_dim = in.at("latent_dim").get<int>();
    config.instance_mode = repr_mode_from_name(in.at("instance_mode").get<std::string>());
    config.instance_embedding_dim = in.at("instance_embedding_dim").get<int>();
    config.predictor_mode = repr_mode_from_name(in.at("predictor_mode").get<std::string>());
    config.predictor_embedding_dim = in.at("predictor_embedding_dim").get<int>();
    config.hidden_layers = in.at("hidden_layers").get<std::vector<std::size_t>>();
    config.activation = activation_from_name(in.at("activation").get<std::string>());
    config.multi_label = in.at("multi_label").get<bool>();
    config.label_embedding_dim = in.at("label_embedding_dim").get<int>();
    config.h_spec.input_dim = in.at("h_input_dim").get<std::size_t>();
    config.h_spec.hidden_layers = config.hidden_layers;
    config.h_spec.output_dim = static_cast<std::size_t>(config.num_classes);
    config.h_spec.activation = config.activation;
    config.d_spec.input_dim = in.at("d_input_dim").get<std::size_t>();
    config.d_spec.hidden_layers = config.hidden_layers;
    config.d_spec.output_dim = config.confusion_size();
    config.d_spec.activation = config.activation;
    config.finalized = true;
    config.validate();
    return config;
}

ordered_json layout_to_json(const ParameterLayout& layout) {
    ordered_json out;
    out["theta"] = {layout.theta_offset, layout.theta_size};
    out["phi"] = {layout.phi_offset, layout.phi_size};
    out["psi_weights"] = {layout.psi_weight_offset, layout.psi_weight_size};
    out["psi_bias"] = {layout.psi_bias_offset, layout.psi_bias_size};
    out["instance_emb"] = {layout.instance_emb_offset, layout.instance_emb_rows,
                           layout.instance_emb_dim};
    out["predictor_emb"] = {layout.predictor_emb_offset, layout.predictor_emb_rows,
                            layout.predictor_emb_dim};
    out["label_emb"] = {layout.label_emb_offset, layout.label_emb_rows,
                        layout.label_emb_dim};
    out["total"] = layout.total;
    return out;
}

ParameterLayout layout_from_json(const ordered_json& in) {
    ParameterLayout layout;
    auto pair = [&](const char* key, std::size_t& offset, std::size_t& size) {
        offset = in.at(key).at(0).get<std::size_t>();
        size = in.at(key).at(1).get<std::size_t>();
    };
    auto table = [&](const char* key, std::size_t& offset, std::size_t& rows,
                     std::size_t& dim) {
        offset = in.at(key).at(0).get<std::size_t>();
        rows = in.at(key).at(1).get<std::size_t>();
        dim = in.at(key).at(2).get<std::size_t>();
    };
    pair("theta", layout.theta_offset, layout.theta_size);
    pair("phi", layout.phi_offset, layout.phi_size);
    pair("psi_weights", layout.psi_weight_offset, layout.psi_weight_size);
    pair("psi_bias", layout.psi_bias_offset, layout.psi_bias_size);
    table("instance_emb", layout.instance_emb_offset, layout.instance_emb_rows,
          layout.instance_emb_dim);
    table("predictor_emb", layout.predictor_emb_offset, layout.predictor_emb_rows,
          layout.predictor_emb_dim);
    table("label_emb", layout.label_emb_offset, layout.label_emb_rows,
          layout.label_emb_dim);
    layout.total = in.at("total").get<std::size_t>();
    return layout;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    ordered_json out;
    out["format_version"] = 1;
    out["config"] = config_to_json(checkpoint.config);
    out["seed"] = checkpoint.seed;
    out["em_iteration"] = checkpoint.em_iteration;
    out["layout"] = layout_to_json(checkpoint.params.layout);
    out["values"] = checkpoint.params.values;
    std::ofstream file(path);
    if (!file) throw ValidationError("cannot write checkpoint: " + path);
    file << out.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ValidationError("cannot open checkpoint: " + path);
    ordered_json in;
    try {
        file >> in;
    } catch (const std::exception& err) {
        throw ParseError(path + ": " + err.what());
    }
    Checkpoint checkpoint;
    checkpoint.config = config_from_json(in.at("config"));
    checkpoint.seed = in.at("seed").get<std::uint64_t>();
    checkpoint.em_iteration = in.at("em_iteration").get<int>();
    checkpoint.params.layout = layout_from_json(in.at("layout"));
    checkpoint.params.values = in.at("values").get<std::vector<double>>();
    if (checkpoint.params.values.size() != checkpoint.params.layout.total)
        throw ValidationError("checkpoint values do not match layout");
    return checkpoint;
}

}  // namespace lia
