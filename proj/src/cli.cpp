#include "lia/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <json.hpp>

#include "lia/errors.hpp"
#include "lia/eval.hpp"
#include "lia/synthetic.hpp"

namespace lia::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void emit_error(const std::string& kind, const std::string& message) {
    json record;
    record["error"] = kind;
    record["message"] = message;
    std::cerr << record.dump() << '\n';
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& err) {
        emit_error("config", err.what());
        return kExitConfigError;
    } catch (const ParseError& err) {
        emit_error("parse", err.what());
        return kExitDataError;
    } catch (const ValidationError& err) {
        emit_error("validation", err.what());
        return kExitDataError;
    } catch (const NumericError& err) {
        emit_error("numeric", err.what());
        return kExitNumericError;
    } catch (const std::exception& err) {
        emit_error("internal", err.what());
        return kExitFailure;
    }
}

json parse_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config: " + path);
    json parsed;
    try {
        file >> parsed;
    } catch (const std::exception& err) {
        throw ConfigError(path + ": " + err.what());
    }
    return parsed;
}

ModelConfig model_from_json(const json& in) {
    ModelConfig config;
    if (in.contains("latent_dim")) config.latent_dim = in.at("latent_dim").get<int>();
    if (in.contains("instance_mode"))
        config.instance_mode = repr_mode_from_name(in.at("instance_mode").get<std::string>());
    if (in.contains("instance_embedding_dim"))
        config.instance_embedding_dim = in.at("instance_embedding_dim").get<int>();
    if (in.contains("predictor_mode"))
        config.predictor_mode =
            repr_mode_from_name(in.at("predictor_mode").get<std::string>());
    if (in.contains("predictor_embedding_dim"))
        config.predictor_embedding_dim = in.at("predictor_embedding_dim").get<int>();
    if (in.contains("hidden_layers"))
        config.hidden_layers = in.at("hidden_layers").get<std::vector<std::size_t>>();
    if (in.contains("activation"))
        config.activation = activation_from_name(in.at("activation").get<std::string>());
    if (in.contains("label_embedding_dim"))
        config.label_embedding_dim = in.at("label_embedding_dim").get<int>();
    return config;
}

EmConfig em_from_json(const json& in) {
    EmConfig config;
    if (in.contains("em_iterations")) config.em_iterations = in.at("em_iterations").get<int>();
    if (in.contains("m_step_iterations"))
        config.m_step_iterations = in.at("m_step_iterations").get<int>();
    if (in.contains("batch_size")) config.batch_size = in.at("batch_size").get<int>();
    if (in.contains("learning_rate"))
        config.learning_rate = in.at("learning_rate").get<double>();
    if (in.contains("fine_tune")) config.fine_tune = in.at("fine_tune").get<bool>();
    if (in.contains("fine_tune_iterations"))
        config.fine_tune_iterations = in.at("fine_tune_iterations").get<int>();
    if (in.contains("convergence_tolerance"))
        config.convergence_tolerance = in.at("convergence_tolerance").get<double>();
    return config;
}

const std::vector<std::string> kMethods = {"lia", "lia-e", "lia-ml", "maj", "maj-star"};

void check_method(const std::string& method) {
    if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
        throw ConfigError("unknown method '" + method +
                          "' (expected lia | lia-e | lia-ml | maj | maj-star)");
}

LabeledDataset load_labeled(const RunConfig& config) {
    LabeledDataset labeled;
    labeled.data = load_dataset(config.annotations_path, config.features_path,
                                config.predictors_path, config.load);
    if (config.truth_path)
        labeled.truth = load_ground_truth(*config.truth_path, labeled.data);
    else
        labeled.truth.labels.assign(labeled.data.instances.size(), std::nullopt);
    return labeled;
}

}  // namespace

RunConfig load_run_config(const std::string& path, const Overrides& overrides) {
    const json in = parse_config_file(path);
    RunConfig config;
    if (in.contains("method")) config.method = in.at("method").get<std::string>();
    if (!in.contains("dataset")) throw ConfigError("config needs a 'dataset' section");
    const json& dataset = in.at("dataset");
    if (dataset.contains("name")) config.dataset_name = dataset.at("name").get<std::string>();
    if (!dataset.contains("annotations"))
        throw ConfigError("dataset section needs 'annotations'");
    config.annotations_path = dataset.at("annotations").get<std::string>();
    if (dataset.contains("features") && !dataset.at("features").is_null())
        config.features_path = dataset.at("features").get<std::string>();
    if (dataset.contains("predictors") && !dataset.at("predictors").is_null())
        config.predictors_path = dataset.at("predictors").get<std::string>();
    if (dataset.contains("ground_truth") && !dataset.at("ground_truth").is_null())
        config.truth_path = dataset.at("ground_truth").get<std::string>();
    if (!dataset.contains("num_classes"))
        throw ConfigError("dataset section needs 'num_classes'");
    config.load.num_classes = dataset.at("num_classes").get<int>();
    if (dataset.contains("class_catalog"))
        config.load.class_catalog =
            dataset.at("class_catalog").get<std::vector<std::string>>();

    if (in.contains("model")) config.model = model_from_json(in.at("model"));
    config.model.num_classes = config.load.num_classes;
    if (in.contains("em")) config.em = em_from_json(in.at("em"));
    if (in.contains("seed")) config.seed = in.at("seed").get<std::uint64_t>();
    if (in.contains("redundancy") && !in.at("redundancy").is_null())
        config.redundancy = in.at("redundancy").get<int>();
    if (in.contains("output_dir")) config.output_dir = in.at("output_dir").get<std::string>();
    if (in.contains("sweep")) {
        const json& sweep = in.at("sweep");
        if (sweep.contains("levels"))
            config.sweep_levels = sweep.at("levels").get<std::vector<int>>();
        if (sweep.contains("methods"))
            config.sweep_methods = sweep.at("methods").get<std::vector<std::string>>();
        if (sweep.contains("repeats")) config.sweep_repeats = sweep.at("repeats").get<int>();
    }

    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
    if (overrides.method) config.method = *overrides.method;
    if (overrides.redundancy) config.redundancy = *overrides.redundancy;

    check_method(config.method);
    for (const auto& method : config.sweep_methods) check_method(method);
    config.load.multi_label = config.method == "lia-ml";
    config.model.multi_label = config.method == "lia-ml";
    if (config.redundancy && *config.redundancy < 1)
        throw ConfigError("redundancy must be >= 1");
    config.em.validate();
    config.model.validate();
    if (!fs::exists(config.annotations_path))
        throw ConfigError("annotations file does not exist: " + config.annotations_path);
    for (const auto& path : {config.features_path, config.predictors_path, config.truth_path})
        if (path && !fs::exists(*path))
            throw ConfigError("configured file does not exist: " + *path);
    return config;
}

int cmd_train(const std::string& config_path, const Overrides& overrides) {
    return guarded([&]() {
        const RunConfig config = load_run_config(config_path, overrides);
        LabeledDataset labeled = load_labeled(config);
        if (config.redundancy)
            labeled = subsample_redundancy(
                labeled, static_cast<std::size_t>(*config.redundancy), config.seed);

        const MethodRun run =
            run_method(labeled, config.method, config.model, config.em, config.seed,
                       config.dataset_name, config.redundancy.value_or(0));

        fs::create_directories(config.output_dir);
        run.report.save(config.output_dir + "/report.json");
        if (config.method != "maj") {
            run.trace.write_csv(config.output_dir + "/trace.csv");
            if (run.checkpoint)
                save_checkpoint(*run.checkpoint, config.output_dir + "/checkpoint.json");
        }
        std::cout << "report: " << config.output_dir << "/report.json";
        if (run.report.accuracy) std::cout << "  accuracy: " << *run.report.accuracy;
        std::cout << '\n';
        return kExitSuccess;
    });
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir) {
    return guarded([&]() {
        const SyntheticSpec spec = SyntheticSpec::from_json_file(spec_path);
        const LabeledDataset labeled = sample_dataset(spec);
        fs::create_directories(out_dir);
        save_dataset(labeled.data, out_dir + "/annotations.csv",
                     out_dir + "/features.csv");
        save_ground_truth(labeled, out_dir + "/truth.csv");
        std::cout << "wrote " << labeled.data.annotations.size() << " annotations for "
                  << labeled.data.instances.size() << " instances to " << out_dir << '\n';
        return kExitSuccess;
    });
}

int cmd_sweep(const std::string& config_path, const Overrides& overrides) {
    return guarded([&]() {
        const RunConfig config = load_run_config(config_path, overrides);
        if (config.sweep_levels.empty())
            throw ConfigError("sweep requires 'sweep.levels' in the config");
        const std::vector<std::string> names =
            config.sweep_methods.empty() ? std::vector<std::string>{config.method}
                                         : config.sweep_methods;
        const LabeledDataset labeled = load_labeled(config);

        std::vector<SweepMethod> methods;
        for (const auto& name : names) {
            ModelConfig model = config.model;
            model.multi_label = name == "lia-ml";
            methods.push_back(SweepMethod{name, model, config.em});
        }
        const auto cells =
            redundancy_sweep(labeled, config.sweep_levels, methods, config.sweep_repeats,
                             config.seed, config.dataset_name);

        fs::create_directories(config.output_dir + "/cells");
        bool any_failure = false;
        for (const auto& cell : cells) {
            for (const auto& report : cell.runs) {
                const std::string name = config.output_dir + "/cells/" + cell.method +
                                         "_r" + std::to_string(cell.level) + "_s" +
                                         std::to_string(report.seed) + ".json";
                report.save(name);
            }
            for (const auto& failure : cell.failures) {
                any_failure = true;
                std::cerr << cell.method << " r" << cell.level << ": " << failure << '\n';
            }
        }
        write_sweep_csv(cells, config.output_dir + "/sweep.csv");
        std::cout << "wrote " << cells.size() << " cells to " << config.output_dir
                  << "/sweep.csv\n";
        return any_failure ? kExitFailure : kExitSuccess;
    });
}

}  // namespace lia::cli
