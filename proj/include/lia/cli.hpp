#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lia/data.hpp"
#include "lia/em.hpp"
#include "lia/model.hpp"

namespace lia::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;  // partial failures (e.g. sweep cells)
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitNumericError = 4;

/// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::string> method;
    std::optional<int> redundancy;
};

/// One run, fully described: the config file is the single source of truth.
struct RunConfig {
    std::string method = "lia";
    std::string dataset_name = "dataset";
    std::string annotations_path;
    std::optional<std::string> features_path;
    std::optional<std::string> predictors_path;
    std::optional<std::string> truth_path;
    LoadConfig load;
    ModelConfig model;
    EmConfig em;
    std::uint64_t seed = 0;
    std::optional<int> redundancy;
    std::string output_dir = "out";
    std::vector<int> sweep_levels;
    std::vector<std::string> sweep_methods;
    int sweep_repeats = 1;
};

RunConfig load_run_config(const std::string& path, const Overrides& overrides);

/// Trains one method and writes report.json (always), plus trace.csv and
/// checkpoint.json for the methods that learn parameters.
int cmd_train(const std::string& config_path, const Overrides& overrides);

/// Samples a synthetic dataset and writes annotations/features/truth files.
int cmd_simulate(const std::string& spec_path, const std::string& out_dir);

/// Redundancy sweep: per-cell run reports plus an aggregate sweep.csv.
int cmd_sweep(const std::string& config_path, const Overrides& overrides);

}  // namespace lia::cli
