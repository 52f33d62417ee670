#include <CLI11.hpp>

#include "lia/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Train classifiers directly on redundant, imperfect annotations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string spec_path;
    std::string out_dir;
    lia::cli::Overrides overrides;
    std::uint64_t seed = 0;
    std::string method;
    int redundancy = 0;
    std::string out_override;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Override the config seed");
        cmd->add_option("--out", out_override, "Override the output directory");
        cmd->add_option("--method", method, "Override the method");
        cmd->add_option("--redundancy", redundancy, "Override the redundancy cap");
    };

    CLI::App* train = app.add_subcommand("train", "Train one method and write artifacts");
    train->add_option("--config", config_path, "Run config (JSON)")->required();
    add_overrides(train);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Sample a synthetic dataset to CSV files");
    simulate->add_option("--spec", spec_path, "Synthetic spec (JSON)")->required();
    simulate->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Redundancy sweep over methods");
    sweep->add_option("--config", config_path, "Run config (JSON)")->required();
    add_overrides(sweep);

    CLI11_PARSE(app, argc, argv);

    auto collect = [&](CLI::App* cmd) {
        if (cmd->count("--seed")) overrides.seed = seed;
        if (cmd->count("--out")) overrides.output_dir = out_override;
        if (cmd->count("--method")) overrides.method = method;
        if (cmd->count("--redundancy")) overrides.redundancy = redundancy;
    };

    if (train->parsed()) {
        collect(train);
        return lia::cli::cmd_train(config_path, overrides);
    }
    if (simulate->parsed()) {
        return lia::cli::cmd_simulate(spec_path, out_dir);
    }
    collect(sweep);
    return lia::cli::cmd_sweep(config_path, overrides);
}
