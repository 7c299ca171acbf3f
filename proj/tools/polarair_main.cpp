#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polarair/errors.hpp"
#include "polarair/fl.hpp"
#include "polarair/metrics.hpp"

int main(int argc, char** argv) {
    CLI::App app{"PolarAir over-the-air federated learning simulator"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run one experiment");
    std::string config_path;
    std::string out_dir;
    std::string mode_flag, seed_flag, noise_flag, epochs_flag;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory for the CSV files")->required();
    run->add_option("--mode", mode_flag, "override: polarair|dense");
    run->add_option("--seed", seed_flag, "override: run seed");
    run->add_option("--noise-std", noise_flag, "override: channel noise std");
    run->add_option("--epochs", epochs_flag, "override: number of epochs");

    CLI11_PARSE(app, argc, argv);

    try {
        polarair::ExperimentConfig cfg = polarair::load_config(config_path);
        if (!mode_flag.empty()) polarair::apply_config_entry(cfg, "mode", mode_flag);
        if (!seed_flag.empty()) polarair::apply_config_entry(cfg, "seed", seed_flag);
        if (!noise_flag.empty())
            polarair::apply_config_entry(cfg, "noise_std", noise_flag);
        if (!epochs_flag.empty())
            polarair::apply_config_entry(cfg, "epochs", epochs_flag);
        cfg.validate();

        std::filesystem::create_directories(out_dir);
        const polarair::ExperimentResult result = polarair::run_experiment(cfg);
        const std::string rounds = (std::filesystem::path(out_dir) / "rounds.csv").string();
        const std::string epochs = (std::filesystem::path(out_dir) / "epochs.csv").string();
        polarair::emit_records(result, rounds, epochs);

        std::size_t uses = result.rounds.empty() ? 0 : result.rounds.back().channel_uses_cum;
        double acc = result.epochs.empty() ? 0.0 : result.epochs.back().test_accuracy;
        std::printf("mode=%s epochs=%zu rounds=%zu channel_uses=%zu final_test_accuracy=%.6g\n",
                    polarair::to_string(result.mode).c_str(), result.epochs.size(),
                    result.rounds.size(), uses, acc);
        std::printf("wrote %s and %s\n", rounds.c_str(), epochs.c_str());
    } catch (const polarair::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
