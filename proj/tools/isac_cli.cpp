#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isac/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bi-static ISAC coverage beamforming experiments"};
    app.require_subcommand(1, 1);

    isac::RunOptions opt;
    std::uint64_t seed = 0;
    bool print_defaults = false;

    const std::map<std::string, std::string> help{
        {"single", "closed-form single UE / single point beampatterns over a threshold sweep"},
        {"coverage", "SCA coverage design against the communication-only benchmark"},
        {"benchmark", "communication-only power minimization alone"},
        {"cassini", "isotropic SNR map and iso-SNR contours"},
        {"wavesim", "matched-filter Monte Carlo against the analytic sensing SNR"},
        {"oracle", "covariance grid search on a 2-antenna instance"},
    };
    for (const auto& name : isac::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, help.count(name) ? help.at(name) : "");
        sub->add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override scenario.seed");
        sub->add_flag("--full", opt.full, "8x8 arrays and a 50x50 grid instead of the desk-scale defaults");
        sub->add_flag("--print-defaults", print_defaults, "print the resolved default configuration and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : isac::exit_validation;
    }

    opt.subcommand = app.get_subcommands().front()->get_name();
    if (app.get_subcommands().front()->count("--seed"))
        opt.seed = seed;
    if (print_defaults) {
        try {
            std::cout << isac::default_config_document(opt.full).dump(2) << "\n";
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return isac::exit_crash;
        }
        return 0;
    }
    return isac::run_cli(opt);
}
