// dtnwave experiment runner. One experiment per invocation, configured by a
// JSON document; flags override file values. Exit status: 0 all asserted
// invariants held, 1 an assertion failed, 2 invalid config or output error.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtnwave/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dtnwave: spectral verification lab for the dynamic-boundary problem"};
    std::string config_path, experiment, output_dir;
    std::int64_t seed = -1;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--experiment", experiment,
                   "experiment name (transforms|dispersion|evolve|energy|lemmas|continuity|density)");
    app.add_option("--output", output_dir, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_flag("--quiet", quiet, "suppress verdict lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    dtnwave::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot read config file: " + config_path);
            nlohmann::json j;
            in >> j;
            cfg = dtnwave::config_from_json(j);
        }
        if (!experiment.empty()) cfg.experiment = experiment;
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (cfg.experiment.empty())
            throw std::invalid_argument("no experiment selected (use --experiment or a config)");

        const dtnwave::RunResult res = dtnwave::run_experiment(cfg);
        if (!quiet) {
            std::cout << cfg.experiment << ": " << (res.status == 0 ? "PASS" : "FAIL") << '\n';
            if (res.summary.contains("failures"))
                for (const auto& f : res.summary["failures"])
                    std::cout << "  " << f.get<std::string>() << '\n';
        }
        return res.status;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
