#include "birkhoff/runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Order-structure diagnostics for competitive flows"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> depth;
    std::optional<double> theta;
    for (const auto& name : birkhoff::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "artifact directory")->required();
        sub->add_option("--seed", seed, "64-bit run seed");
        sub->add_option("--depth", depth, "final subdivision depth")->check(CLI::Range(1, 20));
        sub->add_option("--theta", theta, "recurrence radius")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? birkhoff::kExitPass : birkhoff::kExitConfig;
    }

    birkhoff::RunConfig cfg;
    try {
        cfg = birkhoff::load_config(config_path);
    } catch (const birkhoff::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return birkhoff::kExitConfig;
    }
    if (seed) cfg.run.seed = *seed;
    if (theta) cfg.pipeline.theta = *theta;
    if (depth) {
        // The schedule keeps its starting depth and runs up to the requested one.
        const int first = std::min(cfg.pipeline.depths.front(), *depth);
        cfg.pipeline.depths.clear();
        for (int d = first; d <= *depth; ++d) cfg.pipeline.depths.push_back(d);
    }
    return birkhoff::run(app.get_subcommands().front()->get_name(), cfg, out_dir, std::cerr);
}
