/**
 * @file blayer.cpp
 * @brief Command-line driver: `blayer <benchmark>|run <config> [--out DIR] [--jobs N] [--seed S] [--strict]`.
 */
#include "blayer/bench.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    using namespace blayer;
    CLI::App app{"Isogeometric boundary-layer contact benchmarks"};
    app.require_subcommand(1);
    RunOptions opt;
    bool strict = false, no_vtk = false;
    std::vector<std::string> overrides;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--jobs", opt.jobs, "parallel jobs for independent levels")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "seed recorded with the results");
        sub->add_flag("--strict", strict, "exit non-zero when an acceptance criterion fails");
        sub->add_flag("--no-vtk", no_vtk, "skip VTK output");
        sub->add_option("--set", overrides, "override a config value, e.g. --set load.p=-0.02");
    };

    std::string variant, config_file;
    double pressure = 0.0;
    std::map<std::string, CLI::App*> subs;
    for (const auto& id : benchmark_ids()) {
        subs[id] = app.add_subcommand(id, "run the " + id + " benchmark with paper defaults");
        common(subs[id]);
    }
    subs["patch-test"]->add_option("--variant", variant, "straight, inclined, curved or all");
    subs["hertz"]->add_option("--p", pressure, "single pressure load");
    CLI::App* run = app.add_subcommand("run", "run a benchmark config file");
    run->add_option("config", config_file, "config file")->required()->check(CLI::ExistingFile);
    common(run);
    CLI::App* show = app.add_subcommand("defaults", "print the default config of a benchmark");
    std::string show_id;
    show->add_option("benchmark", show_id)->required();

    CLI11_PARSE(app, argc, argv);
    opt.write_vtk = !no_vtk;

    Config config;
    try {
        if (show->parsed()) {
            std::cout << default_config(show_id).serialize();
            return 0;
        }
        if (run->parsed()) {
            config = Config::load(config_file);
        } else {
            for (const auto& [id, sub] : subs)
                if (sub->parsed()) config = default_config(id);
            if (!variant.empty()) config.set("geometry.variant", variant);
            if (pressure > 0.0) config.set("load.pressures", std::vector<double>{pressure});
        }
        for (const auto& o : overrides) config.apply_override(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return static_cast<int>(ExitCategory::Config);
    }

    const BenchOutput out = run_benchmark(config, opt);
    std::printf("%s: %s (%.1f s)\n", out.benchmark.c_str(), to_string(out.category).c_str(), out.runtime_seconds);
    if (!out.message.empty()) std::printf("  %s\n", out.message.c_str());
    for (const auto& c : out.criteria)
        std::printf("  %s %-32s value=%.6g threshold=%.6g  %s\n", c.passed ? "PASS" : "FAIL", c.id.c_str(), c.value,
                    c.threshold, c.description.c_str());
    return exit_code(out, strict);
}
