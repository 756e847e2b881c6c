// fractalpaths: scenario runner for geodesics, Bazanski deviation, spinning /
// charged force laws, fractal fluctuation ensembles and stochastic-mechanics
// residual checks. One scenario per invocation, reproducible under a seed.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsp/config.hpp"
#include "fsp/csv.hpp"
#include "fsp/plot.hpp"
#include "fsp/scenario.hpp"
#include "fsp/version.hpp"

namespace {

int cmd_run(const std::string& config_path, bool has_seed, std::uint64_t seed,
            const std::string& out_dir) {
    fsp::ParseResult parsed = fsp::parse_config_file(config_path);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << e.str() << "\n";
        return 2;
    }
    fsp::ScenarioConfig cfg = *parsed.config;
    if (has_seed) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    const fsp::RunManifest man = fsp::run_scenario(cfg);
    if (!man.success) {
        std::cerr << "scenario failed: " << man.error << "\n";
        return 1;
    }
    std::cout << "wrote " << man.outputs.size() << " files to " << cfg.out_dir << "\n";
    for (const auto& [key, value] : man.results)
        std::cout << "  " << key << " = " << fsp::format_double(value) << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    fsp::ParseResult parsed = fsp::parse_config_file(config_path);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << e.str() << "\n";
        return 1;
    }
    std::cout << "valid: scenario '" << parsed.config->scenario << "'\n";
    return 0;
}

int cmd_plot(const std::string& spec_path, const std::vector<std::string>& csv_paths,
             const std::string& out_override) {
    fsp::PlotSpec spec = fsp::parse_plot_spec_file(spec_path);
    if (!out_override.empty()) spec.out = out_override;
    if (spec.out.empty()) {
        std::cerr << "plot spec has no 'out' target and --out was not given\n";
        return 2;
    }
    std::vector<fsp::CsvTable> inputs;
    for (const auto& p : csv_paths) inputs.push_back(fsp::read_csv(p));
    fsp::write_plot(spec.out, spec, inputs);
    std::cout << "wrote " << spec.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"path and path-deviation simulations on curved and fluctuating backgrounds"};
    app.set_version_flag("--version", std::string(fsp::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        has_seed = true;
    });
    run->add_option("--out", out_dir, "output directory (overrides config)");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a config and list every error");
    validate->add_option("config", validate_path, "config file")->required();

    std::string spec_path, plot_out;
    std::vector<std::string> csv_paths;
    CLI::App* plot = app.add_subcommand("plot", "render CSV columns to a static SVG");
    plot->add_option("spec", spec_path, "plot spec file")->required();
    plot->add_option("csv", csv_paths, "input CSV files")->required();
    plot->add_option("--out", plot_out, "output SVG path (overrides spec)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, has_seed, seed, out_dir);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (plot->parsed()) return cmd_plot(spec_path, csv_paths, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
