#include "kinetic/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>

using namespace kinetic::cli;

int main(int argc, char** argv)
{
    CLI::App app{"kinetic: experiment runner for the kinetic-theory toolkit"};
    app.require_subcommand(1);

    std::string config_path, plot_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 0;

    auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
    run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--out", out, "output directory");
    run_cmd->add_option("--threads", threads, "cap on OpenMP threads (results do not depend on it)")
        ->check(CLI::NonNegativeNumber);

    auto* plot_cmd = app.add_subcommand("plot", "write SVG line plots for the series in a run directory");
    plot_cmd->add_option("dir", plot_dir, "run directory")->required();

    auto* validate_cmd = app.add_subcommand("validate", "check a config against the schema");
    validate_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Success : Validation;
    }

    if (*plot_cmd) {
        const PlotOutcome res = plot_directory(plot_dir);
        for (const auto& w : res.warnings)
            fmt::print(stderr, "warning: {}\n", w);
        for (const auto& f : res.written)
            fmt::print("{}\n", f);
        return Success;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ValidationError& e) {
        fmt::print(stderr, "validation error: {}\n", e.what());
        return Validation;
    }
    if (*validate_cmd) {
        fmt::print("ok: {} ({})\n", config_path, cfg.kind);
        return Success;
    }

    RunOptions opt;
    opt.seed = seed;
    if (out)
        opt.out = *out;
    opt.threads = threads;
    opt.config_path = config_path;
    try {
        const RunOutcome res = run(cfg, opt);
        fmt::print("{}: {} files in {}\n", cfg.kind, res.files.size() + 1, res.directory.string());
        for (const auto& f : res.failed_checks)
            fmt::print(stderr, "{}: {}\n", res.exit_code == Runtime ? "error" : "threshold failed", f);
        return res.exit_code;
    } catch (const RuntimeFailure& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return Runtime;
    }
}
