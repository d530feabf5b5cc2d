#include <cstdlib>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sparse_bandit/sparse_bandit.hpp"

namespace sb = sparse_bandit;

int main(int argc, char** argv) {
    CLI::App app{"Sparse linear bandit simulator: OFUL, greedy, SparseLinUCB and AdaLinUCB"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sb::kVersion));

    auto* run = app.add_subcommand("run", "Run an experiment and write traces.csv, aggregate.csv and manifest.json");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> horizon;
    std::optional<std::string> out;
    std::optional<bool> shared_noise;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--reps", reps, "Override the number of repetitions");
    run->add_option("--horizon,-T", horizon, "Override the horizon T");
    run->add_option("--out", out, "Output directory (default: config value, then $SPARSE_BANDIT_OUT)");
    run->add_option("--shared-noise", shared_noise, "Share the noise stream across policies (true/false)");

    auto* plot = app.add_subcommand("plotdata", "Downsample a traces file into mean and +-1 std bands");
    std::string traces_path;
    std::size_t stride = 10;
    std::string plot_out;
    std::string svg_out;
    plot->add_option("traces", traces_path, "traces.csv produced by run")->required()->check(CLI::ExistingFile);
    plot->add_option("--stride", stride, "Keep every stride-th round (the final round is always kept)")
        ->check(CLI::PositiveNumber);
    plot->add_option("--out", plot_out, "Output CSV (default: plot.csv next to the traces file)");
    plot->add_option("--svg", svg_out, "Also write an SVG figure to this path");

    auto* self = app.add_subcommand("selftest", "Check the linear-algebra and regret-analysis invariants on random instances");
    std::uint64_t self_seed = 2024;
    std::size_t self_episodes = 40;
    self->add_option("--seed", self_seed, "Seed for the random instances");
    self->add_option("--reps", self_episodes, "Number of random episodes")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            sb::RunOverrides ov{seed, reps, horizon, out, shared_noise};
            const sb::ExperimentConfig cfg = sb::apply_overrides(sb::parse_config(config_path), ov);
            const auto files = sb::run_command(cfg, std::cout);
            std::cout << "wrote " << files.manifest.string() << '\n';
            return EXIT_SUCCESS;
        }
        if (*plot) {
            if (plot_out.empty()) {
                const auto parent = std::filesystem::path(traces_path).parent_path();
                plot_out = (parent / "plot.csv").string();
            }
            const auto rows = sb::plotdata_command(traces_path, stride, plot_out, svg_out);
            std::cout << "wrote " << rows.size() << " rows to " << plot_out << '\n';
            return EXIT_SUCCESS;
        }
        if (*self) {
            bool ok = true;
            for (const auto& r : sb::run_selftest(self_seed, self_episodes)) {
                ok = ok && r.passed;
                std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name
                          << " worst=" << std::scientific << std::setprecision(3) << r.worst << "  (" << r.detail
                          << ")\n";
            }
            return ok ? EXIT_SUCCESS : EXIT_FAILURE;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return EXIT_FAILURE;
    }
    return EXIT_FAILURE;
}
