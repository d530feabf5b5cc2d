#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "io.hpp"

namespace sparse_bandit {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> horizon;
    std::optional<std::string> out;
    std::optional<bool> shared_noise;
};

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOverrides& ov) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.reps) cfg.repetitions = *ov.reps;
    if (ov.horizon) cfg.horizon = *ov.horizon;
    if (ov.out) cfg.output = *ov.out;
    if (ov.shared_noise) cfg.shared_noise = *ov.shared_noise;
    cfg.validate();
    return cfg;
}

inline std::string sparsity_dir_name(std::size_t sparsity) { return "S" + std::to_string(sparsity); }

struct ResultFiles {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> traces;     ///< one per sparsity level
    std::vector<std::filesystem::path> aggregates;
};

/// Runs the experiment and writes <out>/manifest.json plus
/// <out>/S<s>/traces.csv and <out>/S<s>/aggregate.csv for every sparsity s.
/// The output directory is probed before any episode runs; on failure every
/// file this call created is removed.
inline ResultFiles run_command(const ExperimentConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    cfg.validate();
    const fs::path root(cfg.output);
    std::vector<fs::path> created;
    auto cleanup = [&] {
        std::error_code ec;
        for (auto it = created.rbegin(); it != created.rend(); ++it) fs::remove(*it, ec);
    };
    auto make_dir = [&](const fs::path& p) {
        std::error_code ec;
        if (fs::exists(p, ec)) {
            if (!fs::is_directory(p, ec)) throw IoError("output path '" + p.string() + "' is not a directory");
            return;
        }
        std::vector<fs::path> chain;
        for (fs::path q = p; !q.empty() && !fs::exists(q, ec); q = q.parent_path()) {
            chain.push_back(q);
            if (q == q.parent_path()) break;
        }
        if (!fs::create_directories(p, ec) || ec)
            throw IoError("cannot create output directory '" + p.string() + "': " + ec.message());
        created.insert(created.end(), chain.rbegin(), chain.rend());
    };
    auto open_out = [&](const fs::path& p) {
        const bool existed = fs::exists(p);
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write '" + p.string() + "'");
        if (!existed) created.push_back(p);
        return os;
    };

    ResultFiles files;
    files.manifest = root / "manifest.json";
    try {
        make_dir(root);
        for (std::size_t s : cfg.sparsity) make_dir(root / sparsity_dir_name(s));
        {
            auto probe = open_out(files.manifest);
            probe << config_to_json(cfg).dump(2) << '\n';
            if (!probe) throw IoError("cannot write '" + files.manifest.string() + "'");
        }
        log << "running " << cfg.policies.size() << " policies x " << cfg.repetitions << " repetitions x "
            << cfg.sparsity.size() << " sparsity levels, T = " << cfg.horizon << '\n';
        const ExperimentResult result = run_experiment(cfg);
        for (const auto& sr : result.per_sparsity) {
            const fs::path dir = root / sparsity_dir_name(sr.sparsity);
            {
                auto os = open_out(dir / "traces.csv");
                os << kTracesHeader << '\n';
                for (const auto& per_policy : sr.traces) write_trace_rows(os, per_policy);
                if (!os.flush()) throw IoError("failed writing traces for S=" + std::to_string(sr.sparsity));
            }
            {
                auto os = open_out(dir / "aggregate.csv");
                write_aggregate_csv(os, sr.aggregates);
                if (!os.flush()) throw IoError("failed writing aggregates for S=" + std::to_string(sr.sparsity));
            }
            files.traces.push_back(dir / "traces.csv");
            files.aggregates.push_back(dir / "aggregate.csv");
            log << "S=" << sr.sparsity << " (n=" << sr.n_levels << ")";
            for (const auto& a : sr.aggregates) {
                std::ostringstream v;
                v.precision(6);
                v << a.mean.back() << " +- " << a.std.back();
                log << "  " << a.label << ": " << v.str();
            }
            log << '\n';
        }
    } catch (...) {
        cleanup();
        throw;
    }
    return files;
}

/// Reads a traces file, aggregates per label and writes the strided plot table
/// (and optionally an SVG figure).
inline std::vector<PlotRow> plotdata_command(const std::string& traces_path, std::size_t stride,
                                             const std::string& out_csv, const std::string& out_svg = "") {
    std::ifstream in(traces_path);
    if (!in) throw IoError("cannot open traces file '" + traces_path + "'");
    const auto traces = read_traces_csv(in);
    if (traces.empty()) throw ParseError(1, "traces file has no rows");
    const auto aggs = aggregate_by_label(traces);
    auto rows = plot_rows(aggs, stride);
    {
        std::ofstream os(out_csv, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write '" + out_csv + "'");
        write_plot_csv(os, rows);
    }
    if (!out_svg.empty()) {
        std::ofstream os(out_svg, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write '" + out_svg + "'");
        write_plot_svg(os, rows, std::filesystem::path(traces_path).parent_path().filename().string());
    }
    return rows;
}

}  // namespace sparse_bandit
