// ldaction command-line front end.
//
//   ldaction <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
//
// Exit codes: 0 success, 1 bench failure, 2 config error, 3 runtime error.

#include "ldaction/analysis.hpp"
#include "ldaction/config.hpp"
#include "ldaction/ld.hpp"
#include "ldaction/oracle.hpp"
#include "ldaction/output.hpp"
#include "ldaction/sections.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace ldaction;

namespace {

constexpr int kOk = 0;
constexpr int kBenchFailure = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

/// Everything a command produces, written only after the computation
/// finished so failed runs leave no partial outputs.
struct Outputs {
    std::optional<FieldTriplet> fields;
    std::map<std::string, std::string> files;
};

GridStates feasible_grid(const RunConfig& cfg) {
    GridStates grid = lift_grid(*cfg.system, *cfg.section);
    if (grid.feasible_count() == 0) throw ConfigError("section: empty feasible set");
    return grid;
}

FieldTriplet compute_fields(const RunConfig& cfg, const GridStates& grid, int threads) {
    if (cfg.ld->ensemble)
        return stochastic_ld_field(std::get<Duffing>(*cfg.system), grid, *cfg.ld, threads);
    return ld_field(*cfg.system, grid, *cfg.ld, threads);
}

Outputs run_poincare(const RunConfig& cfg, int threads) {
    const PoincareBlock& pb = *cfg.poincare;
    std::vector<PhaseState> seeds;
    if (!pb.initial_points.empty()) {
        for (std::size_t k = 0; k < pb.initial_points.size(); ++k) {
            auto x = lift_to_energy_surface(*cfg.system, *cfg.section, pb.initial_points[k]);
            if (!x) throw ConfigError(fmt::format("poincare.initial_points[{}]: outside the energy surface", k));
            seeds.push_back(std::move(*x));
        }
    } else {
        seeds = sample_section(*cfg.system, *cfg.section, pb.orbits, cfg.global_seed);
        if (seeds.empty()) throw ConfigError("section: empty feasible set");
    }
    const auto orbits = poincare_ensemble(*cfg.system, seeds, *cfg.section, pb.options, threads);
    Outputs out;
    out.files["crossings.csv"] = crossings_csv(orbits);
    return out;
}

Outputs run_frequency(const RunConfig& cfg) {
    const FrequencyBlock& fb = *cfg.frequency;
    std::vector<double> taus(fb.samples);
    for (std::size_t k = 0; k < taus.size(); ++k)
        taus[k] = fb.tau_max * static_cast<double>(k) / static_cast<double>(fb.samples);
    const auto series = g_series(std::get<Harmonic>(*cfg.system), fb.initial, taus, fb.dt, fb.s_inf);
    const FrequencyEstimate est = frequency_from_series(series);
    nlohmann::json j = {{"omega", est.omega},
                        {"magnitude", est.magnitude},
                        {"resolution", est.resolution},
                        {"bin", est.bin}};
    Outputs out;
    out.files["g_series.csv"] = series_csv(series);
    out.files["frequency.json"] = j.dump(2) + "\n";
    return out;
}

Outputs run_command(const RunConfig& cfg, int threads) {
    Outputs out;
    switch (cfg.command) {
        case Command::field:
        case Command::stochastic_field: out.fields = compute_fields(cfg, feasible_grid(cfg), threads); break;
        case Command::time_average:
            out.fields = time_average(compute_fields(cfg, feasible_grid(cfg), threads), *cfg.ld);
            break;
        case Command::extract: {
            out.fields = compute_fields(cfg, feasible_grid(cfg), threads);
            const ExtractBlock& xb = *cfg.extract;
            out.files["features_stable.csv"] =
                features_csv(extract_singular_features(out.fields->forward, xb.percentile, FeatureSource::stable, xb.measure));
            out.files["features_unstable.csv"] =
                features_csv(extract_singular_features(out.fields->backward, xb.percentile, FeatureSource::unstable, xb.measure));
            out.files["minima.csv"] = minima_csv(find_local_minima(out.fields->total, xb.minima_radius));
            break;
        }
        case Command::poincare: out = run_poincare(cfg, threads); break;
        case Command::frequency: out = run_frequency(cfg); break;
        case Command::bench: break;
    }
    return out;
}

int run_bench(const std::optional<fs::path>& out_dir) {
    const auto rows = run_oracle_rows();
    std::cout << oracle_table_text(rows);
    if (out_dir) {
        fs::create_directories(*out_dir);
        write_text(*out_dir / "bench.csv", oracle_table_csv(rows));
    }
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.passed; });
    return ok ? kOk : kBenchFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Action-based Lagrangian descriptors"};
    std::string command_text;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("command", command_text,
                   "field | stochastic-field | poincare | time-average | frequency | extract | bench")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--seed", seed, "global seed (overrides global_seed)");
    app.add_option("--threads", threads, "worker threads, 0 = OpenMP default")->check(CLI::NonNegativeNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    const auto command = parse_command(command_text);
    if (!command) {
        std::cerr << "ldaction: unknown command \"" << command_text << "\"\n";
        return kConfigError;
    }

    try {
        if (*command == Command::bench && config_path.empty())
            return run_bench(out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir));
        if (config_path.empty()) throw ConfigError("--config is required for command " + command_text);

        RunConfig cfg = load_config(config_path, *command);
        if (seed) {
            cfg.global_seed = *seed;
            finalize_config(cfg);
        }
        if (!out_dir.empty()) cfg.output_directory = out_dir;
        if (*command == Command::bench) return run_bench(fs::path(cfg.output_directory));

        const std::string manifest = resolved_config_json(cfg);
        Outputs out = run_command(cfg, threads);

        const fs::path dir(cfg.output_directory);
        fs::create_directories(dir);
        if (out.fields) write_fields(dir, *out.fields, cfg.format, manifest);
        for (const auto& [name, text] : out.files) write_text(dir / name, text);
        write_text(dir / "manifest.json", manifest);
        std::cerr << "ldaction: " << command_name(cfg.command) << " wrote " << dir.string() << "\n";
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "ldaction: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "ldaction: error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
