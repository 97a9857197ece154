#pragma once

#include "ldaction/analysis.hpp"
#include "ldaction/ld.hpp"
#include "ldaction/sections.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ldaction {

enum class Command { field, stochastic_field, poincare, time_average, frequency, extract, bench };
enum class OutputFormat { csv, f64bin };

std::string command_name(Command c);
std::optional<Command> parse_command(std::string_view name);

struct PoincareBlock {
    PoincareOptions options;
    /// Seeds drawn with sample_section when no explicit points are given.
    std::size_t orbits = 20;
    std::vector<std::array<double, 2>> initial_points;
};

struct FrequencyBlock {
    double tau_max = 100.0;
    std::size_t samples = 2048;
    double dt = 1e-3;
    PhaseState initial;
    std::optional<double> s_inf;
};

struct ExtractBlock {
    double percentile = 95.0;
    FeatureMeasure measure = FeatureMeasure::gradient;
    std::size_t minima_radius = 1;
};

/// A parsed run description. Blocks not needed by the command may be absent.
struct RunConfig {
    Command command = Command::field;
    std::optional<SystemSpec> system;
    std::optional<LDParams> ld;
    std::optional<SectionSpec> section;
    std::optional<PoincareBlock> poincare;
    std::optional<FrequencyBlock> frequency;
    std::optional<ExtractBlock> extract;
    std::string output_directory = "out";
    OutputFormat format = OutputFormat::csv;
    std::uint64_t global_seed = 0;
};

/// Malformed or inconsistent configuration. The message names the offending
/// key path, or the line and column for syntax errors.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict JSON: unknown keys, missing required blocks and out-of-range values
/// throw ConfigError. `command_override` replaces a "command" key, which is
/// then optional.
RunConfig parse_config(std::string_view text, std::optional<Command> command_override = std::nullopt);
RunConfig load_config(const std::filesystem::path& path,
                      std::optional<Command> command_override = std::nullopt);

/// Re-derive dependent values after command-line overrides (ensemble seed)
/// and re-check cross-block consistency.
void finalize_config(RunConfig& cfg);

/// Fully resolved configuration as pretty-printed JSON, with every default
/// spelled out and an "ldaction_version" key. The output directory is left
/// out so runs that differ only in where they write produce identical
/// manifests. Parsing this text yields an equivalent RunConfig.
std::string resolved_config_json(const RunConfig& cfg);

std::string library_version();

}  // namespace ldaction
