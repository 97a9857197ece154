#pragma once

#include "ldaction/analysis.hpp"
#include "ldaction/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ldaction {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Runs of equal mask values as (value, length) pairs in index order.
std::vector<std::pair<int, std::size_t>> run_length(const std::vector<std::uint8_t>& mask);

/// CSV with header x,y,forward,backward,total,mask, one row per cell.
std::string field_csv(const FieldTriplet& fields);

/// Sidecar for one f64bin file: nx, ny, axes, mask runs and the config echo.
std::string field_meta_json(const ScalarField& field, const std::string& name, const std::string& config_json);

/// Little-endian IEEE-754 doubles in row-major order, no header.
std::string field_f64bin(const ScalarField& field);

/// field.csv, or {forward,backward,total}.f64bin plus .meta.json sidecars.
void write_fields(const std::filesystem::path& dir, const FieldTriplet& fields, OutputFormat format,
                  const std::string& config_json);

std::string crossings_csv(const std::vector<CrossingSet>& orbits);
std::string features_csv(const FeatureSet& features);
std::string minima_csv(const std::vector<GridPoint>& minima);
std::string series_csv(const std::vector<SeriesPoint>& series);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace ldaction
