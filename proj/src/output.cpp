#include "ldaction/output.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ldaction {

std::string format_double(double v) { return fmt::format("{}", v); }

std::vector<std::pair<int, std::size_t>> run_length(const std::vector<std::uint8_t>& mask) {
    std::vector<std::pair<int, std::size_t>> runs;
    for (std::uint8_t m : mask) {
        const int v = m ? 1 : 0;
        if (!runs.empty() && runs.back().first == v) ++runs.back().second;
        else runs.emplace_back(v, 1);
    }
    return runs;
}

std::string field_csv(const FieldTriplet& f) {
    std::string out = "x,y,forward,backward,total,mask\n";
    const ScalarField& t = f.total;
    out.reserve(t.size() * 80);
    for (std::size_t j = 0; j < t.ny(); ++j) {
        for (std::size_t i = 0; i < t.nx(); ++i) {
            const std::size_t k = t.index(i, j);
            fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{}\n", t.x_axis.at(i), t.y_axis.at(j),
                           f.forward.values[k], f.backward.values[k], t.values[k], t.mask[k] ? 1 : 0);
        }
    }
    return out;
}

std::string field_meta_json(const ScalarField& field, const std::string& name, const std::string& config_json) {
    auto axis = [](const AxisRange& a) { return nlohmann::json{{"min", a.min}, {"max", a.max}, {"count", a.count}}; };
    nlohmann::json rle = nlohmann::json::array();
    for (const auto& [v, n] : run_length(field.mask)) rle.push_back({v, n});
    nlohmann::json meta = {{"name", name},
                           {"nx", field.nx()},
                           {"ny", field.ny()},
                           {"layout", "row-major, x fastest, little-endian float64"},
                           {"x_axis", axis(field.x_axis)},
                           {"y_axis", axis(field.y_axis)},
                           {"mask_rle", rle},
                           {"config", nlohmann::json::parse(config_json)}};
    return meta.dump(2) + "\n";
}

std::string field_f64bin(const ScalarField& field) {
    std::string out(field.size() * sizeof(double), '\0');
    for (std::size_t k = 0; k < field.size(); ++k) {
        auto bits = std::bit_cast<std::uint64_t>(field.values[k]);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(out.data() + k * sizeof(double), &bits, sizeof bits);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_fields(const std::filesystem::path& dir, const FieldTriplet& fields, OutputFormat format,
                  const std::string& config_json) {
    if (format == OutputFormat::csv) {
        write_text(dir / "field.csv", field_csv(fields));
        return;
    }
    const std::pair<const ScalarField*, const char*> parts[] = {
        {&fields.forward, "forward"}, {&fields.backward, "backward"}, {&fields.total, "total"}};
    for (const auto& [f, name] : parts) {
        write_text(dir / (std::string(name) + ".f64bin"), field_f64bin(*f));
        write_text(dir / (std::string(name) + ".meta.json"), field_meta_json(*f, name, config_json));
    }
}

std::string crossings_csv(const std::vector<CrossingSet>& orbits) {
    std::string out = "orbit,crossing,time,axis1,axis2,escaped\n";
    for (std::size_t o = 0; o < orbits.size(); ++o) {
        const auto& set = orbits[o];
        for (std::size_t c = 0; c < set.size(); ++c) {
            const auto& x = set.crossings[c];
            fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{}\n", o, c, x.time, x.point[0], x.point[1],
                           set.escaped ? 1 : 0);
        }
    }
    return out;
}

std::string features_csv(const FeatureSet& features) {
    std::string out = "index,axis1,axis2\n";
    for (std::size_t k = 0; k < features.size(); ++k)
        fmt::format_to(std::back_inserter(out), "{},{},{}\n", features.indices[k], features.points[k][0],
                       features.points[k][1]);
    return out;
}

std::string minima_csv(const std::vector<GridPoint>& minima) {
    std::string out = "i,j,axis1,axis2,value\n";
    for (const auto& m : minima) fmt::format_to(std::back_inserter(out), "{},{},{},{},{}\n", m.i, m.j, m.x, m.y, m.value);
    return out;
}

std::string series_csv(const std::vector<SeriesPoint>& series) {
    std::string out = "tau,g\n";
    for (const auto& s : series) fmt::format_to(std::back_inserter(out), "{},{}\n", s.tau, s.g);
    return out;
}

}  // namespace ldaction
