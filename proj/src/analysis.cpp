#include "ldaction/analysis.hpp"

#include "ldaction/ld.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace ldaction {

ScalarField normalize_field(const ScalarField& field) {
    field.validate();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < field.size(); ++k) {
        if (!field.mask[k]) continue;
        lo = std::min(lo, field.values[k]);
        hi = std::max(hi, field.values[k]);
    }
    if (lo > hi) throw std::invalid_argument("normalize_field needs at least one valid cell");
    ScalarField out = field;
    const double span = hi - lo;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!out.mask[k]) continue;
        out.values[k] = span > 0.0 ? (field.values[k] - lo) / span : 0.0;
    }
    return out;
}

namespace {

// Applies `op` on interior cells whose four axis neighbours are valid.
template <class Op>
std::vector<double> five_point(const ScalarField& field, Op op) {
    field.validate();
    const std::size_t nx = field.nx(), ny = field.ny();
    const double hx = field.x_axis.spacing(), hy = field.y_axis.spacing();
    std::vector<double> g(field.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const std::size_t k = field.index(i, j);
            if (!field.mask[k] || !field.mask[k - 1] || !field.mask[k + 1] || !field.mask[k - nx] ||
                !field.mask[k + nx])
                continue;
            const double* v = field.values.data();
            g[k] = op(v[k - 1], v[k], v[k + 1], v[k - nx], v[k + nx], hx, hy);
        }
    }
    return g;
}

}  // namespace

std::vector<double> gradient_magnitude(const ScalarField& field) {
    return five_point(field, [](double w, double, double e, double s, double n, double hx, double hy) {
        return std::hypot((e - w) / (2.0 * hx), (n - s) / (2.0 * hy));
    });
}

std::vector<double> laplacian_magnitude(const ScalarField& field) {
    return five_point(field, [](double w, double c, double e, double s, double n, double hx, double hy) {
        return std::abs((e - 2.0 * c + w) / (hx * hx) + (n - 2.0 * c + s) / (hy * hy));
    });
}

FeatureSet extract_singular_features(const ScalarField& field, double percentile, FeatureSource source,
                                     FeatureMeasure measure) {
    if (!(percentile >= 0.0 && percentile < 100.0))
        throw std::invalid_argument("percentile must lie in [0, 100)");
    if (field.nx() < 3 || field.ny() < 3) throw std::invalid_argument("feature extraction needs a 3x3 field");
    const std::vector<double> g =
        measure == FeatureMeasure::laplacian ? laplacian_magnitude(field) : gradient_magnitude(field);
    std::vector<std::size_t> cells;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (std::isfinite(g[k])) cells.push_back(k);

    FeatureSet out;
    out.source = source;
    out.measure = measure;
    out.percentile = percentile;
    if (cells.empty()) return out;

    const auto keep = static_cast<std::size_t>(
        std::ceil((1.0 - percentile / 100.0) * static_cast<double>(cells.size()) - 1e-9));
    const std::size_t n = std::clamp<std::size_t>(keep, 1, cells.size());
    auto larger = [&](std::size_t a, std::size_t b) { return g[a] > g[b] || (g[a] == g[b] && a < b); };
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n), cells.end(), larger);
    cells.resize(n);
    out.threshold = g[cells.back()];
    std::sort(cells.begin(), cells.end());
    out.indices = cells;
    out.points.reserve(n);
    for (std::size_t k : cells)
        out.points.push_back({field.x_axis.at(k % field.nx()), field.y_axis.at(k / field.nx())});
    return out;
}

std::vector<std::size_t> feature_intersection(const ScalarField& field, const FeatureSet& a,
                                              const FeatureSet& b, std::size_t radius) {
    std::vector<std::uint8_t> near(field.size(), 0);
    const auto r = static_cast<std::ptrdiff_t>(radius);
    const auto nx = static_cast<std::ptrdiff_t>(field.nx()), ny = static_cast<std::ptrdiff_t>(field.ny());
    for (std::size_t k : b.indices) {
        const auto i = static_cast<std::ptrdiff_t>(k) % nx, j = static_cast<std::ptrdiff_t>(k) / nx;
        for (auto dj = -r; dj <= r; ++dj)
            for (auto di = -r; di <= r; ++di) {
                const auto ii = i + di, jj = j + dj;
                if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) near[static_cast<std::size_t>(jj * nx + ii)] = 1;
            }
    }
    std::vector<std::size_t> out;
    for (std::size_t k : a.indices)
        if (near[k]) out.push_back(k);
    return out;
}

namespace {

template <class Better>
std::vector<GridPoint> local_extrema(const ScalarField& field, std::size_t radius, Better better) {
    field.validate();
    if (radius < 1) throw std::invalid_argument("neighbourhood radius must be >= 1");
    std::vector<GridPoint> out;
    const std::size_t nx = field.nx(), ny = field.ny();
    if (nx < 2 * radius + 1 || ny < 2 * radius + 1) return out;
    for (std::size_t j = radius; j + radius < ny; ++j) {
        for (std::size_t i = radius; i + radius < nx; ++i) {
            if (!field.valid(i, j)) continue;
            const double v = field(i, j);
            bool extreme = true;
            bool any = false;
            for (std::size_t jj = j - radius; jj <= j + radius && extreme; ++jj)
                for (std::size_t ii = i - radius; ii <= i + radius; ++ii) {
                    if ((ii == i && jj == j) || !field.valid(ii, jj)) continue;
                    any = true;
                    if (!better(v, field(ii, jj))) {
                        extreme = false;
                        break;
                    }
                }
            if (extreme && any) out.push_back({i, j, field.x_axis.at(i), field.y_axis.at(j), v});
        }
    }
    return out;
}

}  // namespace

std::vector<GridPoint> find_local_minima(const ScalarField& field, std::size_t radius) {
    return local_extrema(field, radius, [](double v, double w) { return v < w; });
}

std::vector<GridPoint> find_local_maxima(const ScalarField& field, std::size_t radius) {
    return local_extrema(field, radius, [](double v, double w) { return v > w; });
}

std::vector<SeriesPoint> g_series(const Harmonic& sys, const PhaseState& x0, std::span<const double> taus,
                                  double dt, std::optional<double> s_inf) {
    if (taus.empty()) throw std::invalid_argument("g_series needs at least one sample");
    const std::vector<double> s = ld_forward_series(SystemSpec{sys}, x0, taus, dt);
    double limit = 0.0;
    if (s_inf) {
        limit = *s_inf;
    } else {
        const std::size_t tail = std::max<std::size_t>(1, taus.size() / 10);
        std::size_t used = 0;
        for (std::size_t k = taus.size() - tail; k < taus.size(); ++k) {
            if (taus[k] <= 0.0) continue;
            limit += s[k] / taus[k];
            ++used;
        }
        if (used == 0) throw std::invalid_argument("g_series needs positive sample times");
        limit /= static_cast<double>(used);
    }
    std::vector<SeriesPoint> out(taus.size());
    for (std::size_t k = 0; k < taus.size(); ++k) out[k] = {taus[k], s[k] - limit * taus[k]};
    return out;
}

namespace {

// FFTW planning is not thread safe.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::vector<double> amplitude_spectrum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("spectrum needs at least two samples");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < n; ++k) in[k] = values[k] - mean;
    fftw_execute(plan);
    std::vector<double> amp(n / 2 + 1);
    for (std::size_t k = 0; k < amp.size(); ++k) amp[k] = std::hypot(out[k][0], out[k][1]);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return amp;
}

double spectrum_energy(std::span<const double> amplitudes, std::size_t n) {
    if (amplitudes.size() != n / 2 + 1) throw std::invalid_argument("spectrum length does not match n");
    double e = 0.0;
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        // Bins other than 0 and the Nyquist bin stand for a conjugate pair.
        const bool single = k == 0 || (n % 2 == 0 && k == n / 2);
        e += (single ? 1.0 : 2.0) * amplitudes[k] * amplitudes[k];
    }
    return e / static_cast<double>(n);
}

FrequencyEstimate frequency_from_series(std::span<const double> values, double dtau) {
    if (values.size() < 64) throw std::invalid_argument("frequency estimation needs at least 64 samples");
    if (!(dtau > 0.0)) throw std::invalid_argument("sample spacing must be > 0");
    const std::vector<double> amp = amplitude_spectrum(values);
    const std::size_t n = values.size();
    std::size_t peak = 1;
    for (std::size_t k = 2; k < amp.size(); ++k)
        if (amp[k] > amp[peak]) peak = k;
    double rival = 0.0;
    for (std::size_t k = 1; k < amp.size(); ++k)
        if (k + 1 < peak || k > peak + 1) rival = std::max(rival, amp[k]);
    if (!(amp[peak] > rival)) throw std::domain_error("no dominant spectral peak");

    double offset = 0.0;
    if (peak + 1 < amp.size()) {
        const double a = amp[peak - 1], b = amp[peak], c = amp[peak + 1];
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) offset = 0.5 * (a - c) / denom;
    }
    FrequencyEstimate est;
    est.resolution = 2.0 * M_PI / (static_cast<double>(n) * dtau);
    est.omega = (static_cast<double>(peak) + offset) * est.resolution;
    est.magnitude = amp[peak];
    est.bin = peak;
    return est;
}

FrequencyEstimate frequency_from_series(const std::vector<SeriesPoint>& series) {
    if (series.size() < 2) throw std::invalid_argument("frequency estimation needs at least 64 samples");
    const double dtau = series[1].tau - series[0].tau;
    std::vector<double> g(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        g[k] = series[k].g;
        const double expected = series[0].tau + dtau * static_cast<double>(k);
        if (std::abs(series[k].tau - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw std::invalid_argument("frequency estimation needs uniform samples");
    }
    return frequency_from_series(g, dtau);
}

ScalarField average_fields(const std::vector<ScalarField>& fields) {
    if (fields.empty()) throw std::invalid_argument("average of no fields");
    for (const auto& f : fields) {
        f.validate();
        if (!(f.x_axis == fields[0].x_axis) || !(f.y_axis == fields[0].y_axis))
            throw std::invalid_argument("averaged fields must share their axes");
    }
    ScalarField out = fields[0];
    std::vector<double> column(fields.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::uint8_t m = 1;
        for (std::size_t r = 0; r < fields.size(); ++r) {
            column[r] = fields[r].values[k];
            m = m && fields[r].mask[k];
        }
        out.values[k] = ordered_mean(column);
        out.mask[k] = m;
    }
    return out;
}

std::optional<double> sample_bilinear(const ScalarField& field, double x, double y) {
    const double fx = (x - field.x_axis.min) / field.x_axis.spacing();
    const double fy = (y - field.y_axis.min) / field.y_axis.spacing();
    const double ex = static_cast<double>(field.nx() - 1), ey = static_cast<double>(field.ny() - 1);
    if (!(fx >= 0.0 && fx <= ex && fy >= 0.0 && fy <= ey)) return std::nullopt;
    const auto i = std::min(static_cast<std::size_t>(fx), field.nx() - 2);
    const auto j = std::min(static_cast<std::size_t>(fy), field.ny() - 2);
    if (!field.valid(i, j) || !field.valid(i + 1, j) || !field.valid(i, j + 1) || !field.valid(i + 1, j + 1))
        return std::nullopt;
    const double u = fx - static_cast<double>(i), v = fy - static_cast<double>(j);
    return (1 - u) * (1 - v) * field(i, j) + u * (1 - v) * field(i + 1, j) + (1 - u) * v * field(i, j + 1) +
           u * v * field(i + 1, j + 1);
}

std::vector<OrbitConsistency> torus_consistency(const ScalarField& avg_field,
                                                const std::vector<CrossingSet>& orbits, double tolerance) {
    avg_field.validate();
    std::vector<OrbitConsistency> out;
    out.reserve(orbits.size());
    for (const auto& orbit : orbits) {
        OrbitConsistency r;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (const auto& c : orbit.crossings) {
            const auto v = sample_bilinear(avg_field, c.point[0], c.point[1]);
            if (!v) continue;
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
            sum += *v;
            ++r.samples;
        }
        if (r.samples > 0) {
            r.mean = sum / static_cast<double>(r.samples);
            r.spread = hi - lo;
            r.ratio = r.mean != 0.0 ? r.spread / std::abs(r.mean) : (r.spread == 0.0 ? 0.0 : INFINITY);
            r.passes = r.ratio < tolerance;
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace ldaction
