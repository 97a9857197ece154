#pragma once

#include "ldaction/field.hpp"
#include "ldaction/sections.hpp"

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ldaction {

/// (v - min) / (max - min) over valid cells; all zeros when max == min.
/// Masked cells keep their values. Throws when no cell is valid.
ScalarField normalize_field(const ScalarField& field);

enum class FeatureSource { unspecified, stable, unstable };

/// Per-cell quantity ranked by feature extraction.
enum class FeatureMeasure {
    gradient,   ///< central-difference gradient magnitude
    laplacian,  ///< magnitude of the five-point Laplacian; picks out kinks
                ///< riding on a steep smooth background
};

struct FeatureSet {
    std::vector<std::array<double, 2>> points;
    std::vector<std::size_t> indices;  ///< field index of each point
    FeatureSource source = FeatureSource::unspecified;
    FeatureMeasure measure = FeatureMeasure::gradient;
    double percentile = 0.0;
    /// Smallest measure value among the selected cells.
    double threshold = 0.0;

    std::size_t size() const { return points.size(); }
};

/// Central-difference gradient magnitude on valid interior cells whose four
/// axis neighbours are also valid; NaN elsewhere.
std::vector<double> gradient_magnitude(const ScalarField& field);
/// |d2v/dx2 + d2v/dy2| from second differences, on the same cells.
std::vector<double> laplacian_magnitude(const ScalarField& field);

/// Cells in the top (100 - percentile)% of the measure distribution: the
/// ceil((1 - percentile/100) N) largest of the N eligible cells, ties broken
/// by lower index. Selection is rank based, so it is unchanged by positive
/// affine maps of the values.
FeatureSet extract_singular_features(const ScalarField& field, double percentile = 95.0,
                                     FeatureSource source = FeatureSource::unspecified,
                                     FeatureMeasure measure = FeatureMeasure::gradient);

/// Field indices of `a` lying within `radius` cells (Chebyshev) of some
/// cell of `b`.
std::vector<std::size_t> feature_intersection(const ScalarField& field, const FeatureSet& a,
                                              const FeatureSet& b, std::size_t radius = 1);

struct GridPoint {
    std::size_t i = 0;
    std::size_t j = 0;
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

/// Valid cells whose window of the given Chebyshev radius lies inside the
/// grid and that are strictly smaller than every valid neighbour in it.
std::vector<GridPoint> find_local_minima(const ScalarField& field, std::size_t radius = 1);
/// Same with strictly larger.
std::vector<GridPoint> find_local_maxima(const ScalarField& field, std::size_t radius = 1);

struct SeriesPoint {
    double tau = 0.0;
    double g = 0.0;
};

/// g(tau) = (<S^(f)>(tau) - S_inf) tau = S^(f)(tau) - S_inf tau for a
/// harmonic oscillator trajectory. S_inf defaults to the mean of
/// <S^(f)> over the trailing tenth of the samples (tau > 0 only).
std::vector<SeriesPoint> g_series(const Harmonic& sys, const PhaseState& x0,
                                  std::span<const double> taus, double dt = 1e-3,
                                  std::optional<double> s_inf = std::nullopt);

struct FrequencyEstimate {
    double omega = 0.0;       ///< angular frequency of the dominant peak
    double magnitude = 0.0;   ///< |X_k| at the peak bin
    double resolution = 0.0;  ///< bin width 2 pi / (N dtau)
    std::size_t bin = 0;
};

/// One-sided DFT magnitudes |X_k|, k = 0..N/2, of the mean-removed series.
std::vector<double> amplitude_spectrum(std::span<const double> values);

/// Energy of a length-n series reconstructed from its one-sided spectrum,
/// (1/n) sum over all n bins of |X_k|^2.
double spectrum_energy(std::span<const double> amplitudes, std::size_t n);

/// Dominant positive-frequency peak with parabolic sub-bin interpolation.
/// Throws std::domain_error when no bin strictly dominates the bins that
/// are not adjacent to it (flat series).
FrequencyEstimate frequency_from_series(std::span<const double> values, double dtau);
FrequencyEstimate frequency_from_series(const std::vector<SeriesPoint>& series);

/// Per-cell mean in input order; mask is the intersection of the inputs.
ScalarField average_fields(const std::vector<ScalarField>& fields);

/// Bilinear value at (x, y), or nullopt outside the grid or next to an
/// invalid cell.
std::optional<double> sample_bilinear(const ScalarField& field, double x, double y);

struct OrbitConsistency {
    std::size_t samples = 0;
    double mean = 0.0;
    double spread = 0.0;  ///< max - min of the sampled values
    double ratio = 0.0;   ///< spread / |mean|
    bool passes = false;
};

/// Samples the field at every crossing of each orbit. Crossings that fall
/// outside the valid grid are skipped; an orbit with no samples fails.
std::vector<OrbitConsistency> torus_consistency(const ScalarField& avg_field,
                                                const std::vector<CrossingSet>& orbits,
                                                double tolerance);

}  // namespace ldaction
