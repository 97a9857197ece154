#pragma once

#include "ldaction/dynamics.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ldaction {

/// Uniform lattice axis with inclusive endpoints.
struct AxisRange {
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 2;

    double spacing() const { return (max - min) / static_cast<double>(count - 1); }
    double at(std::size_t i) const {
        // Pin the last node to max so the endpoints are exact.
        return i + 1 == count ? max : min + static_cast<double>(i) * spacing();
    }
    void validate() const;
    bool operator==(const AxisRange&) const = default;
};

/// Value stored in cells that never had a trajectory (infeasible seeds).
inline constexpr double kMaskedValue = std::numeric_limits<double>::quiet_NaN();

/// nx x ny grid of values, row-major with the x index running fastest.
/// mask[k] = 1 marks a valid cell. Masked cells are ignored by statistics;
/// infeasible cells hold kMaskedValue, diverged cells keep their raw value.
struct ScalarField {
    AxisRange x_axis;
    AxisRange y_axis;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    ScalarField() = default;
    ScalarField(AxisRange x, AxisRange y)
        : x_axis(x), y_axis(y), values(x.count * y.count, 0.0), mask(x.count * y.count, 1) {}

    std::size_t nx() const { return x_axis.count; }
    std::size_t ny() const { return y_axis.count; }
    std::size_t size() const { return values.size(); }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx() + i; }
    double operator()(std::size_t i, std::size_t j) const { return values[index(i, j)]; }
    bool valid(std::size_t i, std::size_t j) const { return mask[index(i, j)] != 0; }
    std::size_t valid_count() const;
    /// Throws std::invalid_argument when array sizes disagree with the axes.
    void validate() const;
};

struct FieldTriplet {
    ScalarField forward;
    ScalarField backward;
    ScalarField total;
};

/// Seeds of a field computation laid out on the lattice of a ScalarField.
/// states[k] is only meaningful where feasible[k] != 0.
struct GridStates {
    AxisRange x_axis;
    AxisRange y_axis;
    std::vector<PhaseState> states;
    std::vector<std::uint8_t> feasible;

    std::size_t size() const { return states.size(); }
    std::size_t feasible_count() const;
    void validate() const;
};

/// Mean of values summed in index order as v0 + sum(v_k - v0) / n, which
/// returns v0 exactly when all values are equal.
double ordered_mean(std::span<const double> values);

}  // namespace ldaction
