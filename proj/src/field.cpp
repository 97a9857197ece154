#include "ldaction/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldaction {

void AxisRange::validate() const {
    if (count < 2) throw std::invalid_argument("axis needs at least 2 nodes");
    if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
        throw std::invalid_argument("axis range must satisfy min < max");
}

std::size_t ScalarField::valid_count() const {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

void ScalarField::validate() const {
    x_axis.validate();
    y_axis.validate();
    if (values.size() != nx() * ny() || mask.size() != values.size())
        throw std::invalid_argument("field arrays do not match the axis counts");
}

std::size_t GridStates::feasible_count() const {
    return static_cast<std::size_t>(
        std::count_if(feasible.begin(), feasible.end(), [](auto f) { return f != 0; }));
}

void GridStates::validate() const {
    x_axis.validate();
    y_axis.validate();
    if (states.size() != x_axis.count * y_axis.count || feasible.size() != states.size())
        throw std::invalid_argument("grid arrays do not match the axis counts");
    if (states.empty()) throw std::invalid_argument("empty grid");
}

double ordered_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of no values");
    const double base = values[0];
    double shift = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) shift += values[k] - base;
    return base + shift / static_cast<double>(values.size());
}

}  // namespace ldaction
