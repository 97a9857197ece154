#pragma once

#include "ldaction/field.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace ldaction {

enum class SectionKind {
    full_plane,      ///< one-DoF systems: the grid point (q, p) is the full state
    energy_section,  ///< two-DoF systems on a fixed energy surface
};

/// Which passages through the section count as crossings.
enum class CrossingDirection { positive, negative, both };

/// A lattice on a phase-space slice.
///
/// For energy sections the coordinate q_k (k = fixed_dof) is held at
/// fixed_value, the plotted axes are (q_j, p_j) of the other degree of
/// freedom, and p_k >= 0 is solved from the energy. For the proton-transfer
/// model, x = 0 with p_x >= 0 is fixed_dof 0, and y = -y_w with p_y >= 0 is
/// fixed_dof 1.
///
/// fixed_dof, fixed_value and direction also define the crossing surface
/// used by poincare_map, for either kind.
struct SectionSpec {
    SectionKind kind = SectionKind::full_plane;
    AxisRange axis1;
    AxisRange axis2;
    std::size_t fixed_dof = 0;
    double fixed_value = 0.0;
    double energy = 0.0;
    CrossingDirection direction = CrossingDirection::positive;

    /// Degree of freedom whose (q, p) are plotted.
    std::size_t plotted_dof(std::size_t dof) const { return dof == 1 ? 0 : 1 - fixed_dof; }
    void validate(const SystemSpec& sys) const;
};

/// Row-major lattice of section points, axis1 index running fastest.
struct SectionGrid {
    AxisRange axis1;
    AxisRange axis2;
    std::vector<std::array<double, 2>> points;

    std::size_t index(std::size_t i, std::size_t j) const { return j * axis1.count + i; }
    const std::array<double, 2>& point(std::size_t i, std::size_t j) const { return points[index(i, j)]; }
};

SectionGrid build_grid(const SectionSpec& spec);

/// Full state for a section point, or nullopt outside the energetically
/// allowed region. Full-plane specs return the point itself as (q, p).
std::optional<PhaseState> lift_to_energy_surface(const SystemSpec& sys, const SectionSpec& spec,
                                                 const std::array<double, 2>& point);

/// build_grid followed by lifting every point; infeasible points are masked.
GridStates lift_grid(const SystemSpec& sys, const SectionSpec& spec);

/// Plotted-axes coordinates of a full state.
std::array<double, 2> section_coordinates(const SectionSpec& spec, const PhaseState& x);

struct Crossing {
    double time = 0.0;
    std::array<double, 2> point{};
    PhaseState state;
};

struct CrossingSet {
    std::vector<Crossing> crossings;
    /// The trajectory diverged before t_max.
    bool escaped = false;
    /// The seed sits on the section with zero normal velocity for a whole
    /// step (an equilibrium on the section); recorded once as its own crossing.
    bool stationary = false;

    std::size_t size() const { return crossings.size(); }
};

struct PoincareOptions {
    double t_max = 1500.0;
    std::size_t max_crossings = 100000;
    double dt = 1e-2;
    /// Refined crossings satisfy |q_k - fixed_value| below this.
    double tolerance = 1e-10;
};

/// Forward RK4 run recording crossings of q_k = fixed_value in the section's
/// direction. Each crossing is bracketed by a step, located with a cubic
/// Hermite interpolant and bisection, then polished with Newton iterations
/// on a real RK4 sub-step so the stored state is an integrated state.
CrossingSet poincare_map(const SystemSpec& sys, const PhaseState& x0, const SectionSpec& spec,
                         const PoincareOptions& options = {});

/// poincare_map for many seeds, parallel per seed, output in seed order.
std::vector<CrossingSet> poincare_ensemble(const SystemSpec& sys, const std::vector<PhaseState>& seeds,
                                           const SectionSpec& spec, const PoincareOptions& options,
                                           int workers = 0);

/// Up to `count` feasible lattice points drawn uniformly without
/// replacement from a seeded stream, returned in lattice order.
std::vector<PhaseState> sample_section(const SystemSpec& sys, const SectionSpec& spec,
                                       std::size_t count, std::uint64_t seed);

}  // namespace ldaction
