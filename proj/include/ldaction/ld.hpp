#pragma once

#include "ldaction/field.hpp"
#include "ldaction/integrate.hpp"

#include <functional>
#include <optional>

namespace ldaction {

enum class LDMode {
    fixed,     ///< every trajectory runs for the full tau
    variable,  ///< trajectories stop when they leave stop_region
};

/// How Wiener paths are assigned within one realization.
enum class NoiseSharing {
    grid,       ///< one path per realization drives every grid point
    per_point,  ///< every (point, realization) pair draws its own path
};

struct Ensemble {
    std::size_t n_realizations = 1;
    std::uint64_t seed = 0;
    NoiseSharing sharing = NoiseSharing::grid;
};

/// Seed of the Wiener path driving grid point `point` in realization
/// `realization`.
std::uint64_t path_seed(const Ensemble& ensemble, std::size_t point, std::size_t realization);

struct LDParams {
    double tau_f = 0.0;
    double tau_b = 0.0;
    double t0 = 0.0;
    double dt = 1e-3;
    LDMode mode = LDMode::fixed;
    std::optional<Box> stop_region;
    std::optional<Ensemble> ensemble;
    /// euler_maruyama is only accepted for the Duffing system.
    Method method = Method::rk4;
    BackwardNoise backward_noise = BackwardNoise::independent;

    void validate(const SystemSpec& sys) const;
};

struct LDValue {
    double forward = 0.0;
    double backward = 0.0;
    double total = 0.0;
    double elapsed_f = 0.0;
    double elapsed_b = 0.0;
    /// A branch diverged; the sums are partial.
    bool escaped = false;
    PhaseState end_forward;
    PhaseState end_backward;
};

// Single-trajectory descriptors. The action is accumulated as the
// trapezoidal integral of p . dq/dt over the integrator nodes, in |dt| for
// both directions so every component is non-negative.

LDValue ld_total(const SystemSpec& sys, const PhaseState& x0, const LDParams& params);
double ld_forward(const SystemSpec& sys, const PhaseState& x0, const LDParams& params);
double ld_backward(const SystemSpec& sys, const PhaseState& x0, const LDParams& params);

/// (S_f + S_b) / (tau_f + tau_b), or S_f / tau_f when tau_b = 0. Fixed mode only.
double ld_time_average(const SystemSpec& sys, const PhaseState& x0, const LDParams& params);

/// One stochastic realization of the Duffing descriptor driven by `path`.
LDValue ld_stochastic(const Duffing& sys, const PhaseState& x0, const LDParams& params,
                      const WienerPath& path);

/// Forward action S_f(tau_k) at each of the increasing sample times, from a
/// single RK4 run with steps no longer than params.dt between samples.
std::vector<double> ld_forward_series(const SystemSpec& sys, const PhaseState& x0,
                                      std::span<const double> taus, double dt);

/// Invoked once per feasible grid point after its descriptor is computed.
/// Parallel kernels call it concurrently for distinct indices.
using PointHook = std::function<void(std::size_t index, const LDValue&)>;

/// Descriptor fields over a grid of seeds. `workers` <= 0 uses the OpenMP
/// default. The result does not depend on the worker count.
FieldTriplet ld_field(const SystemSpec& sys, const GridStates& grid, const LDParams& params,
                      int workers = 0, const PointHook& hook = {});

/// Single-threaded reference for ld_field.
FieldTriplet ld_field_serial(const SystemSpec& sys, const GridStates& grid,
                             const LDParams& params, const PointHook& hook = {});

/// Ensemble-mean Duffing fields. Realization r of grid point k is driven by
/// the Wiener path seeded with path_seed(ensemble, k, r); the mean is taken
/// in realization order. A cell is valid only if every realization
/// stayed bounded.
FieldTriplet stochastic_ld_field(const Duffing& sys, const GridStates& grid,
                                 const LDParams& params, int workers = 0);

FieldTriplet stochastic_ld_field_serial(const Duffing& sys, const GridStates& grid,
                                        const LDParams& params);

/// Single-realization fields, realization r only (for inspecting the spread
/// of an ensemble or averaging externally).
FieldTriplet stochastic_ld_realization(const Duffing& sys, const GridStates& grid,
                                       const LDParams& params, std::size_t realization,
                                       int workers = 0);

/// Divides the triplet by the integration times: forward / tau_f,
/// backward / tau_b, total / (tau_f + tau_b).
FieldTriplet time_average(const FieldTriplet& fields, const LDParams& params);

}  // namespace ldaction
