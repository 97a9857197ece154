#pragma once

#include "ldaction/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ldaction {

/// Axis-aligned box over the full 2n-dimensional phase space, in the flat
/// layout (q_0..q_{n-1}, p_0..p_{n-1}).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const double* x) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
        return true;
    }
    bool contains(const PhaseState& x) const;
    void validate(std::size_t expected_dim) const;

    /// [-r, r]^dim.
    static Box centered(std::size_t dim, double half_width);
};

enum class Method { rk4, euler_maruyama };
enum class Direction { forward, backward };

/// How the backward branch of a stochastic run draws its noise.
enum class BackwardNoise {
    independent,  ///< separate increments anchored at W(t0) = 0
    reflected,    ///< the forward increments, negated
};

struct IntegratorConfig {
    double dt = 1e-3;
    Method method = Method::rk4;
    Direction direction = Direction::forward;
    double t0 = 0.0;
    double tau = 0.0;
    std::optional<Box> stop_region;
};

enum class StopReason { completed, left_region, diverged };

struct IntegrationResult {
    PhaseState final_state;
    double elapsed = 0.0;
    /// Set when the run stopped before tau, either by leaving the stop
    /// region or by diverging.
    bool escaped = false;
    StopReason reason = StopReason::completed;
    /// Trapezoidal integral of the action rate p . dq/dt over |dt|.
    double accumulated = 0.0;
};

/// Called after every accepted step with the new state and the signed step.
using StepObserver = std::function<void(const PhaseState&, double)>;

/// Components beyond this magnitude mark a trajectory as diverged.
inline constexpr double kDivergenceThreshold = 1e10;

/// Number of uniform steps used to cover tau with steps no longer than dt.
/// Steps are tau / n, so the run ends on t0 +- tau exactly.
std::size_t step_count(double tau, double dt);

/// Fixed-step RK4. Accumulates the action along the way in
/// IntegrationResult::accumulated and forwards each step to the observer.
IntegrationResult integrate_deterministic(const SystemSpec& sys, const PhaseState& x0,
                                          const IntegratorConfig& cfg,
                                          const StepObserver& observer = {});

/// Two-sided discretised Brownian path sampled from a counter-based stream.
struct WienerPath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<double> increments_forward;
    std::vector<double> increments_backward;
};

/// ceil(tau_f/dt) forward and ceil(tau_b/dt) backward N(0, dt) increments.
/// Same seed, same path, bit for bit.
WienerPath sample_wiener_path(std::uint64_t seed, double dt, double tau_f, double tau_b);

/// Mixes a global seed with a grid point and realization index into the
/// seed of that trajectory's private stream.
std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t point_index,
                          std::uint64_t realization);

/// Euler–Maruyama for the Duffing oscillator. Backward runs step the
/// time-reversed drift and use the backward branch of the path (or the
/// negated forward branch, see BackwardNoise).
IntegrationResult integrate_stochastic_em(const Duffing& sys, const PhaseState& x0,
                                          const IntegratorConfig& cfg, const WienerPath& path,
                                          const StepObserver& observer = {},
                                          BackwardNoise backward_noise = BackwardNoise::independent);

}  // namespace ldaction
