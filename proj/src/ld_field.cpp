// Grid kernels. Each grid point (and each realization) is an independent
// task writing only its own cell, so the OpenMP loops and the serial
// references produce identical bits for any worker count.

#include "ldaction/ld.hpp"

#include "ld_point.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldaction {

namespace {

FieldTriplet blank_fields(const GridStates& grid) {
    FieldTriplet out{ScalarField(grid.x_axis, grid.y_axis), ScalarField(grid.x_axis, grid.y_axis),
                     ScalarField(grid.x_axis, grid.y_axis)};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!grid.feasible[k]) {
            for (ScalarField* f : {&out.forward, &out.backward, &out.total}) {
                f->values[k] = kMaskedValue;
                f->mask[k] = 0;
            }
        }
    }
    return out;
}

void store(FieldTriplet& out, std::size_t k, double f, double b, double t, bool valid) {
    out.forward.values[k] = f;
    out.backward.values[k] = b;
    out.total.values[k] = t;
    const std::uint8_t m = valid ? 1 : 0;
    out.forward.mask[k] = out.backward.mask[k] = out.total.mask[k] = m;
}

void check_grid(const SystemSpec& sys, const GridStates& grid, const LDParams& params) {
    validate(sys);
    params.validate(sys);
    grid.validate();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!grid.feasible[k]) continue;
        grid.states[k].validate();
        if (grid.states[k].dof() != dof(sys))
            throw std::invalid_argument("grid state has the wrong dimension");
    }
}

void deterministic_point(const SystemSpec& sys, const GridStates& grid, const LDParams& params,
                         const PointHook& hook, FieldTriplet& out, std::size_t k) {
    if (!grid.feasible[k]) return;
    const LDValue v = detail::evaluate_point(sys, grid.states[k], params, nullptr);
    store(out, k, v.forward, v.backward, v.total, !v.escaped);
    if (hook) hook(k, v);
}

WienerPath point_path(const LDParams& params, std::size_t k, std::size_t r) {
    return sample_wiener_path(path_seed(*params.ensemble, k, r), params.dt, params.tau_f, params.tau_b);
}

// Paths shared by the whole grid, one per realization; empty for per-point noise.
std::vector<WienerPath> shared_paths(const LDParams& params) {
    std::vector<WienerPath> paths;
    if (params.ensemble->sharing == NoiseSharing::grid)
        for (std::size_t r = 0; r < params.ensemble->n_realizations; ++r) paths.push_back(point_path(params, 0, r));
    return paths;
}

void stochastic_point(const Duffing& sys, const GridStates& grid, const LDParams& params,
                      const std::vector<WienerPath>& shared, FieldTriplet& out, std::size_t k) {
    if (!grid.feasible[k]) return;
    const SystemSpec spec{sys};
    const std::size_t n = params.ensemble->n_realizations;
    std::vector<double> f(n), b(n), t(n);
    bool valid = true;
    for (std::size_t r = 0; r < n; ++r) {
        WienerPath own;
        if (shared.empty()) own = point_path(params, k, r);
        const WienerPath& path = shared.empty() ? own : shared[r];
        const LDValue v = detail::evaluate_point(spec, grid.states[k], params, &path);
        f[r] = v.forward;
        b[r] = v.backward;
        t[r] = v.total;
        valid = valid && !v.escaped;
    }
    store(out, k, ordered_mean(f), ordered_mean(b), ordered_mean(t), valid);
}

void realization_point(const Duffing& sys, const GridStates& grid, const LDParams& params,
                       const std::optional<WienerPath>& shared, std::size_t r, FieldTriplet& out,
                       std::size_t k) {
    if (!grid.feasible[k]) return;
    const WienerPath path = shared ? *shared : point_path(params, k, r);
    const LDValue v = detail::evaluate_point(SystemSpec{sys}, grid.states[k], params, &path);
    store(out, k, v.forward, v.backward, v.total, !v.escaped);
}

LDParams stochastic_params(const Duffing& sys, const GridStates& grid, const LDParams& params) {
    LDParams p = params;
    if (!p.ensemble) throw std::invalid_argument("stochastic fields need an ensemble block");
    p.method = Method::euler_maruyama;
    check_grid(SystemSpec{sys}, grid, p);
    return p;
}

int resolve_workers(int workers) {
#ifdef _OPENMP
    return workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    return 1;
#endif
}

// The point functions can throw on malformed input only, which check_grid
// rules out before the parallel region starts.
template <class PointFn>
void parallel_points(std::size_t count, int workers, PointFn&& fn) {
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_workers(workers))
    for (std::ptrdiff_t k = 0; k < n; ++k) fn(static_cast<std::size_t>(k));
}

}  // namespace

std::uint64_t path_seed(const Ensemble& ensemble, std::size_t point, std::size_t realization) {
    // Shared paths use a point index no grid can reach.
    const std::uint64_t p = ensemble.sharing == NoiseSharing::grid ? std::numeric_limits<std::uint64_t>::max() : point;
    return stream_seed(ensemble.seed, p, realization);
}

FieldTriplet ld_field(const SystemSpec& sys, const GridStates& grid, const LDParams& params,
                      int workers, const PointHook& hook) {
    check_grid(sys, grid, params);
    FieldTriplet out = blank_fields(grid);
    parallel_points(grid.size(), workers,
                    [&](std::size_t k) { deterministic_point(sys, grid, params, hook, out, k); });
    return out;
}

FieldTriplet ld_field_serial(const SystemSpec& sys, const GridStates& grid,
                             const LDParams& params, const PointHook& hook) {
    check_grid(sys, grid, params);
    FieldTriplet out = blank_fields(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) deterministic_point(sys, grid, params, hook, out, k);
    return out;
}

FieldTriplet stochastic_ld_field(const Duffing& sys, const GridStates& grid,
                                 const LDParams& params, int workers) {
    const LDParams p = stochastic_params(sys, grid, params);
    const std::vector<WienerPath> shared = shared_paths(p);
    FieldTriplet out = blank_fields(grid);
    parallel_points(grid.size(), workers, [&](std::size_t k) { stochastic_point(sys, grid, p, shared, out, k); });
    return out;
}

FieldTriplet stochastic_ld_field_serial(const Duffing& sys, const GridStates& grid,
                                        const LDParams& params) {
    const LDParams p = stochastic_params(sys, grid, params);
    const std::vector<WienerPath> shared = shared_paths(p);
    FieldTriplet out = blank_fields(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) stochastic_point(sys, grid, p, shared, out, k);
    return out;
}

FieldTriplet stochastic_ld_realization(const Duffing& sys, const GridStates& grid,
                                       const LDParams& params, std::size_t realization,
                                       int workers) {
    const LDParams p = stochastic_params(sys, grid, params);
    if (realization >= p.ensemble->n_realizations)
        throw std::invalid_argument("realization index out of range");
    std::optional<WienerPath> shared;
    if (p.ensemble->sharing == NoiseSharing::grid) shared = point_path(p, 0, realization);
    FieldTriplet out = blank_fields(grid);
    parallel_points(grid.size(), workers,
                    [&](std::size_t k) { realization_point(sys, grid, p, shared, realization, out, k); });
    return out;
}

}  // namespace ldaction
