#include "ldaction/integrate.hpp"

#include "ldaction/detail/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ldaction {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1], never 0 so the logarithm below is finite.
double counter_uniform(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = splitmix64(key ^ splitmix64(counter));
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Box–Muller on counter pairs: increments 2k and 2k+1 share counter k.
void fill_gaussian(std::uint64_t key, double scale, std::vector<double>& out) {
    for (std::size_t k = 0; 2 * k < out.size(); ++k) {
        const double u1 = counter_uniform(key, 2 * k);
        const double u2 = counter_uniform(key, 2 * k + 1);
        const double r = std::sqrt(-2.0 * std::log(u1)) * scale;
        const double a = 2.0 * std::numbers::pi * u2;
        out[2 * k] = r * std::cos(a);
        if (2 * k + 1 < out.size()) out[2 * k + 1] = r * std::sin(a);
    }
}

void check_config(const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be > 0");
    if (!(cfg.tau >= 0.0) || !std::isfinite(cfg.tau)) throw std::invalid_argument("tau must be >= 0");
    if (!std::isfinite(cfg.t0)) throw std::invalid_argument("t0 must be finite");
}

template <class Sys>
IntegrationResult finish(const detail::RunResult<Sys>& run, double h, double t0, double sign,
                         std::size_t planned, double tau) {
    IntegrationResult out;
    out.elapsed = run.steps == planned ? tau : std::abs(h) * static_cast<double>(run.steps);
    out.final_state = from_flat<Sys>(run.state, t0 + sign * out.elapsed);
    out.reason = run.reason;
    out.escaped = run.reason != StopReason::completed;
    out.accumulated = run.action;
    return out;
}

}  // namespace

bool Box::contains(const PhaseState& x) const {
    std::vector<double> flat(x.q);
    flat.insert(flat.end(), x.p.begin(), x.p.end());
    if (flat.size() != lo.size()) throw std::invalid_argument("box dimension does not match state");
    return contains(flat.data());
}

void Box::validate(std::size_t expected_dim) const {
    if (lo.size() != expected_dim || hi.size() != expected_dim)
        throw std::invalid_argument("stop region must have " + std::to_string(expected_dim) +
                                    " lower and upper bounds");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw std::invalid_argument("stop region bounds must satisfy lo < hi");
}

Box Box::centered(std::size_t dim, double half_width) {
    return Box{std::vector<double>(dim, -half_width), std::vector<double>(dim, half_width)};
}

std::size_t step_count(double tau, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (tau <= 0.0) return 0;
    // Tolerate the rounding in tau/dt when tau is a multiple of dt.
    const double ratio = tau / dt;
    const double n = std::ceil(ratio - 1e-9 * std::max(1.0, ratio));
    return static_cast<std::size_t>(std::max(1.0, n));
}

IntegrationResult integrate_deterministic(const SystemSpec& sys, const PhaseState& x0,
                                          const IntegratorConfig& cfg, const StepObserver& observer) {
    validate(sys);
    check_config(cfg);
    x0.validate();
    if (x0.dof() != dof(sys)) throw std::invalid_argument("initial state has the wrong dimension");
    if (cfg.method != Method::rk4)
        throw std::invalid_argument("integrate_deterministic needs method = rk4");
    if (cfg.stop_region) cfg.stop_region->validate(2 * dof(sys));

    const std::size_t n = step_count(cfg.tau, cfg.dt);
    const double sign = cfg.direction == Direction::forward ? 1.0 : -1.0;
    const double h = n == 0 ? 0.0 : sign * cfg.tau / static_cast<double>(n);
    const Box* region = cfg.stop_region ? &*cfg.stop_region : nullptr;

    return std::visit(
        [&](const auto& s) {
            using Sys = std::decay_t<decltype(s)>;
            PhaseState scratch = x0;
            double t = cfg.t0;
            auto on_step = [&](const auto&, const auto& next, double step) {
                if (!observer) return;
                t += step;
                for (int i = 0; i < Sys::dof; ++i) {
                    scratch.q[i] = next[i];
                    scratch.p[i] = next[Sys::dof + i];
                }
                scratch.t = t;
                observer(scratch, step);
            };
            const auto run = detail::run_rk4(s, to_flat<Sys>(x0), h, n, region, on_step);
            return finish<Sys>(run, h, cfg.t0, sign, n, cfg.tau);
        },
        sys);
}

WienerPath sample_wiener_path(std::uint64_t seed, double dt, double tau_f, double tau_b) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    WienerPath path;
    path.seed = seed;
    path.dt = dt;
    path.increments_forward.resize(step_count(tau_f, dt));
    path.increments_backward.resize(step_count(tau_b, dt));
    const double scale = std::sqrt(dt);
    fill_gaussian(splitmix64(seed ^ 0x66776421ULL), scale, path.increments_forward);
    fill_gaussian(splitmix64(seed ^ 0x62776421ULL), scale, path.increments_backward);
    return path;
}

std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t point_index,
                          std::uint64_t realization) {
    return splitmix64(splitmix64(splitmix64(global_seed) ^ point_index) ^ realization);
}

IntegrationResult integrate_stochastic_em(const Duffing& sys, const PhaseState& x0,
                                          const IntegratorConfig& cfg, const WienerPath& path,
                                          const StepObserver& observer, BackwardNoise backward_noise) {
    validate(SystemSpec{sys});
    check_config(cfg);
    x0.validate();
    if (x0.dof() != 1) throw std::invalid_argument("Duffing state must have one degree of freedom");
    if (cfg.method != Method::euler_maruyama)
        throw std::invalid_argument("integrate_stochastic_em needs method = euler_maruyama");
    if (std::abs(path.dt - cfg.dt) > 1e-12 * cfg.dt)
        throw std::invalid_argument("Wiener path step differs from the integrator step");
    if (cfg.stop_region) cfg.stop_region->validate(2);

    const std::size_t n = step_count(cfg.tau, cfg.dt);
    if (n > 0 && std::abs(cfg.tau / static_cast<double>(n) - cfg.dt) > 1e-9 * cfg.dt)
        throw std::invalid_argument("Euler–Maruyama needs tau to be a multiple of dt");
    const bool forward = cfg.direction == Direction::forward;
    const bool reflect = !forward && backward_noise == BackwardNoise::reflected;
    const auto& branch = (forward || reflect) ? path.increments_forward : path.increments_backward;
    if (branch.size() < n) throw std::invalid_argument("Wiener path has too few increments");

    const double sign = forward ? 1.0 : -1.0;
    PhaseState scratch = x0;
    double t = cfg.t0;
    auto on_step = [&](const auto&, const Duffing::State& next, double step) {
        if (!observer) return;
        t += step;
        scratch.q[0] = next[0];
        scratch.p[0] = next[1];
        scratch.t = t;
        observer(scratch, step);
    };
    const auto run = detail::run_em(sys, to_flat<Duffing>(x0), cfg.dt, sign,
                                    std::span<const double>(branch.data(), n), reflect ? -1.0 : 1.0,
                                    cfg.stop_region ? &*cfg.stop_region : nullptr, on_step);
    return finish<Duffing>(run, cfg.dt, cfg.t0, sign, n, cfg.tau);
}

}  // namespace ldaction
