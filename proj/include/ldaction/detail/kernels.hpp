#pragma once

// Inner loops shared by the public steppers and the field kernels. Everything
// here works on the flat fixed-size state of a concrete system type so the
// vector field inlines into the step.

#include "ldaction/integrate.hpp"

#include <cmath>
#include <cstddef>
#include <span>

namespace ldaction::detail {

template <class Sys>
struct RunResult {
    typename Sys::State state{};
    std::size_t steps = 0;
    StopReason reason = StopReason::completed;
    double action = 0.0;
};

template <class State>
inline bool diverged(const State& x) {
    for (double v : x)
        if (!(std::abs(v) <= kDivergenceThreshold)) return true;  // also catches NaN
    return false;
}

template <class Sys>
inline typename Sys::State rk4_step(const Sys& sys, const typename Sys::State& x, double h) {
    using State = typename Sys::State;
    constexpr std::size_t n = std::tuple_size_v<State>;
    const State k1 = sys.rhs(x);
    State y;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
    const State k2 = sys.rhs(y);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
    const State k3 = sys.rhs(y);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    const State k4 = sys.rhs(y);
    State out;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// `steps` RK4 steps of signed size h. The action rate is integrated with the
/// trapezoidal rule on the step nodes. on_step(prev, next, h) runs after each
/// accepted step; a step that diverges is rejected and ends the run, a step
/// that leaves `region` is accepted and ends the run.
template <class Sys, class OnStep>
RunResult<Sys> run_rk4(const Sys& sys, typename Sys::State x, double h, std::size_t steps,
                       const Box* region, OnStep&& on_step) {
    RunResult<Sys> r;
    const double w = 0.5 * std::abs(h);
    double rate = sys.action_rate(x);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto next = rk4_step(sys, x, h);
        if (diverged(next)) {
            r.reason = StopReason::diverged;
            break;
        }
        const double next_rate = sys.action_rate(next);
        r.action += w * (rate + next_rate);
        on_step(x, next, h);
        x = next;
        rate = next_rate;
        ++r.steps;
        if (region && !region->contains(x.data())) {
            r.reason = StopReason::left_region;
            break;
        }
    }
    r.state = x;
    return r;
}

/// Euler–Maruyama for Duffing. `sign` is +1 forward and -1 backward; the
/// noise term enters with the same sign in both directions. `noise_sign`
/// flips the increments for the reflected backward construction.
template <class OnStep>
RunResult<Duffing> run_em(const Duffing& sys, Duffing::State x, double h, double sign,
                          std::span<const double> dW, double noise_sign, const Box* region,
                          OnStep&& on_step) {
    RunResult<Duffing> r;
    const double hs = sign * h;
    double rate = x[1] * x[1];
    for (std::size_t k = 0; k < dW.size(); ++k) {
        const double drift_x = x[1];
        const double drift_y = x[0] - x[0] * x[0] * x[0];
        Duffing::State next{x[0] + drift_x * hs, x[1] + drift_y * hs + sys.sigma * (noise_sign * dW[k])};
        if (diverged(next)) {
            r.reason = StopReason::diverged;
            break;
        }
        const double next_rate = next[1] * next[1];
        r.action += 0.5 * h * (rate + next_rate);
        on_step(x, next, hs);
        x = next;
        rate = next_rate;
        ++r.steps;
        if (region && !region->contains(x.data())) {
            r.reason = StopReason::left_region;
            break;
        }
    }
    r.state = x;
    return r;
}

struct NoOp {
    template <class... A>
    void operator()(const A&...) const {}
};

}  // namespace ldaction::detail
