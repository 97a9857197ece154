#include "ldaction/ld.hpp"

#include "ldaction/detail/kernels.hpp"
#include "ld_point.hpp"

#include <cmath>
#include <stdexcept>

namespace ldaction {

void LDParams::validate(const SystemSpec& sys) const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(tau_f) || !finite_nonneg(tau_b))
        throw std::invalid_argument("tau_f and tau_b must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (!std::isfinite(t0)) throw std::invalid_argument("t0 must be finite");
    if (mode == LDMode::variable) {
        if (!stop_region) throw std::invalid_argument("variable mode needs a stop region");
        stop_region->validate(2 * dof(sys));
    } else if (stop_region) {
        stop_region->validate(2 * dof(sys));
    }
    const bool duffing = std::holds_alternative<Duffing>(sys);
    if (method == Method::euler_maruyama && !duffing)
        throw std::invalid_argument("Euler–Maruyama is only available for the Duffing system");
    if (ensemble) {
        if (!duffing) throw std::invalid_argument("ensembles need a stochastic system");
        if (ensemble->n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    }
    if (method == Method::euler_maruyama) {
        for (double tau : {tau_f, tau_b}) {
            const std::size_t n = step_count(tau, dt);
            if (n > 0 && std::abs(tau / static_cast<double>(n) - dt) > 1e-9 * dt)
                throw std::invalid_argument("Euler–Maruyama needs tau to be a multiple of dt");
        }
    }
}

namespace detail {

namespace {

template <class Sys>
void run_branch(const Sys& sys, const PhaseState& x0, double tau, double dt, double sign,
                const Box* region, double t0, double& action, double& elapsed, bool& escaped,
                PhaseState& end) {
    const std::size_t n = step_count(tau, dt);
    const double h = n == 0 ? 0.0 : sign * tau / static_cast<double>(n);
    const auto run = run_rk4(sys, to_flat<Sys>(x0), h, n, region, NoOp{});
    action = run.action;
    elapsed = run.steps == n ? tau : std::abs(h) * static_cast<double>(run.steps);
    escaped = escaped || run.reason == StopReason::diverged;
    end = from_flat<Sys>(run.state, t0 + sign * elapsed);
}

void run_em_branch(const Duffing& sys, const PhaseState& x0, double tau, double dt, double sign,
                   std::span<const double> dW, double noise_sign, const Box* region, double t0,
                   double& action, double& elapsed, bool& escaped, PhaseState& end) {
    const std::size_t n = step_count(tau, dt);
    if (dW.size() < n) throw std::invalid_argument("Wiener path has too few increments");
    const auto run = run_em(sys, to_flat<Duffing>(x0), dt, sign, dW.first(n), noise_sign, region, NoOp{});
    action = run.action;
    elapsed = run.steps == n ? tau : dt * static_cast<double>(run.steps);
    escaped = escaped || run.reason == StopReason::diverged;
    end = from_flat<Duffing>(run.state, t0 + sign * elapsed);
}

}  // namespace

LDValue evaluate_point(const SystemSpec& sys, const PhaseState& x0, const LDParams& params,
                       const WienerPath* path) {
    LDValue v;
    const Box* region = params.mode == LDMode::variable ? &*params.stop_region : nullptr;
    if (params.method == Method::euler_maruyama) {
        const auto& duffing = std::get<Duffing>(sys);
        std::span<const double> fw, bw;
        std::vector<double> zeros;
        double backward_sign = 1.0;
        if (path) {
            fw = path->increments_forward;
            if (params.backward_noise == BackwardNoise::reflected) {
                bw = path->increments_forward;
                backward_sign = -1.0;
            } else {
                bw = path->increments_backward;
            }
        } else {
            zeros.assign(std::max(step_count(params.tau_f, params.dt), step_count(params.tau_b, params.dt)), 0.0);
            fw = bw = zeros;
        }
        run_em_branch(duffing, x0, params.tau_f, params.dt, 1.0, fw, 1.0, region, params.t0,
                      v.forward, v.elapsed_f, v.escaped, v.end_forward);
        run_em_branch(duffing, x0, params.tau_b, params.dt, -1.0, bw, backward_sign, region, params.t0,
                      v.backward, v.elapsed_b, v.escaped, v.end_backward);
    } else {
        std::visit(
            [&](const auto& s) {
                run_branch(s, x0, params.tau_f, params.dt, 1.0, region, params.t0, v.forward,
                           v.elapsed_f, v.escaped, v.end_forward);
                run_branch(s, x0, params.tau_b, params.dt, -1.0, region, params.t0, v.backward,
                           v.elapsed_b, v.escaped, v.end_backward);
            },
            sys);
    }
    v.total = v.forward + v.backward;
    return v;
}

}  // namespace detail

namespace {

void check_inputs(const SystemSpec& sys, const PhaseState& x0, const LDParams& params) {
    validate(sys);
    params.validate(sys);
    x0.validate();
    if (x0.dof() != dof(sys)) throw std::invalid_argument("initial state has the wrong dimension");
}

}  // namespace

LDValue ld_total(const SystemSpec& sys, const PhaseState& x0, const LDParams& params) {
    check_inputs(sys, x0, params);
    return detail::evaluate_point(sys, x0, params, nullptr);
}

double ld_forward(const SystemSpec& sys, const PhaseState& x0, const LDParams& params) {
    LDParams p = params;
    p.tau_b = 0.0;
    return ld_total(sys, x0, p).forward;
}

double ld_backward(const SystemSpec& sys, const PhaseState& x0, const LDParams& params) {
    LDParams p = params;
    p.tau_f = 0.0;
    return ld_total(sys, x0, p).backward;
}

double ld_time_average(const SystemSpec& sys, const PhaseState& x0, const LDParams& params) {
    if (params.mode != LDMode::fixed) throw std::invalid_argument("time averages need fixed mode");
    const double span = params.tau_f + params.tau_b;
    if (!(params.tau_f > 0.0)) throw std::invalid_argument("time averages need tau_f > 0");
    const LDValue v = ld_total(sys, x0, params);
    return params.tau_b == 0.0 ? v.forward / params.tau_f : v.total / span;
}

LDValue ld_stochastic(const Duffing& sys, const PhaseState& x0, const LDParams& params,
                      const WienerPath& path) {
    const SystemSpec spec{sys};
    check_inputs(spec, x0, params);
    if (params.method != Method::euler_maruyama)
        throw std::invalid_argument("stochastic descriptors need method = euler_maruyama");
    if (std::abs(path.dt - params.dt) > 1e-12 * params.dt)
        throw std::invalid_argument("Wiener path step differs from dt");
    return detail::evaluate_point(spec, x0, params, &path);
}

std::vector<double> ld_forward_series(const SystemSpec& sys, const PhaseState& x0,
                                      std::span<const double> taus, double dt) {
    validate(sys);
    x0.validate();
    if (x0.dof() != dof(sys)) throw std::invalid_argument("initial state has the wrong dimension");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    std::vector<double> out;
    out.reserve(taus.size());
    std::visit(
        [&](const auto& s) {
            using Sys = std::decay_t<decltype(s)>;
            auto x = to_flat<Sys>(x0);
            double t = 0.0;
            double action = 0.0;
            for (double tau : taus) {
                if (!(tau >= t)) throw std::invalid_argument("sample times must be increasing and >= 0");
                const std::size_t n = step_count(tau - t, dt);
                if (n > 0) {
                    const auto run = detail::run_rk4(s, x, (tau - t) / static_cast<double>(n), n,
                                                     nullptr, detail::NoOp{});
                    if (run.reason == StopReason::diverged)
                        throw std::runtime_error("trajectory diverged while sampling the action");
                    action += run.action;
                    x = run.state;
                }
                t = tau;
                out.push_back(action);
            }
        },
        sys);
    return out;
}

FieldTriplet time_average(const FieldTriplet& fields, const LDParams& params) {
    if (!(params.tau_f > 0.0)) throw std::invalid_argument("time averages need tau_f > 0");
    FieldTriplet out = fields;
    const double span = params.tau_f + params.tau_b;
    for (std::size_t k = 0; k < out.total.size(); ++k) {
        out.forward.values[k] /= params.tau_f;
        double& b = out.backward.values[k];
        if (params.tau_b > 0.0) b /= params.tau_b;
        else if (!std::isnan(b)) b = 0.0;
        out.total.values[k] /= span;
    }
    return out;
}

}  // namespace ldaction
