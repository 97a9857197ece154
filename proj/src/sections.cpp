#include "ldaction/sections.hpp"

#include "ldaction/detail/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldaction {

void SectionSpec::validate(const SystemSpec& sys) const {
    axis1.validate();
    axis2.validate();
    const std::size_t n = dof(sys);
    if (fixed_dof >= n) throw std::invalid_argument("fixed_dof out of range for this system");
    if (!std::isfinite(fixed_value) || !std::isfinite(energy))
        throw std::invalid_argument("section values must be finite");
    if (kind == SectionKind::full_plane && n != 1)
        throw std::invalid_argument("full-plane sections need a one-DoF system");
    if (kind == SectionKind::energy_section && !std::holds_alternative<ProtonTransfer>(sys))
        throw std::invalid_argument("energy sections need the two-DoF proton-transfer system");
}

SectionGrid build_grid(const SectionSpec& spec) {
    spec.axis1.validate();
    spec.axis2.validate();
    SectionGrid g{spec.axis1, spec.axis2, {}};
    g.points.reserve(spec.axis1.count * spec.axis2.count);
    for (std::size_t j = 0; j < spec.axis2.count; ++j)
        for (std::size_t i = 0; i < spec.axis1.count; ++i)
            g.points.push_back({spec.axis1.at(i), spec.axis2.at(j)});
    return g;
}

std::optional<PhaseState> lift_to_energy_surface(const SystemSpec& sys, const SectionSpec& spec,
                                                 const std::array<double, 2>& point) {
    if (spec.kind == SectionKind::full_plane) return PhaseState({point[0]}, {point[1]});

    const auto& pt = std::get<ProtonTransfer>(sys);
    const std::size_t k = spec.fixed_dof;
    const std::size_t j = 1 - k;
    PhaseState x({0.0, 0.0}, {0.0, 0.0});
    x.q[k] = spec.fixed_value;
    x.q[j] = point[0];
    x.p[j] = point[1];
    const double slack = 2.0 * pt.m * (spec.energy - pt.potential(x.q.data()) - pt.kinetic(x.p.data()));
    if (!(slack >= 0.0)) return std::nullopt;
    x.p[k] = std::sqrt(slack);
    return x;
}

GridStates lift_grid(const SystemSpec& sys, const SectionSpec& spec) {
    validate(sys);
    spec.validate(sys);
    const SectionGrid g = build_grid(spec);
    GridStates out{spec.axis1, spec.axis2, {}, {}};
    out.states.resize(g.points.size());
    out.feasible.resize(g.points.size(), 0);
    for (std::size_t k = 0; k < g.points.size(); ++k) {
        if (auto x = lift_to_energy_surface(sys, spec, g.points[k])) {
            out.states[k] = std::move(*x);
            out.feasible[k] = 1;
        }
    }
    return out;
}

std::array<double, 2> section_coordinates(const SectionSpec& spec, const PhaseState& x) {
    const std::size_t j = spec.plotted_dof(x.dof());
    return {x.q[j], x.p[j]};
}

namespace {

template <class Sys>
struct CrossingFinder {
    using State = typename Sys::State;
    static constexpr int n = Sys::dof;

    const Sys& sys;
    const SectionSpec& spec;
    const PoincareOptions& opt;

    double offset(const State& x) const { return x[spec.fixed_dof] - spec.fixed_value; }

    bool brackets(double sa, double sb) const {
        switch (spec.direction) {
            case CrossingDirection::positive: return sa < 0.0 && sb >= 0.0;
            case CrossingDirection::negative: return sa > 0.0 && sb <= 0.0;
            case CrossingDirection::both: return (sa < 0.0 && sb >= 0.0) || (sa > 0.0 && sb <= 0.0);
        }
        return false;
    }

    bool momentum_ok(const State& x) const {
        const double pk = x[n + spec.fixed_dof];
        switch (spec.direction) {
            case CrossingDirection::positive: return pk >= 0.0;
            case CrossingDirection::negative: return pk <= 0.0;
            case CrossingDirection::both: return true;
        }
        return true;
    }

    // Offset of the fixed coordinate along the cubic Hermite interpolant of
    // the step [xa, xb] at fraction theta.
    static double hermite(double ya, double yb, double da, double db, double h, double theta) {
        const double t2 = theta * theta, t3 = t2 * theta;
        return (2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + theta) * h * da + (-2 * t3 + 3 * t2) * yb +
               (t3 - t2) * h * db;
    }

    Crossing refine(const State& xa, const State& xb, double ta, double h) const {
        const std::size_t k = spec.fixed_dof;
        const double da = sys.rhs(xa)[k];
        const double db = sys.rhs(xb)[k];
        const double sa = offset(xa), sb = offset(xb);
        double lo = 0.0, hi = 1.0;
        const bool rising = sa < sb;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double s = hermite(sa, sb, da, db, h, mid);
            if ((s < 0.0) == rising) lo = mid;
            else hi = mid;
        }
        double sub = 0.5 * (lo + hi) * h;
        State xc = detail::rk4_step(sys, xa, sub);
        for (int it = 0; it < 20 && std::abs(offset(xc)) >= 0.1 * opt.tolerance; ++it) {
            const double rate = sys.rhs(xc)[k];
            if (rate == 0.0) break;
            sub -= offset(xc) / rate;
            xc = detail::rk4_step(sys, xa, sub);
        }
        Crossing c;
        c.time = ta + sub;
        c.state = from_flat<Sys>(xc, c.time);
        c.point = section_coordinates(spec, c.state);
        return c;
    }

    CrossingSet run(const State& x0) const {
        CrossingSet out;
        const std::size_t steps = step_count(opt.t_max, opt.dt);
        const double h = steps == 0 ? 0.0 : opt.t_max / static_cast<double>(steps);
        State x = x0;
        double sa = offset(x);
        for (std::size_t s = 0; s < steps && out.size() < opt.max_crossings; ++s) {
            const State next = detail::rk4_step(sys, x, h);
            if (detail::diverged(next)) {
                out.escaped = true;
                break;
            }
            const double sb = offset(next);
            const double ta = h * static_cast<double>(s);
            if (sa == 0.0 && sb == 0.0 && sys.rhs(x)[spec.fixed_dof] == 0.0) {
                Crossing c;
                c.time = ta;
                c.state = from_flat<Sys>(x, ta);
                c.point = section_coordinates(spec, c.state);
                out.crossings.push_back(std::move(c));
                out.stationary = true;
                break;
            }
            if (brackets(sa, sb)) {
                Crossing c = refine(x, next, ta, h);
                if (momentum_ok(to_flat<Sys>(c.state))) out.crossings.push_back(std::move(c));
            }
            x = next;
            sa = sb;
        }
        return out;
    }
};

}  // namespace

CrossingSet poincare_map(const SystemSpec& sys, const PhaseState& x0, const SectionSpec& spec,
                         const PoincareOptions& options) {
    validate(sys);
    x0.validate();
    if (x0.dof() != dof(sys)) throw std::invalid_argument("initial state has the wrong dimension");
    if (spec.fixed_dof >= dof(sys)) throw std::invalid_argument("fixed_dof out of range for this system");
    if (!(options.dt > 0.0) || !(options.t_max >= 0.0))
        throw std::invalid_argument("poincare_map needs dt > 0 and t_max >= 0");
    return std::visit(
        [&](const auto& s) {
            using Sys = std::decay_t<decltype(s)>;
            return CrossingFinder<Sys>{s, spec, options}.run(to_flat<Sys>(x0));
        },
        sys);
}

std::vector<CrossingSet> poincare_ensemble(const SystemSpec& sys, const std::vector<PhaseState>& seeds,
                                           const SectionSpec& spec, const PoincareOptions& options,
                                           int workers) {
    validate(sys);
    for (const auto& x : seeds) {
        x.validate();
        if (x.dof() != dof(sys)) throw std::invalid_argument("seed has the wrong dimension");
    }
    std::vector<CrossingSet> out(seeds.size());
    const auto n = static_cast<std::ptrdiff_t>(seeds.size());
#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
    const int threads = 1;
    (void)workers;
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)] = poincare_map(sys, seeds[static_cast<std::size_t>(k)], spec, options);
    return out;
}

std::vector<PhaseState> sample_section(const SystemSpec& sys, const SectionSpec& spec,
                                       std::size_t count, std::uint64_t seed) {
    const GridStates grid = lift_grid(sys, spec);
    std::vector<std::size_t> feasible;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid.feasible[k]) feasible.push_back(k);
    count = std::min(count, feasible.size());
    // Partial Fisher–Yates with an explicit uniform map so the draw does not
    // depend on the standard library's distribution implementations.
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t span = feasible.size() - i;
        const std::size_t pick = i + static_cast<std::size_t>((gen() >> 11) * 0x1.0p-53 * static_cast<double>(span));
        std::swap(feasible[i], feasible[std::min(pick, feasible.size() - 1)]);
    }
    feasible.resize(count);
    std::sort(feasible.begin(), feasible.end());
    std::vector<PhaseState> out;
    out.reserve(count);
    for (std::size_t k : feasible) out.push_back(grid.states[k]);
    return out;
}

}  // namespace ldaction
