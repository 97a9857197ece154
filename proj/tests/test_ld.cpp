#include "ldaction/analysis.hpp"
#include "ldaction/ld.hpp"
#include "ldaction/sections.hpp"

#include <doctest.h>

#include <atomic>
#include <cstring>
#include <cmath>

using namespace ldaction;

namespace {

constexpr double kSfUnitMomentum = 1.4067151019617547;
constexpr double kSinh2 = 3.6268604078470188;

LDParams fixed(double tau_f, double tau_b, double dt = 1e-3) {
    LDParams p;
    p.tau_f = tau_f;
    p.tau_b = tau_b;
    p.dt = dt;
    return p;
}

GridStates plane(AxisRange x, AxisRange y) {
    SectionSpec s;
    s.axis1 = x;
    s.axis2 = y;
    return lift_grid(Saddle{}, s);
}

bool same_bits(const ScalarField& a, const ScalarField& b) {
    if (a.values.size() != b.values.size() || a.mask != b.mask) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::memcmp(&a.values[k], &b.values[k], sizeof(double)) != 0) return false;
    return true;
}

bool same_bits(const FieldTriplet& a, const FieldTriplet& b) {
    return same_bits(a.forward, b.forward) && same_bits(a.backward, b.backward) && same_bits(a.total, b.total);
}

}  // namespace

TEST_SUITE("ld") {

TEST_CASE("parameter validation") {
    LDParams p = fixed(1.0, 1.0);
    CHECK_NOTHROW(p.validate(Saddle{}));
    p.mode = LDMode::variable;
    CHECK_THROWS_AS(p.validate(Saddle{}), std::invalid_argument);
    p.stop_region = Box::centered(4, 8.0);
    CHECK_THROWS_AS(p.validate(Saddle{}), std::invalid_argument);
    CHECK_NOTHROW(p.validate(ProtonTransfer{}));

    LDParams q = fixed(1.0, 1.0);
    q.method = Method::euler_maruyama;
    CHECK_THROWS_AS(q.validate(Harmonic{}), std::invalid_argument);
    CHECK_NOTHROW(q.validate(Duffing{}));
    q.dt = 0.3;
    CHECK_THROWS_AS(q.validate(Duffing{}), std::invalid_argument);

    LDParams e = fixed(1.0, 1.0);
    e.ensemble = Ensemble{0, 1};
    CHECK_THROWS_AS(e.validate(Duffing{}), std::invalid_argument);
    e.ensemble = Ensemble{3, 1};
    CHECK_THROWS_AS(e.validate(Saddle{}), std::invalid_argument);
    CHECK_NOTHROW(e.validate(Duffing{}));

    CHECK_THROWS_AS(fixed(-1.0, 0.0).validate(Saddle{}), std::invalid_argument);
    CHECK_THROWS_AS(fixed(1.0, 0.0, 0.0).validate(Saddle{}), std::invalid_argument);
}

TEST_CASE("forward descriptor examples") {
    CHECK(ld_forward(Saddle{1.0}, PhaseState({0.0}, {1.0}), fixed(1.0, 0.0, 1e-4)) ==
          doctest::Approx(kSfUnitMomentum).epsilon(1e-7));
    CHECK(ld_forward(ProtonTransfer{}, PhaseState({0.0, 0.0}, {0.0, 0.0}), fixed(50.0, 0.0)) == 0.0);
    CHECK(std::abs(ld_forward(Harmonic{1.0, 1.0}, PhaseState({1.0}, {0.0}), fixed(M_PI, 0.0)) - 0.5 * M_PI) < 1e-7);
}

TEST_CASE("backward descriptor examples") {
    CHECK(ld_backward(Saddle{1.0}, PhaseState({1.0}, {1.0}), fixed(0.0, 20.0)) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(ld_backward(ProtonTransfer{}, PhaseState({0.25, -std::sqrt(0.5)}, {0.0, 0.0}), fixed(0.0, 30.0)) <
          1e-20);
}

TEST_CASE("saddle backward action is the forward action at reflected momentum") {
    // S_b(q, p) = S_f(q, -p); the (q, p) swap does not hold.
    const Saddle s{1.0};
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double q = -1.0 + 2.0 * i / 9.0, p = -1.0 + 2.0 * j / 9.0;
            const double b = ld_backward(s, PhaseState({q}, {p}), fixed(0.0, 2.0));
            const double f = ld_forward(s, PhaseState({q}, {-p}), fixed(2.0, 0.0));
            CHECK(b == doctest::Approx(f).epsilon(1e-13));
        }
    }
    const double b = ld_backward(s, PhaseState({0.3}, {-0.7}), fixed(0.0, 2.0));
    const double swapped = ld_forward(s, PhaseState({-0.7}, {0.3}), fixed(2.0, 0.0));
    CHECK(std::abs(b - swapped) > 1.0);
}

TEST_CASE("proton-transfer time reversal") {
    const ProtonTransfer pt{};
    for (auto [q, p] : {std::pair{std::vector{0.0, 0.1}, std::vector{0.3, -0.2}},
                        std::pair{std::vector{0.1, -0.4}, std::vector{0.05, 0.15}}}) {
        const LDValue a = ld_total(pt, PhaseState(q, p), fixed(10.0, 10.0));
        const LDValue b = ld_total(pt, PhaseState(q, {-p[0], -p[1]}), fixed(10.0, 10.0));
        CHECK(a.backward == doctest::Approx(b.forward).epsilon(1e-12));
        CHECK(a.forward == doctest::Approx(b.backward).epsilon(1e-12));
    }
}

TEST_CASE("total descriptor") {
    const LDValue v = ld_total(Saddle{1.0}, PhaseState({1.0}, {1.0}), fixed(1.0, 1.0, 1e-4));
    CHECK(v.total == doctest::Approx(kSinh2).epsilon(1e-7));
    CHECK(v.total == doctest::Approx(saddle_total_ld_closed_form(1.0, 1.0, 1.0, 1.0)).epsilon(1e-7));
    CHECK(v.total == v.forward + v.backward);
    CHECK(v.elapsed_f == 1.0);
    CHECK(v.elapsed_b == 1.0);
    CHECK(v.end_forward.t == 1.0);
    CHECK(v.end_backward.t == -1.0);
    CHECK(ld_total(Duffing{}, PhaseState({1.0}, {0.0}), fixed(5.0, 5.0)).total == 0.0);
}

TEST_CASE("time averages") {
    const double avg = ld_time_average(Harmonic{1.0, 1.0}, PhaseState({1.0}, {0.0}), fixed(750.0, 0.0));
    CHECK(std::abs(avg - 0.5) <= 0.5 / (2.0 * 750.0));
    CHECK(ld_time_average(Saddle{}, PhaseState({0.0}, {0.0}), fixed(10.0, 10.0)) == 0.0);

    const PhaseState off({0.5}, {0.2});
    const double a4 = ld_time_average(Saddle{}, off, fixed(4.0, 4.0));
    const double a5 = ld_time_average(Saddle{}, off, fixed(5.0, 5.0));
    CHECK(a5 / a4 > M_E);

    LDParams var = fixed(1.0, 1.0);
    var.mode = LDMode::variable;
    var.stop_region = Box::centered(2, 8.0);
    CHECK_THROWS_AS(ld_time_average(Saddle{}, off, var), std::invalid_argument);
    CHECK_THROWS_AS(ld_time_average(Saddle{}, off, fixed(0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("additivity in tau") {
    const SystemSpec systems[] = {Saddle{}, Harmonic{1.0, 1.3}, ProtonTransfer{}, Duffing{}};
    const PhaseState starts[] = {PhaseState({0.3}, {-0.2}), PhaseState({0.5}, {0.1}),
                                 PhaseState({0.05, 0.3}, {0.2, -0.1}), PhaseState({0.4}, {0.3})};
    for (std::size_t k = 0; k < 4; ++k) {
        const LDValue whole = ld_total(systems[k], starts[k], fixed(3.0, 0.0));
        const LDValue first = ld_total(systems[k], starts[k], fixed(1.0, 0.0));
        const double rest = ld_forward(systems[k], first.end_forward, fixed(2.0, 0.0));
        CHECK(std::abs(whole.forward - (first.forward + rest)) < 1e-8);
    }
}

TEST_CASE("trapezoid error is second order") {
    const double exact = saddle_forward_ld_closed_form(1.0, 0.3, -0.7, 3.0);
    auto err = [&](double dt) { return std::abs(ld_forward(Saddle{}, PhaseState({0.3}, {-0.7}), fixed(3.0, 0.0, dt)) - exact); };
    const double ratio = err(0.02) / err(0.01);
    CHECK(ratio > 3.8);
    CHECK(ratio < 4.2);
}

TEST_CASE("forward series matches independent runs") {
    const std::vector<double> taus{0.0, 0.5, 1.25, 3.0};
    const auto s = ld_forward_series(Harmonic{}, PhaseState({1.0}, {0.0}), taus, 1e-3);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == 0.0);
    for (std::size_t k = 1; k < 4; ++k) {
        CHECK(s[k] == doctest::Approx(ld_forward(Harmonic{}, PhaseState({1.0}, {0.0}), fixed(taus[k], 0.0))).epsilon(1e-11));
        CHECK(s[k] == doctest::Approx(harmonic_forward_ld_closed_form(1.0, 1.0, 0.5, taus[k])).epsilon(1e-6));
    }
    const std::vector<double> bad{1.0, 0.5};
    CHECK_THROWS_AS(ld_forward_series(Harmonic{}, PhaseState({1.0}, {0.0}), bad, 1e-3), std::invalid_argument);
}

TEST_CASE("saddle field against the closed forms") {
    const GridStates grid = plane({-1.0, 1.0, 21}, {-1.0, 1.0, 21});
    const FieldTriplet f = ld_field(Saddle{}, grid, fixed(6.0, 6.0));
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double q = grid.states[k].q[0], p = grid.states[k].p[0];
        const double ef = saddle_forward_ld_closed_form(1.0, q, p, 6.0);
        const double et = saddle_total_ld_closed_form(1.0, q, p, 6.0);
        const double eb = saddle_forward_ld_closed_form(1.0, q, -p, 6.0);
        if (ef > 0) worst = std::max(worst, std::abs(f.forward.values[k] - ef) / ef);
        if (eb > 0) worst = std::max(worst, std::abs(f.backward.values[k] - eb) / eb);
        if (et > 0) worst = std::max(worst, std::abs(f.total.values[k] - et) / et);
        CHECK(f.forward.values[k] >= 0.0);
        CHECK(f.backward.values[k] >= 0.0);
        CHECK(f.total.values[k] == f.forward.values[k] + f.backward.values[k]);
    }
    CHECK(worst < 1e-6);
    CHECK(f.total.valid_count() == grid.size());
}

TEST_CASE("single feasible cell reduces to the point descriptor") {
    GridStates g{{0.0, 1.0, 2}, {0.0, 1.0, 2}, std::vector<PhaseState>(4), {0, 0, 0, 1}};
    g.states[3] = PhaseState({0.3}, {0.2});
    const FieldTriplet f = ld_field(Saddle{}, g, fixed(2.0, 2.0));
    const LDValue v = ld_total(Saddle{}, g.states[3], fixed(2.0, 2.0));
    CHECK(f.total.values[3] == v.total);
    CHECK(f.forward.values[3] == v.forward);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::isnan(f.total.values[k]));
        CHECK(f.total.mask[k] == 0);
    }
}

TEST_CASE("variable-time forward minimum follows the stable manifold") {
    LDParams p = fixed(8.0, 8.0, 1e-2);
    p.mode = LDMode::variable;
    p.stop_region = Box::centered(2, 8.0);
    const AxisRange axis{-4.0, 4.0, 81};
    const GridStates grid = plane(axis, axis);
    const FieldTriplet f = ld_field(Saddle{}, grid, p);
    for (std::size_t j = 0; j < axis.count; ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < axis.count; ++i)
            if (f.forward(i, j) < f.forward(best, j)) best = i;
        const double p0 = axis.at(j);
        CHECK(std::abs(axis.at(best) + p0) <= axis.spacing() * (1 + 1e-9));
    }
}

TEST_CASE("escaped cells keep their partial sums and are masked") {
    const GridStates grid = plane({-1.0, 1.0, 5}, {-1.0, 1.0, 5});
    const FieldTriplet f = ld_field(Saddle{}, grid, fixed(30.0, 0.0, 1e-2));
    const std::size_t origin = grid.x_axis.count * 2 + 2;
    CHECK(f.forward.mask[origin] == 1);
    std::size_t masked = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (f.forward.mask[k]) continue;
        ++masked;
        CHECK(std::isfinite(f.forward.values[k]));
        CHECK(f.forward.values[k] > 0.0);
    }
    CHECK(masked > 0);
}

TEST_CASE("point hook sees every feasible cell once") {
    GridStates g = plane({-1.0, 1.0, 6}, {-1.0, 1.0, 5});
    g.feasible[4] = 0;
    std::vector<std::atomic<int>> seen(g.size());
    ld_field(Saddle{}, g, fixed(1.0, 1.0, 1e-2), 3, [&](std::size_t k, const LDValue& v) {
        seen[k]++;
        CHECK(v.total >= 0.0);
    });
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(seen[k] == (k == 4 ? 0 : 1));
}

TEST_CASE("parallel and serial fields agree bit for bit") {
    const GridStates grid = plane({-1.5, 1.5, 17}, {-1.0, 1.0, 13});
    const FieldTriplet ref = ld_field_serial(Saddle{1.3}, grid, fixed(3.0, 2.0));
    for (int workers : {1, 2, 3, 5}) CHECK(same_bits(ld_field(Saddle{1.3}, grid, fixed(3.0, 2.0), workers), ref));

    LDParams sp = fixed(2.0, 2.0, 0.005);
    sp.ensemble = Ensemble{3, 99};
    const Duffing duffing{0.1};
    GridStates dg = grid;
    const FieldTriplet sref = stochastic_ld_field_serial(duffing, dg, sp);
    for (int workers : {1, 2, 4}) CHECK(same_bits(stochastic_ld_field(duffing, dg, sp, workers), sref));
}

TEST_CASE("noise-free ensemble reproduces the Euler-Maruyama drift field") {
    const AxisRange x{-1.7, 1.7, 15}, y{-0.9, 0.9, 11};
    SectionSpec s;
    s.axis1 = x;
    s.axis2 = y;
    const GridStates grid = lift_grid(Duffing{}, s);
    LDParams det = fixed(3.0, 3.0, 0.005);
    det.method = Method::euler_maruyama;
    const FieldTriplet reference = ld_field(Duffing{0.0}, grid, det);
    LDParams st = det;
    st.ensemble = Ensemble{5, 1234};
    CHECK(same_bits(stochastic_ld_field(Duffing{0.0}, grid, st), reference));

    // Same drift under RK4 differs only by the scheme error.
    const FieldTriplet rk = ld_field(Duffing{0.0}, grid, fixed(3.0, 3.0, 0.005));
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(rk.total.values[k] - reference.total.values[k]) < 0.05 * (1.0 + rk.total.values[k]));
}

TEST_CASE("ensemble statistics") {
    const AxisRange x{-1.0, 1.0, 6}, y{-0.5, 0.5, 5};
    SectionSpec s;
    s.axis1 = x;
    s.axis2 = y;
    const GridStates grid = lift_grid(Duffing{}, s);
    LDParams st = fixed(2.0, 2.0, 0.005);
    st.ensemble = Ensemble{1, 77};
    const Duffing duffing{0.2};
    CHECK(same_bits(stochastic_ld_field(duffing, grid, st), stochastic_ld_realization(duffing, grid, st, 0)));

    st.ensemble = Ensemble{4, 77};
    std::vector<FieldTriplet> reals;
    for (std::size_t r = 0; r < 4; ++r) reals.push_back(stochastic_ld_realization(duffing, grid, st, r));
    const FieldTriplet mean = stochastic_ld_field(duffing, grid, st);
    std::vector<ScalarField> totals;
    for (const auto& r : reals) totals.push_back(r.total);
    CHECK(same_bits(average_fields(totals), mean.total));
    CHECK_FALSE(same_bits(reals[0].total, reals[1].total));

    // A realization is the point descriptor driven by the realization's path,
    // which every grid point shares.
    LDParams one = st;
    one.method = Method::euler_maruyama;
    CHECK(path_seed(*st.ensemble, 3, 2) == path_seed(*st.ensemble, 7, 2));
    CHECK(path_seed(*st.ensemble, 3, 2) != path_seed(*st.ensemble, 3, 1));
    const WienerPath path = sample_wiener_path(path_seed(*st.ensemble, 0, 2), st.dt, st.tau_f, st.tau_b);
    for (std::size_t k : {0u, 7u, 29u})
        CHECK(ld_stochastic(duffing, grid.states[k], one, path).total == reals[2].total.values[k]);
    CHECK_THROWS_AS(stochastic_ld_realization(duffing, grid, st, 4), std::invalid_argument);

    // Per-point noise draws one stream per (point, realization).
    LDParams pp = st;
    pp.ensemble->sharing = NoiseSharing::per_point;
    CHECK(path_seed(*pp.ensemble, 7, 2) == stream_seed(77, 7, 2));
    const FieldTriplet r2 = stochastic_ld_realization(duffing, grid, pp, 2);
    for (std::size_t k : {0u, 7u, 29u}) {
        const WienerPath own = sample_wiener_path(stream_seed(77, k, 2), st.dt, st.tau_f, st.tau_b);
        CHECK(ld_stochastic(duffing, grid.states[k], one, own).total == r2.total.values[k]);
    }
    CHECK(same_bits(stochastic_ld_field(duffing, grid, pp, 1), stochastic_ld_field_serial(duffing, grid, pp)));
    CHECK_FALSE(same_bits(stochastic_ld_field(duffing, grid, pp).total, mean.total));

    // Changing the seed changes the field.
    LDParams other = st;
    other.ensemble->seed = 78;
    CHECK_FALSE(same_bits(stochastic_ld_field(duffing, grid, other).total, mean.total));
}

TEST_CASE("time-average fields") {
    const GridStates grid = plane({-1.0, 1.0, 4}, {-1.0, 1.0, 3});
    const FieldTriplet f = ld_field(Saddle{}, grid, fixed(2.0, 3.0, 1e-2));
    const FieldTriplet a = time_average(f, fixed(2.0, 3.0, 1e-2));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(a.forward.values[k] == f.forward.values[k] / 2.0);
        CHECK(a.backward.values[k] == f.backward.values[k] / 3.0);
        CHECK(a.total.values[k] == f.total.values[k] / 5.0);
    }
}

}  // TEST_SUITE
