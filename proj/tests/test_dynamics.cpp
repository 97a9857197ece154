#include "ldaction/dynamics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>

using namespace ldaction;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Reference values below were evaluated with mpmath at 50 digits.
constexpr double kSinh1 = 1.1752011936438014;
constexpr double kCosh1 = 1.5430806348152437;
constexpr double kSfUnitMomentum = 1.4067151019617547;  // S_f(lambda=1, q=0, p=1, tau=1)
constexpr double kSinh2 = 3.6268604078470188;
constexpr double kG01 = 15.019998092701346;
constexpr double kG6Minus1 = 1.3519268294227793e-4;
constexpr double kG921Minus1 = 3.486373806635e-7;
constexpr double kFourLn10 = 9.210340371976183;

double quad_forward_action(double lambda, double q0, double p0, double tau) {
    auto rate = [&](double t) {
        const auto x = saddle_analytic_flow(lambda, q0, p0, t);
        return lambda * x.p * x.p;
    };
    return gauss_kronrod<double, 61>::integrate(rate, 0.0, tau, 15, 1e-14);
}

double quad_backward_action(double lambda, double q0, double p0, double tau) {
    auto rate = [&](double t) {
        const auto x = saddle_analytic_flow(lambda, q0, p0, -t);
        return lambda * x.p * x.p;
    };
    return gauss_kronrod<double, 61>::integrate(rate, 0.0, tau, 15, 1e-14);
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("phase state validation") {
    CHECK_NOTHROW(PhaseState({1.0}, {2.0}).validate());
    CHECK_THROWS_AS(PhaseState({1.0, 2.0}, {2.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(PhaseState({}, {}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(PhaseState({NAN}, {0.0}).validate(), std::invalid_argument);
    CHECK_FALSE(PhaseState({INFINITY}, {0.0}).is_finite());
}

TEST_CASE("system validation and dimensions") {
    CHECK_THROWS_AS(validate(Saddle{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Harmonic{-1.0, 1.0}), std::invalid_argument);
    ProtonTransfer bad;
    bad.barrier = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK_THROWS_AS(validate(Duffing{-0.1}), std::invalid_argument);
    CHECK_NOTHROW(validate(Duffing{0.0}));
    CHECK(dof(Saddle{}) == 1);
    CHECK(dof(Harmonic{}) == 1);
    CHECK(dof(Duffing{}) == 1);
    CHECK(dof(ProtonTransfer{}) == 2);
}

TEST_CASE("vector field examples") {
    CHECK(vector_field(Saddle{1.0}, PhaseState({0.0}, {0.0})) == std::vector<double>{0.0, 0.0});
    CHECK(vector_field(Saddle{1.0}, PhaseState({1.0}, {2.0})) == std::vector<double>{2.0, 1.0});
    CHECK(vector_field(Saddle{2.5}, PhaseState({1.0}, {2.0})) == std::vector<double>{5.0, 2.5});
    CHECK(vector_field(Duffing{0.3}, PhaseState({2.0}, {0.5})) == std::vector<double>{0.5, 2.0 - 8.0});
    CHECK_THROWS_AS(vector_field(ProtonTransfer{}, PhaseState({0.0}, {0.0})), std::invalid_argument);

    const ProtonTransfer pt{};
    const auto f = vector_field(pt, PhaseState({0.25, pt.y_well}, {0.0, 0.0}));
    for (double v : f) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("proton-transfer force is minus the potential gradient") {
    // Central differences of V against the analytic right-hand side.
    const ProtonTransfer pt{1.3, 0.4, 0.8, 1.7, 0.6};
    const SystemSpec sys{pt};
    for (auto [x, y] : {std::pair{0.1, -0.3}, {-0.4, 0.9}, {0.7, 0.2}}) {
        const auto f = vector_field(sys, PhaseState({x, y}, {0.3, -0.2}));
        const double h = 1e-5;
        const double dVdx = (potential_energy(sys, {x + h, y}) - potential_energy(sys, {x - h, y})) / (2 * h);
        const double dVdy = (potential_energy(sys, {x, y + h}) - potential_energy(sys, {x, y - h})) / (2 * h);
        CHECK(f[0] == doctest::Approx(0.3 / pt.m).epsilon(1e-14));
        CHECK(f[1] == doctest::Approx(-0.2 / pt.m).epsilon(1e-14));
        CHECK(f[2] == doctest::Approx(-dVdx).epsilon(1e-8));
        CHECK(f[3] == doctest::Approx(-dVdy).epsilon(1e-8));
    }
}

TEST_CASE("kinetic and total energy examples") {
    for (const SystemSpec& s : {SystemSpec{Saddle{}}, SystemSpec{Harmonic{}}, SystemSpec{Duffing{}}})
        CHECK(kinetic_energy(s, {0.0}) == 0.0);
    CHECK(kinetic_energy(ProtonTransfer{}, {0.0, 0.0}) == 0.0);
    CHECK(kinetic_energy(Harmonic{2.0, 1.0}, {2.0}) == 1.0);
    CHECK(kinetic_energy(Saddle{1.0}, {3.0}) == 4.5);

    CHECK(total_energy(Saddle{1.0}, PhaseState({1.0}, {1.0})) == 0.0);
    CHECK(total_energy(ProtonTransfer{}, PhaseState({0.0, 0.0}, {0.0, 0.0})) == 0.0);
    CHECK(std::abs(total_energy(Duffing{}, PhaseState({std::sqrt(2.0)}, {0.0}))) < 1e-15);
}

TEST_CASE("action rate is twice the kinetic energy") {
    const ProtonTransfer pt{2.0, 0.25, 0.7, 1.0, 0.5};
    const PhaseState x({0.1, 0.2}, {0.3, -0.4});
    CHECK(action_rate(pt, x) == doctest::Approx(2.0 * kinetic_energy(pt, x.p)));
    CHECK(action_rate(Saddle{1.5}, PhaseState({0.4}, {0.8})) == doctest::Approx(2.0 * kinetic_energy(Saddle{1.5}, {0.8})));
}

TEST_CASE("saddle analytic flow") {
    const auto a = saddle_analytic_flow(1.0, 1.0, -1.0, 10.0);
    CHECK(a.q == doctest::Approx(std::exp(-10.0)).epsilon(1e-9));
    CHECK(a.p == doctest::Approx(-std::exp(-10.0)).epsilon(1e-9));
    const auto z = saddle_analytic_flow(3.0, 0.0, 0.0, 5.0);
    CHECK(z.q == 0.0);
    CHECK(z.p == 0.0);
    const auto b = saddle_analytic_flow(1.0, 0.0, 1.0, 1.0);
    CHECK(b.q == doctest::Approx(kSinh1).epsilon(1e-15));
    CHECK(b.p == doctest::Approx(kCosh1).epsilon(1e-15));
    CHECK(saddle_analytic_flow(1.0, 1.0, 0.5, 1000.0).escaped);
    CHECK_FALSE(saddle_analytic_flow(1.0, 1.0, 0.5, -20.0).escaped);
}

TEST_CASE("energy along the analytic saddle flow") {
    // Relative to lambda (p^2 + q^2) / 2: H itself is a difference of two
    // terms of size e^{2 lambda |t|}, so relative-to-H is ill posed.
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (auto [q0, p0] : {std::pair{0.3, -0.7}, {1.0, 0.2}, {-0.6, -0.9}}) {
            const double h0 = 0.5 * lambda * (p0 * p0 - q0 * q0);
            for (double lt = -20.0; lt <= 20.0; lt += 2.5) {
                const auto x = saddle_analytic_flow(lambda, q0, p0, lt / lambda);
                const double h = 0.5 * lambda * (x.p * x.p - x.q * x.q);
                const double scale = 0.5 * lambda * (x.p * x.p + x.q * x.q);
                CHECK(std::abs(h - h0) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("saddle forward closed form") {
    CHECK(saddle_forward_ld_closed_form(1.0, 0.0, 0.0, 6.0) == 0.0);
    CHECK(saddle_forward_ld_closed_form(1.0, 1.0, -1.0, INFINITY) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(saddle_forward_ld_closed_form(1.0, 1.0, -1.0, 40.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(saddle_forward_ld_closed_form(1.0, 0.0, 1.0, 1.0) == doctest::Approx(kSfUnitMomentum).epsilon(1e-15));
    CHECK(saddle_forward_ld_closed_form(1.0, 0.3, 0.4, 500.0) == kEscapedValue);

    // Independent quadrature of lambda p(t)^2 along the analytic flow.
    for (double lambda : {0.7, 1.0, 1.6})
        for (auto [q0, p0] : {std::pair{0.3, -0.7}, {-1.0, 0.2}, {0.9, 0.9}, {0.5, -0.5}})
            for (double tau : {0.5, 2.0, 6.0})
                CHECK(saddle_forward_ld_closed_form(lambda, q0, p0, tau) ==
                      doctest::Approx(quad_forward_action(lambda, q0, p0, tau)).epsilon(1e-12));
}

TEST_CASE("saddle forward closed form symmetries") {
    for (auto [q0, p0] : {std::pair{0.3, -0.7}, {-1.0, 0.2}, {0.25, 0.8}}) {
        for (double tau : {1.0, 3.0}) {
            // (q, p) -> (-q, -p)
            CHECK(saddle_forward_ld_closed_form(1.0, -q0, -p0, tau) ==
                  doctest::Approx(saddle_forward_ld_closed_form(1.0, q0, p0, tau)).epsilon(1e-14));
            // Swapping q and p changes only the energy term lambda tau H0.
            const double h0 = 0.5 * (p0 * p0 - q0 * q0);
            CHECK(saddle_forward_ld_closed_form(1.0, p0, q0, tau) - saddle_forward_ld_closed_form(1.0, q0, p0, tau) ==
                  doctest::Approx(-2.0 * tau * h0).epsilon(1e-12));
        }
    }
}

TEST_CASE("saddle forward action is convex in q0") {
    // d^2 S_f / d q0^2 = -lambda tau + sinh(2 lambda tau) / 2, checked with
    // second differences of the closed form.
    for (double tau = 0.05; tau <= 8.0; tau += 0.05) {
        const double h = 1e-3;
        const double d2 = (saddle_forward_ld_closed_form(1.0, h, 0.4, tau) - 2.0 * saddle_forward_ld_closed_form(1.0, 0.0, 0.4, tau) +
                           saddle_forward_ld_closed_form(1.0, -h, 0.4, tau)) / (h * h);
        const double expected = -tau + 0.5 * std::sinh(2.0 * tau);
        CHECK(expected > 0.0);
        CHECK(d2 == doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("saddle total closed form") {
    CHECK(saddle_total_ld_closed_form(1.0, 0.0, 0.0, 3.0) == 0.0);
    CHECK(saddle_total_ld_closed_form(1.0, 1.0, 1.0, 1.0) == doctest::Approx(kSinh2).epsilon(1e-15));
    for (double lambda : {0.7, 1.0})
        for (auto [q0, p0] : {std::pair{0.3, -0.7}, {-1.0, 0.2}, {1.0, 1.0}})
            for (double tau : {0.5, 2.0, 6.0}) {
                const double quad = quad_forward_action(lambda, q0, p0, tau) + quad_backward_action(lambda, q0, p0, tau);
                CHECK(saddle_total_ld_closed_form(lambda, q0, p0, tau) == doctest::Approx(quad).epsilon(1e-12));
                const double h0 = 0.5 * lambda * (p0 * p0 - q0 * q0);
                const double sinh_term = 0.5 * (p0 * p0 + q0 * q0) * std::sinh(2 * lambda * tau);
                const double energy_term = 2.0 * tau * h0;
                CHECK(std::abs(saddle_total_ld_closed_form(lambda, q0, p0, tau) - sinh_term - energy_term) <=
                      1e-10 * (std::abs(sinh_term) + std::abs(energy_term)));
            }
}

TEST_CASE("saddle G") {
    CHECK_THROWS_AS(saddle_G(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(saddle_G(-1.0, 1.0), std::domain_error);
    CHECK(saddle_G(0.1, 1.0) == doctest::Approx(kG01).epsilon(1e-13));
    CHECK(saddle_G(6.0, 1.0) - 1.0 == doctest::Approx(kG6Minus1).epsilon(1e-9));
    CHECK(saddle_G(9.21, 1.0) - 1.0 == doctest::Approx(kG921Minus1).epsilon(1e-6));
    CHECK(saddle_G(1e4, 1.0) == 1.0);
    CHECK(saddle_G(1e-6, 1.0) == doctest::Approx(3.0 / 2e-6).epsilon(1e-6));
    // Decreasing towards 1.
    double prev = saddle_G(0.01, 1.0);
    for (double tau = 0.02; tau < 20.0; tau += 0.01) {
        const double g = saddle_G(tau, 1.0);
        CHECK(g <= prev * (1.0 + 1e-15));
        CHECK(g >= 1.0);
        prev = g;
    }
}

TEST_CASE("saddle G is the argmin slope of the forward action") {
    // S_f is quadratic in q0, so three samples give the exact vertex.
    for (double tau : {0.3, 1.0, 4.0}) {
        const double p0 = 0.7;
        const double a = saddle_forward_ld_closed_form(1.0, -1.0, p0, tau);
        const double b = saddle_forward_ld_closed_form(1.0, 0.0, p0, tau);
        const double c = saddle_forward_ld_closed_form(1.0, 1.0, p0, tau);
        const double vertex = 0.5 * (a - c) / (a - 2 * b + c);
        CHECK(vertex == doctest::Approx(-saddle_G(tau, 1.0) * p0).epsilon(1e-9));
    }
}

TEST_CASE("saddle convergence time") {
    CHECK(saddle_convergence_time(1.0, 8.0) == doctest::Approx(kFourLn10).epsilon(1e-15));
    CHECK(saddle_convergence_time(2.0, 8.0) == doctest::Approx(kFourLn10 / 2.0).epsilon(1e-15));
    for (double n : {1.0, 4.0, 8.0, 15.0}) {
        const double tau = saddle_convergence_time(1.3, n);
        CHECK(std::exp(-2.0 * 1.3 * tau) == doctest::Approx(std::pow(10.0, -n)).epsilon(1e-14));
    }
}

TEST_CASE("harmonic forward closed form") {
    CHECK(harmonic_forward_ld_closed_form(1.0, 1.0, 0.0, 10.0) == 0.0);
    CHECK(harmonic_forward_ld_closed_form(1.0, 1.0, 0.5, M_PI) == doctest::Approx(0.5 * M_PI).epsilon(1e-15));
    // Quadrature of p^2 / m along (A cos wt, -m w A sin wt).
    const double m = 2.0, w = 1.5, h0 = 0.8;
    const double amp = std::sqrt(2.0 * h0 / m) / w;
    for (double tau : {0.7, 3.0, 11.0}) {
        auto rate = [&](double t) {
            const double p = -m * w * amp * std::sin(w * t);
            return p * p / m;
        };
        CHECK(harmonic_forward_ld_closed_form(m, w, h0, tau) ==
              doctest::Approx(gauss_kronrod<double, 61>::integrate(rate, 0.0, tau, 15, 1e-14)).epsilon(1e-12));
    }
    for (double tau : {100.0, 1000.0, 10000.0})
        CHECK(std::abs(harmonic_forward_ld_closed_form(1.0, 1.0, 0.5, tau) / tau - 0.5) <= 0.5 / (2.0 * tau));
}

TEST_CASE("proton-transfer equilibria") {
    const ProtonTransfer pt{};
    const auto eq = proton_transfer_equilibria(pt);
    REQUIRE(eq.size() == 3);
    CHECK(eq[0].kind == EquilibriumKind::saddle);
    CHECK(eq[1].kind == EquilibriumKind::center);
    CHECK(eq[2].kind == EquilibriumKind::center);
    CHECK(eq[1].state.q[0] == doctest::Approx(0.25));
    CHECK(eq[1].state.q[1] == doctest::Approx(std::sqrt(0.5)));
    CHECK(eq[2].state.q[1] == doctest::Approx(-std::sqrt(0.5)));
    for (const auto& e : eq)
        for (double v : vector_field(pt, e.state)) CHECK(std::abs(v) < 1e-12);

    const auto exact = proton_transfer_saddle_eigenvalues(pt);
    REQUIRE(exact.size() == 4);
    CHECK(exact[3].real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(exact[2].imag() == doctest::Approx(1.0));
    for (const auto& z : exact) {
        double best = INFINITY;
        for (const auto& w : eq[0].eigenvalues) best = std::min(best, std::abs(w - z));
        CHECK(best < 1e-6);
    }
    // Well bottoms: purely imaginary spectrum.
    for (const auto& z : eq[1].eigenvalues) CHECK(std::abs(z.real()) < 1e-6);

    ProtonTransfer decoupled = pt;
    decoupled.coupling = 0.0;
    const auto d = proton_transfer_equilibria(decoupled);
    CHECK(d[1].state.q[0] == 0.0);
    CHECK(d[1].state.q[1] == doctest::Approx(decoupled.y_well));
}

TEST_CASE("finite-difference Jacobian of the saddle") {
    const auto j = jacobian_fd(Saddle{2.0}, PhaseState({0.3}, {-0.1}));
    REQUIRE(j.size() == 4);
    CHECK(j[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(j[1] == doctest::Approx(2.0));
    CHECK(j[2] == doctest::Approx(2.0));
    CHECK(j[3] == doctest::Approx(0.0).scale(1.0));
    const auto ev = eigenvalues(j, 2);
    CHECK(ev[0].real() == doctest::Approx(-2.0));
    CHECK(ev[1].real() == doctest::Approx(2.0));
}

}  // TEST_SUITE
