#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace ldaction {

/// A point (q, p) of 2n-dimensional phase space with a time stamp.
struct PhaseState {
    std::vector<double> q;
    std::vector<double> p;
    double t = 0.0;

    PhaseState() = default;
    PhaseState(std::vector<double> q_, std::vector<double> p_, double t_ = 0.0)
        : q(std::move(q_)), p(std::move(p_)), t(t_) {}

    std::size_t dof() const { return q.size(); }
    bool is_finite() const;
    /// Throws std::invalid_argument unless q and p have equal, nonzero length
    /// and every component is finite.
    void validate() const;
};

// Benchmark systems. Each carries its parameters and the vector field on a
// flat state layout (q_0..q_{n-1}, p_0..p_{n-1}) used by the steppers.

/// H = lambda (p^2 - q^2) / 2.
struct Saddle {
    static constexpr int dof = 1;
    using State = std::array<double, 2>;
    double lambda = 1.0;

    State rhs(const State& x) const { return {lambda * x[1], lambda * x[0]}; }
    /// p * dq/dt, the action integrand.
    double action_rate(const State& x) const { return lambda * x[1] * x[1]; }
    double kinetic(const double* p) const { return 0.5 * lambda * p[0] * p[0]; }
    double potential(const double* q) const { return -0.5 * lambda * q[0] * q[0]; }
};

/// H = p^2 / (2m) + m omega^2 q^2 / 2.
struct Harmonic {
    static constexpr int dof = 1;
    using State = std::array<double, 2>;
    double m = 1.0;
    double omega = 1.0;

    State rhs(const State& x) const { return {x[1] / m, -m * omega * omega * x[0]}; }
    double action_rate(const State& x) const { return x[1] * x[1] / m; }
    double kinetic(const double* p) const { return 0.5 * p[0] * p[0] / m; }
    double potential(const double* q) const { return 0.5 * m * omega * omega * q[0] * q[0]; }
};

/// Two-DoF proton-transfer model: symmetric double well in y coupled
/// quadratically to a harmonic bath coordinate x.
struct ProtonTransfer {
    static constexpr int dof = 2;
    using State = std::array<double, 4>;
    double m = 1.0;
    double barrier = 0.25;                  // V‡
    double y_well = 0.70710678118654752440; // y_w
    double omega = 1.0;
    double coupling = 0.5;                  // c

    State rhs(const State& s) const {
        const double x = s[0], y = s[1];
        const double yw2 = y_well * y_well;
        const double mw2 = m * omega * omega;
        const double a = 2.0 * barrier / yw2 + coupling * x;
        const double b = 2.0 * barrier / (yw2 * yw2) + coupling * coupling / mw2;
        return {s[2] / m, s[3] / m, -mw2 * x + coupling * y * y, 2.0 * y * (a - b * y * y)};
    }
    double action_rate(const State& s) const { return (s[2] * s[2] + s[3] * s[3]) / m; }
    double kinetic(const double* p) const { return 0.5 * (p[0] * p[0] + p[1] * p[1]) / m; }
    double potential(const double* q) const {
        const double x = q[0], y = q[1];
        const double yw2 = y_well * y_well;
        const double mw2 = m * omega * omega;
        const double shift = x - coupling * y * y / mw2;
        return barrier / (yw2 * yw2) * y * y * (y * y - 2.0 * yw2) + 0.5 * mw2 * shift * shift;
    }
};

/// Duffing oscillator dX = Y dt, dY = (X - X^3) dt + sigma dW. The
/// deterministic part conserves H = y^2/2 - x^2/2 + x^4/4.
struct Duffing {
    static constexpr int dof = 1;
    using State = std::array<double, 2>;
    double sigma = 0.0;

    State rhs(const State& s) const { return {s[1], s[0] - s[0] * s[0] * s[0]}; }
    double action_rate(const State& s) const { return s[1] * s[1]; }
    double kinetic(const double* p) const { return 0.5 * p[0] * p[0]; }
    double potential(const double* q) const {
        const double x2 = q[0] * q[0];
        return -0.5 * x2 + 0.25 * x2 * x2;
    }
};

using SystemSpec = std::variant<Saddle, Harmonic, ProtonTransfer, Duffing>;

/// Throws std::invalid_argument on non-positive masses, frequencies, etc.
void validate(const SystemSpec& sys);
std::size_t dof(const SystemSpec& sys);
std::string system_name(const SystemSpec& sys);

std::vector<double> vector_field(const SystemSpec& sys, const PhaseState& x);
double kinetic_energy(const SystemSpec& sys, const std::vector<double>& p);
double potential_energy(const SystemSpec& sys, const std::vector<double>& q);
double total_energy(const SystemSpec& sys, const PhaseState& x);
/// p . dq/dt, equal to 2T for every benchmark system.
double action_rate(const SystemSpec& sys, const PhaseState& x);

// Flat-state conversions shared by the steppers.
template <class Sys>
typename Sys::State to_flat(const PhaseState& x) {
    typename Sys::State s{};
    for (int i = 0; i < Sys::dof; ++i) {
        s[i] = x.q[i];
        s[Sys::dof + i] = x.p[i];
    }
    return s;
}

template <class Sys>
PhaseState from_flat(const typename Sys::State& s, double t) {
    PhaseState x;
    x.q.assign(s.begin(), s.begin() + Sys::dof);
    x.p.assign(s.begin() + Sys::dof, s.end());
    x.t = t;
    return x;
}

// ---------------------------------------------------------------------------
// Closed-form oracles.

/// Value returned by closed forms whose hyperbolic terms overflow.
inline constexpr double kEscapedValue = std::numeric_limits<double>::max();

struct SaddleFlowPoint {
    double q = 0.0;
    double p = 0.0;
    bool escaped = false;
};

/// Exact flow of the linear saddle for any signed t.
SaddleFlowPoint saddle_analytic_flow(double lambda, double q0, double p0, double t);

/// Forward action of the linear saddle over [0, tau].
double saddle_forward_ld_closed_form(double lambda, double q0, double p0, double tau);

/// Forward plus backward action of the linear saddle, both over tau.
double saddle_total_ld_closed_form(double lambda, double q0, double p0, double tau);

/// G(tau; lambda) = (cosh 2 lambda tau - 1) / (sinh 2 lambda tau - 2 lambda tau).
/// The forward action at fixed p0 is minimised at q0 = -G p0. Throws
/// std::domain_error for tau <= 0.
double saddle_G(double tau, double lambda);

/// Integration time after which exp(-2 lambda tau) = 10^-digits.
double saddle_convergence_time(double lambda, double digits);

/// Forward action of the oscillator started at (A, 0) with energy H0.
double harmonic_forward_ld_closed_form(double m, double omega, double H0, double tau);

// ---------------------------------------------------------------------------
// Equilibria.

enum class EquilibriumKind { saddle, center };

struct Equilibrium {
    PhaseState state;
    EquilibriumKind kind = EquilibriumKind::center;
    std::vector<std::complex<double>> eigenvalues;
};

/// Row-major 2n x 2n Jacobian by central differences, step 1e-6 max(1, |x_i|).
std::vector<double> jacobian_fd(const SystemSpec& sys, const PhaseState& x);
std::vector<std::complex<double>> eigenvalues(const std::vector<double>& matrix, std::size_t n);

/// Saddle at the origin plus the two well bottoms, eigenvalues from the
/// finite-difference Jacobian, sorted by (real, imag).
std::vector<Equilibrium> proton_transfer_equilibria(const ProtonTransfer& params);

/// Eigenvalues of the origin saddle from the closed-form expression:
/// +-(2 / y_w) sqrt(V‡ / m) and +-i omega.
std::vector<std::complex<double>> proton_transfer_saddle_eigenvalues(const ProtonTransfer& params);

}  // namespace ldaction
