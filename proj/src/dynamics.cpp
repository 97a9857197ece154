#include "ldaction/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace ldaction {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be finite and > 0");
}

void require_dof(const SystemSpec& sys, std::size_t n) {
    if (dof(sys) != n)
        throw std::invalid_argument("state has " + std::to_string(n) + " degrees of freedom, " +
                                    system_name(sys) + " needs " + std::to_string(dof(sys)));
}

double finite_or_escaped(double v) { return std::isfinite(v) ? v : kEscapedValue; }

}  // namespace

bool PhaseState::is_finite() const {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(q.begin(), q.end(), finite) && std::all_of(p.begin(), p.end(), finite);
}

void PhaseState::validate() const {
    if (q.empty() || q.size() != p.size())
        throw std::invalid_argument("phase state needs q and p of equal nonzero length");
    if (!is_finite() || !std::isfinite(t))
        throw std::invalid_argument("phase state has non-finite components");
}

void validate(const SystemSpec& sys) {
    std::visit(overloaded{
                   [](const Saddle& s) { require_positive(s.lambda, "lambda"); },
                   [](const Harmonic& s) {
                       require_positive(s.m, "m");
                       require_positive(s.omega, "omega");
                   },
                   [](const ProtonTransfer& s) {
                       require_positive(s.m, "m");
                       require_positive(s.barrier, "barrier");
                       require_positive(s.y_well, "y_well");
                       require_positive(s.omega, "omega");
                       if (!std::isfinite(s.coupling))
                           throw std::invalid_argument("coupling must be finite");
                   },
                   [](const Duffing& s) {
                       if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma))
                           throw std::invalid_argument("sigma must be finite and >= 0");
                   },
               },
               sys);
}

std::size_t dof(const SystemSpec& sys) {
    return std::visit([](const auto& s) { return static_cast<std::size_t>(s.dof); }, sys);
}

std::string system_name(const SystemSpec& sys) {
    return std::visit(overloaded{
                          [](const Saddle&) { return std::string("saddle"); },
                          [](const Harmonic&) { return std::string("harmonic"); },
                          [](const ProtonTransfer&) { return std::string("proton_transfer"); },
                          [](const Duffing&) { return std::string("duffing"); },
                      },
                      sys);
}

std::vector<double> vector_field(const SystemSpec& sys, const PhaseState& x) {
    require_dof(sys, x.dof());
    if (x.p.size() != x.q.size()) throw std::invalid_argument("q and p lengths differ");
    return std::visit(
        [&](const auto& s) {
            using Sys = std::decay_t<decltype(s)>;
            const auto v = s.rhs(to_flat<Sys>(x));
            return std::vector<double>(v.begin(), v.end());
        },
        sys);
}

double kinetic_energy(const SystemSpec& sys, const std::vector<double>& p) {
    require_dof(sys, p.size());
    return std::visit([&](const auto& s) { return s.kinetic(p.data()); }, sys);
}

double potential_energy(const SystemSpec& sys, const std::vector<double>& q) {
    require_dof(sys, q.size());
    return std::visit([&](const auto& s) { return s.potential(q.data()); }, sys);
}

double total_energy(const SystemSpec& sys, const PhaseState& x) {
    return kinetic_energy(sys, x.p) + potential_energy(sys, x.q);
}

double action_rate(const SystemSpec& sys, const PhaseState& x) {
    require_dof(sys, x.dof());
    return std::visit(
        [&](const auto& s) {
            using Sys = std::decay_t<decltype(s)>;
            return s.action_rate(to_flat<Sys>(x));
        },
        sys);
}

// ---------------------------------------------------------------------------

SaddleFlowPoint saddle_analytic_flow(double lambda, double q0, double p0, double t) {
    require_positive(lambda, "lambda");
    const double c = std::cosh(lambda * t);
    const double s = std::sinh(lambda * t);
    SaddleFlowPoint out{q0 * c + p0 * s, p0 * c + q0 * s, false};
    if (!std::isfinite(out.q) || !std::isfinite(out.p)) {
        out.escaped = true;
        out.q = std::isfinite(out.q) ? out.q : kEscapedValue;
        out.p = std::isfinite(out.p) ? out.p : kEscapedValue;
    }
    return out;
}

// Written in the eigen-coordinates a = (q+p)/2 (unstable), b = (q-p)/2
// (stable) so that the bounded part survives the tau -> infinity limit:
//   S_f = a^2 (e^{2 lambda tau} - 1)/2 - 2 a b lambda tau + b^2 (1 - e^{-2 lambda tau})/2
// which expands to the familiar cosh/sinh form.
double saddle_forward_ld_closed_form(double lambda, double q0, double p0, double tau) {
    require_positive(lambda, "lambda");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    const double a = 0.5 * (q0 + p0);
    const double b = 0.5 * (q0 - p0);
    const double x = 2.0 * lambda * tau;
    double s = 0.0;
    if (a != 0.0) s += 0.5 * a * a * std::expm1(x);
    if (a * b != 0.0) s -= a * b * x;
    if (b != 0.0) s -= 0.5 * b * b * std::expm1(-x);
    return finite_or_escaped(s);
}

double saddle_total_ld_closed_form(double lambda, double q0, double p0, double tau) {
    require_positive(lambda, "lambda");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    // lambda tau (p^2 - q^2) = 2 tau H0 with H0 = lambda (p^2 - q^2) / 2.
    const double h0 = 0.5 * lambda * (p0 * p0 - q0 * q0);
    const double r2 = q0 * q0 + p0 * p0;
    double s = 0.0;
    if (h0 != 0.0) s += 2.0 * tau * h0;
    if (r2 != 0.0) s += 0.5 * r2 * std::sinh(2.0 * lambda * tau);
    return finite_or_escaped(s);
}

double saddle_G(double tau, double lambda) {
    require_positive(lambda, "lambda");
    if (!(tau > 0.0)) throw std::domain_error("saddle_G is undefined for tau <= 0");
    const double x = 2.0 * lambda * tau;
    if (x > 700.0) return 1.0;  // (cosh x - 1)/(sinh x - x) = 1 to double precision
    const double sh = std::sinh(0.5 * x);
    const double num = 2.0 * sh * sh;
    double den = 0.0;
    if (x < 1.0) {
        // sinh x - x cancels; sum its series x^3/3! + x^5/5! + ...
        double term = x * x * x / 6.0;
        for (int k = 2; term > 1e-18 * den; ++k) {
            den += term;
            term *= x * x / ((2.0 * k) * (2.0 * k + 1.0));
        }
    } else {
        den = std::sinh(x) - x;
    }
    return den > 0.0 ? num / den : 3.0 / x;
}

double saddle_convergence_time(double lambda, double digits) {
    require_positive(lambda, "lambda");
    if (!(digits >= 1.0)) throw std::invalid_argument("digits must be >= 1");
    return digits * std::log(10.0) / (2.0 * lambda);
}

double harmonic_forward_ld_closed_form(double m, double omega, double H0, double tau) {
    require_positive(m, "m");
    require_positive(omega, "omega");
    if (!(H0 >= 0.0)) throw std::invalid_argument("H0 must be >= 0");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    return H0 * (tau - std::sin(2.0 * omega * tau) / (2.0 * omega));
}

// ---------------------------------------------------------------------------

std::vector<double> jacobian_fd(const SystemSpec& sys, const PhaseState& x) {
    const std::size_t n = dof(sys);
    require_dof(sys, x.dof());
    const std::size_t dim = 2 * n;
    std::vector<double> jac(dim * dim);
    std::vector<double> flat(dim);
    for (std::size_t i = 0; i < n; ++i) {
        flat[i] = x.q[i];
        flat[n + i] = x.p[i];
    }
    auto eval = [&](const std::vector<double>& z) {
        PhaseState s;
        s.q.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
        s.p.assign(z.begin() + static_cast<std::ptrdiff_t>(n), z.end());
        return vector_field(sys, s);
    };
    for (std::size_t j = 0; j < dim; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(flat[j]));
        auto plus = flat;
        auto minus = flat;
        plus[j] += h;
        minus[j] -= h;
        const auto fp = eval(plus);
        const auto fm = eval(minus);
        for (std::size_t i = 0; i < dim; ++i) jac[i * dim + j] = (fp[i] - fm[i]) / (2.0 * h);
    }
    return jac;
}

std::vector<std::complex<double>> eigenvalues(const std::vector<double>& matrix, std::size_t n) {
    if (matrix.size() != n * n) throw std::invalid_argument("matrix is not n x n");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix[i * n + j];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    std::sort(out.begin(), out.end(), [](auto l, auto r) {
        return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
    });
    return out;
}

std::vector<std::complex<double>> proton_transfer_saddle_eigenvalues(const ProtonTransfer& params) {
    validate(SystemSpec{params});
    const double l = 2.0 / params.y_well * std::sqrt(params.barrier / params.m);
    return {{-l, 0.0}, {0.0, -params.omega}, {0.0, params.omega}, {l, 0.0}};
}

std::vector<Equilibrium> proton_transfer_equilibria(const ProtonTransfer& params) {
    const SystemSpec sys{params};
    validate(sys);
    const double xc = params.coupling * params.y_well * params.y_well /
                      (params.m * params.omega * params.omega);
    const std::array<std::array<double, 2>, 3> points{{{0.0, 0.0}, {xc, params.y_well}, {xc, -params.y_well}}};

    std::vector<Equilibrium> out;
    for (const auto& qp : points) {
        Equilibrium e;
        e.state = PhaseState({qp[0], qp[1]}, {0.0, 0.0});
        e.eigenvalues = eigenvalues(jacobian_fd(sys, e.state), 4);
        const bool hyperbolic = std::any_of(e.eigenvalues.begin(), e.eigenvalues.end(), [](auto z) {
            return std::abs(z.real()) > 1e-6 * std::max(1.0, std::abs(z));
        });
        e.kind = hyperbolic ? EquilibriumKind::saddle : EquilibriumKind::center;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ldaction
