#include "kpo/gate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace kpo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_normalized(double norm, const char* what) {
    if (std::abs(norm - 1.0) > 1e-6) {
        throw NormalizationError(std::string(what) + " is not normalized (norm " +
                                 std::to_string(norm) + ")");
    }
}

void require_orthonormal(const QubitBasis& basis) {
    if (std::abs(basis.zero.norm() - 1.0) > 1e-9 || std::abs(basis.one.norm() - 1.0) > 1e-9 ||
        std::abs(basis.zero.dot(basis.one)) > 1e-9) {
        throw NormalizationError("qubit basis is not orthonormal");
    }
}

// v0 = Rx(0)|psi_i>, v1 = the sin(theta/2) partner, so Rx(theta)|psi_i> = cos v0 + sin v1.
struct RotatedInitial {
    StateVector v0;
    StateVector v1;
};

RotatedInitial rotated_initial(const QubitBasis& basis, const StateVector& psi_i) {
    require_normalized(psi_i.norm(), "initial state");
    const Complex c0 = basis.zero.dot(psi_i);
    const Complex c1 = basis.one.dot(psi_i);
    const Complex minus_i(0.0, -1.0);
    return {c0 * basis.zero + c1 * basis.one, minus_i * (c1 * basis.zero + c0 * basis.one)};
}

// F(theta) = cos^2(theta/2) g00 + sin^2(theta/2) g11 + 2 sin cos Re(g01).
FidelityCurve curve_from_gram(double g00, double g11, double re_g01) {
    return FidelityCurve{0.5 * (g00 + g11), 0.5 * (g00 - g11), re_g01};
}

GateResult maximize(const FidelityCurve& curve, double leak) {
    GateResult result;
    const double amplitude = std::hypot(curve.Q, curve.R);
    if (amplitude < 1e-14) {
        result.theta_star = 0.0;
        result.degenerate = true;
    } else {
        result.theta_star = canonical_angle(std::atan2(curve.R, curve.Q));
    }
    result.fidelity = std::clamp(curve.P + amplitude, 0.0, 1.0);
    result.leakage = std::max(0.0, leak);
    return result;
}

double unwrap_step(double previous, double principal) {
    double delta = principal - std::remainder(previous, 2.0 * kPi);
    delta = std::remainder(delta, 2.0 * kPi);
    return previous + delta;
}

}  // namespace

Eigen::Matrix2cd rx_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Eigen::Matrix2cd m;
    m << Complex(c, 0.0), Complex(0.0, -s), Complex(0.0, -s), Complex(c, 0.0);
    return m;
}

double canonical_angle(double theta) {
    double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

double FidelityCurve::at(double theta) const {
    return P + Q * std::cos(theta) + R * std::sin(theta);
}

FidelityCurve fidelity_curve(const StateVector& psi_f, const QubitBasis& basis,
                             const StateVector& psi_i) {
    const RotatedInitial r = rotated_initial(basis, psi_i);
    const Complex x = psi_f.dot(r.v0);
    const Complex y = psi_f.dot(r.v1);
    return curve_from_gram(std::norm(x), std::norm(y), (std::conj(x) * y).real());
}

FidelityCurve fidelity_curve(const DensityOperator& rho_f, const QubitBasis& basis,
                             const StateVector& psi_i) {
    const RotatedInitial r = rotated_initial(basis, psi_i);
    const StateVector rho_v1 = rho_f * r.v1;
    const double g00 = r.v0.dot(rho_f * r.v0).real();
    const double g11 = r.v1.dot(rho_v1).real();
    const double re_g01 = r.v0.dot(rho_v1).real();
    return curve_from_gram(g00, g11, re_g01);
}

GateResult extract_gate_pure(const StateVector& psi_f, const QubitBasis& basis,
                             const StateVector& psi_i) {
    require_orthonormal(basis);
    require_normalized(psi_f.norm(), "final state");
    const double in_qubit = std::norm(basis.zero.dot(psi_f)) + std::norm(basis.one.dot(psi_f));
    return maximize(fidelity_curve(psi_f, basis, psi_i), psi_f.squaredNorm() - in_qubit);
}

GateResult extract_gate_mixed(const DensityOperator& rho_f, const QubitBasis& basis,
                              const StateVector& psi_i) {
    require_orthonormal(basis);
    const double trace = rho_f.trace().real();
    require_normalized(trace, "final density operator (trace)");
    const double in_qubit =
        basis.zero.dot(rho_f * basis.zero).real() + basis.one.dot(rho_f * basis.one).real();
    return maximize(fidelity_curve(rho_f, basis, psi_i), trace - in_qubit);
}

double leakage(const StateVector& psi, const Spectrum& spec) {
    const double kept = std::norm(spec.eigenstates.col(0).dot(psi)) +
                        std::norm(spec.eigenstates.col(1).dot(psi));
    return std::max(0.0, psi.squaredNorm() - kept);
}

double leakage(const DensityOperator& rho, const Spectrum& spec) {
    double kept = 0.0;
    for (int g = 0; g < 2; ++g) {
        const StateVector e = spec.eigenstates.col(g);
        kept += e.dot(rho * e).real();
    }
    return std::max(0.0, rho.trace().real() - kept);
}

ObservableTable trajectory_observables(const PureTrajectory& traj, const Spectrum& spec,
                                       int top_m) {
    if (traj.states.empty()) throw DomainError("empty trajectory");
    const QubitBasis basis = computational_basis(spec);
    const int dim = spec.dim();
    top_m = std::clamp(top_m, 1, dim);

    ObservableTable table;
    table.times = traj.times;

    const Eigen::VectorXd final_pops = (spec.eigenstates.adjoint() * traj.final_state()).cwiseAbs2();
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int l, int r) { return final_pops(l) > final_pops(r); });
    table.tracked.assign(order.begin(), order.begin() + top_m);

    const double e0 = spec.energy(0);
    const double e1 = spec.energy(1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool have_phi = false;
    double last_phi = 0.0;
    std::size_t first_unwrapped = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const StateVector& psi = traj.states[i];
        const double t = traj.times[i];
        std::vector<double> pops;
        pops.reserve(table.tracked.size());
        for (int k : table.tracked) pops.push_back(std::norm(spec.eigenstates.col(k).dot(psi)));
        table.populations.push_back(std::move(pops));

        const Complex amp0 = basis.ground0.dot(psi) * std::polar(1.0, e0 * t);
        const Complex amp1 = basis.ground1.dot(psi) * std::polar(1.0, e1 * t);
        const double th0 = -std::arg(amp0);
        const double th1 = -std::arg(amp1);
        table.theta0.push_back(i == 0 ? th0 : unwrap_step(table.theta0.back(), th0));
        table.theta1.push_back(i == 0 ? th1 : unwrap_step(table.theta1.back(), th1));

        const Complex z0 = basis.zero.dot(psi);
        const Complex z1 = basis.one.dot(psi);
        table.pop_zero.push_back(std::norm(z0));
        table.pop_one.push_back(std::norm(z1));
        if (std::abs(z0) < 1e-8) {
            table.phi.push_back(nan);
            table.phi_defined.push_back(false);
            continue;
        }
        const Complex ratio = z1 / z0;
        const double principal = std::arg(ratio);
        table.phi_defined.push_back(true);
        // Before <1~|psi> gains weight its phase is noise around the branch
        // cut; those samples keep principal values and do not seed unwrapping.
        if (!have_phi && std::abs(ratio) < 1e-8) {
            table.phi.push_back(principal);
            continue;
        }
        if (!have_phi) first_unwrapped = i;
        last_phi = have_phi ? unwrap_step(last_phi, principal) : principal;
        have_phi = true;
        table.phi.push_back(last_phi);
    }
    // The unwrapped stretch is offset so that it ends on the principal value.
    if (have_phi) {
        const double shift = canonical_angle(last_phi) - last_phi;
        for (std::size_t i = first_unwrapped; i < table.phi.size(); ++i) {
            if (table.phi_defined[i]) table.phi[i] += shift;
        }
    }
    return table;
}

GateRun simulate_gate(const GateSetup& setup, const GateOptions& options) {
    return simulate_gate(setup, kpo_spectrum(setup.kpo), options);
}

GateRun simulate_gate(const GateSetup& setup, const Spectrum& spec, const GateOptions& options) {
    const QubitBasis basis = computational_basis(spec);
    const Eigen::Vector2cd c = options.initial_qubit.normalized();
    const StateVector psi_i = c(0) * basis.zero + c(1) * basis.one;
    const double T = setup.drive.pulse.K_T;
    const std::vector<double> final_time{T};

    GateRun run;
    if (setup.kappa_over_K > 0.0 || options.force_lindblad) {
        const MixedTrajectory traj = evolve_lindblad(projector(psi_i), setup.kpo, setup.drive,
                                                     setup.kappa_over_K, final_time, options.evolve);
        run.result = extract_gate_mixed(traj.final_state(), basis, psi_i);
        run.stats = traj.stats;
    } else {
        const PureTrajectory traj =
            evolve_schrodinger(psi_i, setup.kpo, setup.drive, final_time, options.evolve);
        run.result = extract_gate_pure(traj.final_state(), basis, psi_i);
        run.stats = traj.stats;
    }
    run.result.params_echo = setup;
    return run;
}

}  // namespace kpo
