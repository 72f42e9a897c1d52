#pragma once

#include <vector>

#include "kpo/dynamics.hpp"

namespace kpo {

/// Everything needed to reproduce one gate simulation.
struct GateSetup {
    KpoParams kpo;
    DriveSpec drive;
    double kappa_over_K = 0.0;
};

struct GateResult {
    double theta_star = 0.0;  // radians, in (-pi, pi]
    double fidelity = 0.0;
    double leakage = 0.0;
    /// Q = R = 0: every theta gives the same fidelity; theta_star is reported as 0.
    bool degenerate = false;
    GateSetup params_echo;
};

/// Rx(theta) in the {|0~>, |1~>} basis.
Eigen::Matrix2cd rx_matrix(double theta);

/// Maps an angle onto (-pi, pi].
double canonical_angle(double theta);

/// F(theta) = P + Q cos(theta) + R sin(theta).
struct FidelityCurve {
    double P = 0.0;
    double Q = 0.0;
    double R = 0.0;

    double at(double theta) const;
};

/// psi_i is projected onto the qubit span; only its {|0~>, |1~>} components matter.
FidelityCurve fidelity_curve(const StateVector& psi_f, const QubitBasis& basis,
                             const StateVector& psi_i);
FidelityCurve fidelity_curve(const DensityOperator& rho_f, const QubitBasis& basis,
                             const StateVector& psi_i);

/// Closed-form maximization of F(theta) = |<psi_f|Rx(theta)|psi_i>|^2.
GateResult extract_gate_pure(const StateVector& psi_f, const QubitBasis& basis,
                             const StateVector& psi_i);
/// Closed-form maximization of F(theta) = <psi_i|Rx^dagger rho_f Rx|psi_i>.
GateResult extract_gate_mixed(const DensityOperator& rho_f, const QubitBasis& basis,
                              const StateVector& psi_i);

/// Population outside span{|E_0>, |E_1>}.
double leakage(const StateVector& psi, const Spectrum& spec);
double leakage(const DensityOperator& rho, const Spectrum& spec);

/// Per-sample observables of a pure trajectory.
///
/// theta_k = -arg(e^{i E_k t} <E_k|psi(t)>): the phase of |E_k> with its free
/// evolution removed, unwrapped in time. phi = arg(<1~|psi> / <0~|psi>): principal
/// values until |<1~|psi>/<0~|psi>| first reaches 1e-8, then unwrapped and offset
/// by a multiple of 2 pi so the last value lies in (-pi, pi]. Samples where
/// |<0~|psi>| < 1e-8 are flagged and carry NaN.
struct ObservableTable {
    std::vector<int> tracked;  // eigenstate indices, ranked by final population
    std::vector<double> times;
    std::vector<std::vector<double>> populations;  // [sample][tracked index]
    std::vector<double> theta0;
    std::vector<double> theta1;
    std::vector<double> pop_zero;
    std::vector<double> pop_one;
    std::vector<double> phi;
    std::vector<bool> phi_defined;
};

ObservableTable trajectory_observables(const PureTrajectory& traj, const Spectrum& spec,
                                       int top_m = 5);

struct GateOptions {
    EvolveOptions evolve;
    /// Initial qubit amplitudes (c0, c1) on {|0~>, |1~>}; normalized internally.
    Eigen::Vector2cd initial_qubit{Complex(1.0, 0.0), Complex(0.0, 0.0)};
    /// Integrate the master equation even when kappa = 0.
    bool force_lindblad = false;
};

struct GateRun {
    GateResult result;
    IntegratorStats stats;
};

/// Evolves |psi_i> through one gate and extracts (theta*, F, leakage).
/// Uses the Schrodinger equation for kappa = 0 and the master equation otherwise.
GateRun simulate_gate(const GateSetup& setup, const GateOptions& options = {});
/// Same, reusing an already labeled spectrum for setup.kpo.
GateRun simulate_gate(const GateSetup& setup, const Spectrum& spec,
                      const GateOptions& options = {});

}  // namespace kpo
