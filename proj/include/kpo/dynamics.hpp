#pragma once

#include <span>
#include <vector>

#include "kpo/pulse.hpp"

namespace kpo {

struct EvolveOptions {
    /// Local error per step (max-abs over amplitudes).
    double tol = 1e-10;
    std::size_t max_steps = 5'000'000;
    /// Largest tolerated population in the top photon-number levels.
    double tail_limit = 1e-5;
    /// Most negative tolerated eigenvalue of a sampled density operator.
    double positivity_limit = -1e-5;
};

struct IntegratorStats {
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
    double max_step_error = 0.0;
    double error_estimate = 0.0;
    double max_tail_population = 0.0;
    double final_tail_population = 0.0;
    /// Pure: max | ||psi|| - 1 |. Mixed: max | tr(rho) - 1 |.
    double max_norm_drift = 0.0;
    /// Mixed only: max |rho - rho^dagger| before re-Hermitization.
    double max_hermiticity_error = 0.0;
    /// Mixed only: smallest eigenvalue seen at a sample time.
    double min_eigenvalue = 1.0;
};

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    IntegratorStats stats;

    const State& final_state() const { return states.back(); }
};

using PureTrajectory = Trajectory<StateVector>;
using MixedTrajectory = Trajectory<DensityOperator>;

/// i d/dt |psi> = H(t) |psi> from t = 0 to the last sample time.
///
/// Samples must be sorted within [0, T]; an empty list samples only t = T.
/// Throws IntegrationError, TruncationError, NormalizationError.
PureTrajectory evolve_schrodinger(const StateVector& psi0, const KpoParams& params,
                                  const DriveSpec& drive, std::span<const double> sample_times,
                                  const EvolveOptions& options = {});

/// d rho/dt = -i[H, rho] + (kappa/2)(2 a rho a^dagger - a^dagger a rho - rho a^dagger a).
///
/// Sampled states are re-Hermitized; trace drift and positivity are recorded,
/// and an eigenvalue below options.positivity_limit raises IntegrationError.
MixedTrajectory evolve_lindblad(const DensityOperator& rho0, const KpoParams& params,
                                const DriveSpec& drive, double kappa_over_K,
                                std::span<const double> sample_times,
                                const EvolveOptions& options = {});

/// n + 1 equally spaced times covering [0, T].
std::vector<double> uniform_times(double K_T, int intervals);

}  // namespace kpo
