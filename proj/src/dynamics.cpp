#include "kpo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "kpo/ode.hpp"

namespace kpo {

namespace {

// H0 and the ladder/drive operators have at most five nonzero diagonals, so
// every right-hand side is evaluated diagonal by diagonal.
struct Band {
    int offset = 0;  // entry (r, r + offset)
    Eigen::VectorXcd values;

    int first_row() const { return offset < 0 ? -offset : 0; }
};

class BandedOperator {
public:
    BandedOperator() = default;

    static BandedOperator from_dense(const Operator& dense) {
        BandedOperator out;
        out.dim_ = static_cast<int>(dense.rows());
        for (int k = -out.dim_ + 1; k < out.dim_; ++k) {
            Eigen::VectorXcd d = dense.diagonal(k);
            if (d.cwiseAbs().maxCoeff() > 0.0) out.bands_.push_back({k, std::move(d)});
        }
        return out;
    }

    /// this + c * other, merging equal offsets.
    void add_scaled(const BandedOperator& other, Complex c) {
        for (const Band& b : other.bands_) {
            auto it = std::find_if(bands_.begin(), bands_.end(),
                                   [&](const Band& own) { return own.offset == b.offset; });
            if (it == bands_.end()) {
                bands_.push_back({b.offset, c * b.values});
            } else {
                it->values += c * b.values;
            }
        }
    }

    /// Overwrites the values of bands shared with `base`; used to rebuild H(t)
    /// without reallocating.
    void assign(const BandedOperator& base) {
        for (std::size_t i = 0; i < bands_.size() && i < base.bands_.size(); ++i) {
            bands_[i].values = base.bands_[i].values;
        }
    }

    BandedOperator adjoint() const {
        BandedOperator out;
        out.dim_ = dim_;
        for (const Band& b : bands_) out.bands_.push_back({-b.offset, b.values.conjugate()});
        return out;
    }

    // out += B x
    void apply(const StateVector& x, StateVector& out) const {
        for (const Band& b : bands_) {
            const int r0 = b.first_row();
            const int len = static_cast<int>(b.values.size());
            out.segment(r0, len).array() += b.values.array() * x.segment(r0 + b.offset, len).array();
        }
    }

    // out += B m
    void left(const Operator& m, Operator& out) const {
        for (const Band& b : bands_) {
            const int r0 = b.first_row();
            const int len = static_cast<int>(b.values.size());
            out.middleRows(r0, len).noalias() +=
                b.values.asDiagonal() * m.middleRows(r0 + b.offset, len);
        }
    }

    // out += m B^dagger
    void right_adjoint(const Operator& m, Operator& out) const {
        for (const Band& b : bands_) {
            const int r0 = b.first_row();
            const int len = static_cast<int>(b.values.size());
            out.middleCols(r0, len).noalias() +=
                m.middleCols(r0 + b.offset, len) * b.values.conjugate().asDiagonal();
        }
    }

    std::vector<Band>& bands() { return bands_; }

private:
    int dim_ = 0;
    std::vector<Band> bands_;
};

std::vector<double> checked_samples(std::span<const double> sample_times, double K_T) {
    std::vector<double> samples(sample_times.begin(), sample_times.end());
    if (samples.empty()) samples.push_back(K_T);
    const double slack = 1e-12 * K_T;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] < -slack || samples[i] > K_T + slack) {
            throw DomainError("sample time " + std::to_string(samples[i]) + " outside [0, T]");
        }
        samples[i] = std::clamp(samples[i], 0.0, K_T);
        if (i > 0 && samples[i] < samples[i - 1]) {
            throw DomainError("sample times must be sorted");
        }
    }
    return samples;
}

ode::StepControl step_control(const EvolveOptions& options) {
    ode::StepControl control;
    control.tol = options.tol;
    control.max_steps = options.max_steps;
    return control;
}

void copy_stats(const ode::StepStats& from, IntegratorStats& to) {
    to.accepted_steps = from.accepted;
    to.rejected_steps = from.rejected;
    to.rhs_evaluations = from.rhs_evaluations;
    to.max_step_error = from.max_step_error;
    to.error_estimate = from.error_estimate;
}

void check_tail(double tail, double limit, double t) {
    if (tail > limit) {
        throw TruncationError("tail population " + std::to_string(tail) + " exceeds " +
                              std::to_string(limit) + " at Kt = " + std::to_string(t));
    }
}

}  // namespace

std::vector<double> uniform_times(double K_T, int intervals) {
    if (intervals < 1) throw DomainError("need at least one interval");
    std::vector<double> times(intervals + 1);
    for (int i = 0; i <= intervals; ++i) times[i] = K_T * i / intervals;
    times.back() = K_T;
    return times;
}

PureTrajectory evolve_schrodinger(const StateVector& psi0, const KpoParams& params,
                                  const DriveSpec& drive, std::span<const double> sample_times,
                                  const EvolveOptions& options) {
    params.validate();
    drive.validate();
    if (psi0.size() != params.dim) throw DimensionMismatch("initial state dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) {
        throw NormalizationError("initial state is not normalized");
    }
    const std::vector<double> samples = checked_samples(sample_times, drive.pulse.K_T);
    const DrivenHamiltonian hamiltonian(params, drive);

    PureTrajectory traj;
    traj.times = samples;
    traj.states.resize(samples.size());
    IntegratorStats& stats = traj.stats;
    stats.max_tail_population = tail_population(psi0);
    check_tail(stats.max_tail_population, options.tail_limit, 0.0);

    const BandedOperator h0 = BandedOperator::from_dense(hamiltonian.static_part());
    const BandedOperator op = BandedOperator::from_dense(hamiltonian.drive_op());
    const BandedOperator op_dag = op.adjoint();
    const Complex minus_i(0.0, -1.0);
    StateVector drive_part(params.dim);
    auto rhs = [&](double t, const StateVector& psi) -> StateVector {
        const Complex c = hamiltonian.drive_coefficient(t);
        StateVector out = StateVector::Zero(psi.size());
        h0.apply(psi, out);
        drive_part.setZero();
        op.apply(psi, drive_part);
        out += c * drive_part;
        drive_part.setZero();
        op_dag.apply(psi, drive_part);
        out += std::conj(c) * drive_part;
        return minus_i * out;
    };
    auto on_sample = [&](std::size_t i, const StateVector& psi) {
        traj.states[i] = psi;
        stats.max_norm_drift = std::max(stats.max_norm_drift, std::abs(psi.norm() - 1.0));
    };
    auto on_step = [&](double t, const StateVector& psi) {
        const double tail = tail_population(psi);
        stats.max_tail_population = std::max(stats.max_tail_population, tail);
        check_tail(tail, options.tail_limit, t);
    };

    ode::StepStats step_stats;
    const StateVector final = ode::dopri5(rhs, StateVector(psi0), 0.0, samples.back(), samples,
                                          step_control(options), step_stats, on_sample, on_step);
    copy_stats(step_stats, stats);
    stats.final_tail_population = tail_population(final);
    return traj;
}

MixedTrajectory evolve_lindblad(const DensityOperator& rho0, const KpoParams& params,
                                const DriveSpec& drive, double kappa_over_K,
                                std::span<const double> sample_times,
                                const EvolveOptions& options) {
    params.validate();
    drive.validate();
    if (!(kappa_over_K >= 0.0) || !std::isfinite(kappa_over_K)) {
        throw DomainError("kappa/K must be >= 0");
    }
    if (rho0.rows() != params.dim || rho0.cols() != params.dim) {
        throw DimensionMismatch("initial density operator dimension");
    }
    if (std::abs(rho0.trace().real() - 1.0) > 1e-9 || max_abs(rho0 - rho0.adjoint()) > 1e-9) {
        throw NormalizationError("initial density operator must be Hermitian with unit trace");
    }
    const std::vector<double> samples = checked_samples(sample_times, drive.pulse.K_T);
    const DrivenHamiltonian hamiltonian(params, drive);
    const int dim = params.dim;

    MixedTrajectory traj;
    traj.times = samples;
    traj.states.resize(samples.size());
    IntegratorStats& stats = traj.stats;
    stats.max_tail_population = tail_population(rho0);
    check_tail(stats.max_tail_population, options.tail_limit, 0.0);

    const BandedOperator a = BandedOperator::from_dense(annihilation_operator(dim));
    // H_eff(t) = H(t) - i (kappa/2) a^dagger a;
    // d rho/dt = -i (H_eff rho - rho H_eff^dagger) + kappa a rho a^dagger.
    BandedOperator h_eff = BandedOperator::from_dense(
        hamiltonian.static_part() - Complex(0.0, 0.5 * kappa_over_K) * number_operator(dim));
    const BandedOperator op = BandedOperator::from_dense(hamiltonian.drive_op());
    const BandedOperator op_dag = op.adjoint();
    h_eff.add_scaled(op, 0.0);
    h_eff.add_scaled(op_dag, 0.0);
    const BandedOperator h_eff_static = h_eff;
    const Complex minus_i(0.0, -1.0);
    Operator scratch(dim, dim);
    auto rhs = [&](double t, const DensityOperator& rho) -> DensityOperator {
        const Complex c = hamiltonian.drive_coefficient(t);
        h_eff.assign(h_eff_static);
        h_eff.add_scaled(op, c);
        h_eff.add_scaled(op_dag, std::conj(c));
        DensityOperator comm = DensityOperator::Zero(dim, dim);
        h_eff.left(rho, comm);
        scratch.setZero();
        h_eff.right_adjoint(rho, scratch);
        comm -= scratch;
        DensityOperator out = minus_i * comm;
        if (kappa_over_K > 0.0) {
            scratch.setZero();
            a.right_adjoint(rho, scratch);
            DensityOperator jump = DensityOperator::Zero(dim, dim);
            a.left(scratch, jump);
            out += kappa_over_K * jump;
        }
        return out;
    };
    auto on_sample = [&](std::size_t i, const DensityOperator& rho) {
        stats.max_hermiticity_error =
            std::max(stats.max_hermiticity_error, max_abs(rho - rho.adjoint()));
        DensityOperator clean = 0.5 * (rho + rho.adjoint());
        stats.max_norm_drift =
            std::max(stats.max_norm_drift, std::abs(clean.trace().real() - 1.0));
        Eigen::SelfAdjointEigenSolver<DensityOperator> solver(clean, Eigen::EigenvaluesOnly);
        const double min_eig = solver.eigenvalues().minCoeff();
        stats.min_eigenvalue = std::min(stats.min_eigenvalue, min_eig);
        if (min_eig < options.positivity_limit) {
            throw IntegrationError("density operator lost positivity (eigenvalue " +
                                   std::to_string(min_eig) + ")");
        }
        traj.states[i] = std::move(clean);
    };
    auto on_step = [&](double t, const DensityOperator& rho) {
        const double tail = tail_population(rho);
        stats.max_tail_population = std::max(stats.max_tail_population, tail);
        check_tail(tail, options.tail_limit, t);
    };

    ode::StepStats step_stats;
    const DensityOperator final =
        ode::dopri5(rhs, DensityOperator(rho0), 0.0, samples.back(), samples,
                    step_control(options), step_stats, on_sample, on_step);
    copy_stats(step_stats, stats);
    stats.final_tail_population = tail_population(final);
    return traj;
}

}  // namespace kpo
