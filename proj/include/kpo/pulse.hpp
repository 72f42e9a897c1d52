#pragma once

#include "kpo/spectrum.hpp"

namespace kpo {

/// tanh-squared envelope parameters; all in units of K (times in 1/K).
struct PulseParams {
    double pd1_over_K = 0.0;  // peak amplitude
    double K_tau = 1.0;       // rise time
    double K_T = 10.0;        // gate time

    void validate() const;
};

/// p_d(t) = pd1 * { tanh(t/tau) tanh((T - t)/tau) / tanh^2(T / 2tau) }^2.
///
/// Both p_d and dp_d/dt vanish at t = 0 and t = T; the peak pd1 sits at T/2.
/// Throws DomainError for t outside [0, T] (a relative slack of 1e-12 T is
/// clamped to absorb integrator round-off at the endpoints).
double pulse_amplitude(double t, const PulseParams& pulse);

struct DriveSpec {
    DriveKind kind = DriveKind::SinglePhoton;
    double wd_over_K = 0.0;
    PulseParams pulse;

    void validate() const;
};

/// H(t)/K = H_KPO/K + p_d(t)/K (O e^{-i w_d t} + O^dagger e^{i w_d t}).
Operator total_hamiltonian(double t, const KpoParams& params, const DriveSpec& drive);

/// Precomputed pieces of H(t) for repeated evaluation inside integrators.
class DrivenHamiltonian {
public:
    DrivenHamiltonian(const KpoParams& params, const DriveSpec& drive);

    /// Complex coefficient c(t) = p_d(t) e^{-i w_d t} multiplying O.
    Complex drive_coefficient(double t) const;
    Operator at(double t) const;

    const Operator& static_part() const { return static_; }
    const Operator& drive_op() const { return drive_op_; }
    const KpoParams& params() const { return params_; }
    const DriveSpec& drive() const { return drive_; }

private:
    KpoParams params_;
    DriveSpec drive_;
    Operator static_;
    Operator drive_op_;
    Operator drive_op_dag_;
};

}  // namespace kpo
