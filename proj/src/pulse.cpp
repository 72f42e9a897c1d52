#include "kpo/pulse.hpp"

#include <cmath>
#include <string>

namespace kpo {

void PulseParams::validate() const {
    if (!(K_T > 0.0) || !std::isfinite(K_T)) throw DomainError("K_T must be > 0");
    if (!(K_tau > 0.0) || !std::isfinite(K_tau)) throw DomainError("K_tau must be > 0");
    if (!(pd1_over_K >= 0.0) || !std::isfinite(pd1_over_K)) {
        throw DomainError("pd1/K must be >= 0");
    }
}

double pulse_amplitude(double t, const PulseParams& pulse) {
    const double T = pulse.K_T;
    const double slack = 1e-12 * T;
    if (t < -slack || t > T + slack) {
        throw DomainError("pulse time " + std::to_string(t) + " outside [0, " + std::to_string(T) +
                          "]");
    }
    if (t <= 0.0 || t >= T) return 0.0;
    const double tau = pulse.K_tau;
    const double norm = std::tanh(T / (2.0 * tau));
    const double shape = std::tanh(t / tau) * std::tanh((T - t) / tau) / (norm * norm);
    return pulse.pd1_over_K * shape * shape;
}

void DriveSpec::validate() const {
    pulse.validate();
    if (!std::isfinite(wd_over_K)) throw DomainError("w_d/K must be finite");
}

DrivenHamiltonian::DrivenHamiltonian(const KpoParams& params, const DriveSpec& drive)
    : params_(params),
      drive_(drive),
      static_(build_kpo_hamiltonian(params)),
      drive_op_(drive_operator(drive.kind, params.dim)),
      drive_op_dag_(drive_op_.adjoint()) {
    drive.validate();
}

Complex DrivenHamiltonian::drive_coefficient(double t) const {
    const double p = pulse_amplitude(t, drive_.pulse);
    return p * std::polar(1.0, -drive_.wd_over_K * t);
}

Operator DrivenHamiltonian::at(double t) const {
    const Complex c = drive_coefficient(t);
    return static_ + c * drive_op_ + std::conj(c) * drive_op_dag_;
}

Operator total_hamiltonian(double t, const KpoParams& params, const DriveSpec& drive) {
    return DrivenHamiltonian(params, drive).at(t);
}

}  // namespace kpo
