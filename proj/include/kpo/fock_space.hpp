#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "kpo/errors.hpp"

// Truncated single-mode Fock space. Units: hbar = 1, K = 1.
namespace kpo {

using Complex = std::complex<double>;

/// Dense operator on the truncated photon-number basis {|0>, ..., |dim-1>}.
using Operator = Eigen::MatrixXcd;
/// Pure state amplitudes in the photon-number basis.
using StateVector = Eigen::VectorXcd;
/// Mixed state; Hermitian with unit trace.
using DensityOperator = Eigen::MatrixXcd;

/// "Largest photon number of 30".
inline constexpr int kDefaultDim = 31;

/// Number of top Fock levels whose population counts as truncation tail.
inline constexpr int kTailLevels = 3;

Operator annihilation_operator(int dim);
Operator creation_operator(int dim);
Operator number_operator(int dim);
/// exp(i pi a^dagger a) = diag((-1)^n).
Operator parity_operator(int dim);
Operator identity_operator(int dim);

/// Photon-number state |n>.
StateVector fock_state(int n, int dim);

/// Coherent state |alpha>, renormalized after truncation.
/// Throws TruncationError when |alpha|^2 > (dim - 1) / 4.
StateVector coherent_state(Complex alpha, int dim);

/// <psi|op|psi>.
Complex expectation(const Operator& op, const StateVector& psi);
/// tr(op rho).
Complex expectation(const Operator& op, const DensityOperator& rho);

/// <lhs|rhs>.
Complex inner(const StateVector& lhs, const StateVector& rhs);

/// Population in the top kTailLevels photon-number levels.
double tail_population(const StateVector& psi);
double tail_population(const DensityOperator& rho);

/// Largest absolute entry; used for operator identity checks.
double max_abs(const Operator& m);

DensityOperator projector(const StateVector& psi);

}  // namespace kpo
