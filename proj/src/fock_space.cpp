#include "kpo/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kpo {

namespace {

void require_dim(int dim) {
    if (dim < 2) {
        throw InvalidDimension("Fock dimension must be >= 2, got " + std::to_string(dim));
    }
}

void require_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw DimensionMismatch("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
    }
}

}  // namespace

Operator annihilation_operator(int dim) {
    require_dim(dim);
    Operator a = Operator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Operator creation_operator(int dim) { return annihilation_operator(dim).adjoint(); }

Operator number_operator(int dim) {
    require_dim(dim);
    Operator n = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

Operator parity_operator(int dim) {
    require_dim(dim);
    Operator p = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    }
    return p;
}

Operator identity_operator(int dim) {
    require_dim(dim);
    return Operator::Identity(dim, dim);
}

StateVector fock_state(int n, int dim) {
    require_dim(dim);
    if (n < 0 || n >= dim) {
        throw DomainError("Fock index " + std::to_string(n) + " outside [0, " +
                          std::to_string(dim) + ")");
    }
    StateVector psi = StateVector::Zero(dim);
    psi(n) = 1.0;
    return psi;
}

StateVector coherent_state(Complex alpha, int dim) {
    require_dim(dim);
    const double limit = (dim - 1) / 4.0;
    if (std::norm(alpha) > limit) {
        throw TruncationError("|alpha|^2 = " + std::to_string(std::norm(alpha)) +
                              " exceeds truncation limit " + std::to_string(limit));
    }
    // psi_{n+1} = psi_n * alpha / sqrt(n + 1); no factorials.
    StateVector psi(dim);
    psi(0) = 1.0;
    for (int n = 0; n + 1 < dim; ++n) {
        psi(n + 1) = psi(n) * alpha / std::sqrt(static_cast<double>(n + 1));
    }
    psi.normalize();
    return psi;
}

Complex expectation(const Operator& op, const StateVector& psi) {
    require_same_dim(op.rows(), psi.size());
    require_same_dim(op.cols(), psi.size());
    return psi.dot(op * psi);
}

Complex expectation(const Operator& op, const DensityOperator& rho) {
    require_same_dim(op.rows(), rho.rows());
    require_same_dim(op.cols(), rho.cols());
    return (op * rho).trace();
}

Complex inner(const StateVector& lhs, const StateVector& rhs) {
    require_same_dim(lhs.size(), rhs.size());
    return lhs.dot(rhs);
}

double tail_population(const StateVector& psi) {
    const Eigen::Index levels = std::min<Eigen::Index>(kTailLevels, psi.size());
    return psi.tail(levels).squaredNorm();
}

double tail_population(const DensityOperator& rho) {
    const Eigen::Index levels = std::min<Eigen::Index>(kTailLevels, rho.rows());
    return rho.diagonal().tail(levels).real().sum();
}

double max_abs(const Operator& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

DensityOperator projector(const StateVector& psi) { return psi * psi.adjoint(); }

}  // namespace kpo
