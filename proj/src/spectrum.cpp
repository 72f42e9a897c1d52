#include "kpo/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace kpo {

void KpoParams::validate() const {
    if (dim < 2) {
        throw InvalidDimension("Fock dimension must be >= 2, got " + std::to_string(dim));
    }
    if (!(p0_over_K >= 0.0) || !std::isfinite(p0_over_K)) {
        throw DomainError("p0/K must be finite and >= 0");
    }
    if (p0_over_K > (dim - 1) / 4.0) {
        throw TruncationError("p0/K = " + std::to_string(p0_over_K) +
                              " does not fit truncation dim = " + std::to_string(dim));
    }
}

double KpoParams::alpha() const { return std::sqrt(p0_over_K); }

const char* to_string(DriveKind kind) {
    return kind == DriveKind::SinglePhoton ? "single" : "two";
}

DriveKind parse_drive_kind(const std::string& text) {
    if (text == "single" || text == "single-photon" || text == "1") return DriveKind::SinglePhoton;
    if (text == "two" || text == "two-photon" || text == "2") return DriveKind::TwoPhoton;
    throw DomainError("unknown drive kind '" + text + "' (expected single or two)");
}

Operator drive_operator(DriveKind kind, int dim) {
    const Operator a = annihilation_operator(dim);
    if (kind == DriveKind::SinglePhoton) return a;
    return 0.5 * (a * a);
}

int drive_parity(DriveKind kind) { return kind == DriveKind::SinglePhoton ? -1 : 1; }

Operator build_kpo_hamiltonian(const KpoParams& params) {
    params.validate();
    const int dim = params.dim;
    const Operator a = annihilation_operator(dim);
    const Operator a2 = a * a;
    const Operator a2dag = a2.adjoint();
    Operator h = -0.5 * (a2dag * a2) + 0.5 * params.p0_over_K * (a2 + a2dag);
    // Remove round-off asymmetry so H is exactly Hermitian.
    return 0.5 * (h + h.adjoint());
}

namespace {

double parity_of(const StateVector& v, const Eigen::VectorXd& parity_diag) {
    return (v.cwiseAbs2().array() * parity_diag.array()).sum();
}

void fix_phase(Eigen::Ref<StateVector> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex pivot = v(imax);
    v *= std::abs(pivot) / pivot;
    v(imax) = std::abs(v(imax));
}

}  // namespace

Spectrum diagonalize_and_label(const Operator& hamiltonian, const KpoParams& params,
                               int reliable_cutoff) {
    params.validate();
    const int dim = params.dim;
    if (hamiltonian.rows() != dim || hamiltonian.cols() != dim) {
        throw DimensionMismatch("Hamiltonian size does not match params.dim");
    }

    Eigen::SelfAdjointEigenSolver<Operator> solver(hamiltonian);
    if (solver.info() != Eigen::Success) {
        throw LabelingError("eigendecomposition failed");
    }
    // Eigen returns ascending order; reverse to descending.
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    Operator vectors = solver.eigenvectors().rowwise().reverse();

    Eigen::VectorXd parity_diag(dim);
    for (int n = 0; n < dim; ++n) parity_diag(n) = (n % 2 == 0) ? 1.0 : -1.0;
    const Operator parity = parity_diag.cast<Complex>().asDiagonal();

    // Resolve near-degenerate clusters into parity eigenstates.
    int begin = 0;
    while (begin < dim) {
        int end = begin + 1;
        while (end < dim && values(end - 1) - values(end) < kDegeneracyThreshold) ++end;
        const int size = end - begin;
        if (size > 1) {
            const Operator block = vectors.middleCols(begin, size);
            const Operator restricted = block.adjoint() * parity * block;
            Eigen::SelfAdjointEigenSolver<Operator> psolve(0.5 * (restricted + restricted.adjoint()));
            Operator rotated = block * psolve.eigenvectors();
            const Eigen::VectorXd pvals = psolve.eigenvalues();  // ascending: odd first

            std::vector<int> evens, odds;
            for (int j = 0; j < size; ++j) (pvals(j) > 0 ? evens : odds).push_back(j);
            std::size_t ie = 0, io = 0;
            for (int j = 0; j < size; ++j) {
                const bool want_even = ((begin + j) % 2 == 0);
                int pick;
                if (want_even ? ie < evens.size() : io < odds.size()) {
                    pick = want_even ? evens[ie++] : odds[io++];
                } else {
                    pick = want_even ? odds[io++] : evens[ie++];
                }
                vectors.col(begin + j) = rotated.col(pick);
                values(begin + j) = rotated.col(pick).dot(hamiltonian * rotated.col(pick)).real();
            }
        }
        begin = end;
    }

    Spectrum spec;
    spec.params = params;
    spec.reliable_cutoff = reliable_cutoff;
    spec.parities.resize(dim);
    for (int k = 0; k < dim; ++k) {
        fix_phase(vectors.col(k));
        const double p = parity_of(vectors.col(k), parity_diag);
        if (std::abs(std::abs(p) - 1.0) > 1e-8) {
            throw LabelingError("eigenstate " + std::to_string(k) +
                                " is not a parity eigenstate (<P> = " + std::to_string(p) + ")");
        }
        spec.parities[k] = p > 0 ? 1 : -1;
        if (k < reliable_cutoff && spec.parities[k] != ((k % 2 == 0) ? 1 : -1)) {
            throw LabelingError("parity of eigenstate " + std::to_string(k) +
                                " does not match (-1)^k");
        }
    }
    spec.eigenvalues = std::move(values);
    spec.eigenstates = std::move(vectors);
    return spec;
}

Spectrum kpo_spectrum(const KpoParams& params, int reliable_cutoff) {
    return diagonalize_and_label(build_kpo_hamiltonian(params), params, reliable_cutoff);
}

StateVector cat_state(const KpoParams& params, int parity) {
    params.validate();
    const double alpha = params.alpha();
    if (parity < 0 && alpha == 0.0) {
        throw DomainError("odd cat state is undefined at alpha = 0");
    }
    const StateVector plus = coherent_state(alpha, params.dim);
    const StateVector minus = coherent_state(-alpha, params.dim);
    // Normalizing numerically equals N_+- = 1/sqrt(2(1 +- e^{-2 alpha^2})) up to truncation.
    return parity > 0 ? StateVector((plus + minus).normalized())
                      : StateVector((plus - minus).normalized());
}

CatPair cat_states_analytic(const KpoParams& params) {
    return CatPair{cat_state(params, +1), cat_state(params, -1)};
}

QubitBasis computational_basis(const Spectrum& spec) {
    const int dim = spec.dim();
    const StateVector e0 = spec.state(0);
    StateVector e1 = spec.state(1);
    const StateVector alpha = coherent_state(spec.params.alpha(), dim);
    const double with_plus = (e0 + e1).dot(alpha).real();
    const double with_minus = (e0 - e1).dot(alpha).real();
    if (with_minus > with_plus) e1 = -e1;

    QubitBasis basis;
    const double s = 1.0 / std::sqrt(2.0);
    basis.zero = s * (e0 + e1);
    basis.one = s * (e0 - e1);
    basis.ground0 = e0;
    basis.ground1 = e1;
    return basis;
}

Complex drive_matrix_element(const Spectrum& spec, DriveKind kind, int k, int l) {
    const int dim = spec.dim();
    if (k < 0 || l < 0 || k >= dim || l >= dim) {
        throw DomainError("eigenstate index out of range");
    }
    const Operator op = drive_operator(kind, dim);
    return spec.eigenstates.col(k).dot(op * spec.eigenstates.col(l));
}

double xi(const Spectrum& spec, int k) {
    if (k < 0 || k >= spec.dim()) throw DomainError("eigenstate index out of range");
    return spec.eigenvalues(0) - spec.eigenvalues(k);
}

}  // namespace kpo
