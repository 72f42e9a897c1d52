#pragma once

#include <string>
#include <vector>

#include "kpo/fock_space.hpp"

namespace kpo {

/// Static KPO parameters: parametric drive amplitude p0/K and Fock truncation.
struct KpoParams {
    double p0_over_K = 0.0;
    int dim = kDefaultDim;

    /// Throws InvalidDimension / TruncationError / DomainError.
    void validate() const;
    /// Coherent amplitude alpha = sqrt(p0/K).
    double alpha() const;
};

/// Single-photon drive couples through a, two-photon through a^2 / 2.
enum class DriveKind { SinglePhoton, TwoPhoton };

const char* to_string(DriveKind kind);
DriveKind parse_drive_kind(const std::string& text);

/// The drive operator O of H_d = p_d(t) (O e^{-i w t} + O^dagger e^{i w t}).
Operator drive_operator(DriveKind kind, int dim);
/// Photon-number parity of the drive operator: -1 for a, +1 for a^2.
int drive_parity(DriveKind kind);

inline constexpr int kDefaultReliableCutoff = 10;
inline constexpr double kDegeneracyThreshold = 1e-6;

/// Labeled eigensystem of H_KPO.
///
/// Index k follows descending energy (E_0 >= E_1 >= ...), which coincides with
/// the photon number of the p0 = 0 limit. Within a near-degenerate cluster the
/// states are parity eigenstates ordered so that parity(k) = (-1)^k. Each
/// eigenvector's largest-magnitude Fock amplitude is real and positive.
struct Spectrum {
    KpoParams params;
    Eigen::VectorXd eigenvalues;  // E_k / K
    Operator eigenstates;         // column k is |E_k>
    std::vector<int> parities;
    int reliable_cutoff = kDefaultReliableCutoff;

    int dim() const { return params.dim; }
    StateVector state(int k) const { return eigenstates.col(k); }
    double energy(int k) const { return eigenvalues(k); }
};

/// H_KPO / K = -(1/2) a^dagger^2 a^2 + (p0 / 2K)(a^2 + a^dagger^2).
Operator build_kpo_hamiltonian(const KpoParams& params);

Spectrum diagonalize_and_label(const Operator& hamiltonian, const KpoParams& params,
                               int reliable_cutoff = kDefaultReliableCutoff);
/// Convenience: build and label in one step.
Spectrum kpo_spectrum(const KpoParams& params, int reliable_cutoff = kDefaultReliableCutoff);

struct CatPair {
    StateVector even;  // N_+ (|alpha> + |-alpha>)
    StateVector odd;   // N_- (|alpha> - |-alpha>)
};

/// Even (parity = +1) or odd (parity = -1) cat state of amplitude sqrt(p0/K).
/// The odd branch throws DomainError at alpha = 0.
StateVector cat_state(const KpoParams& params, int parity);
CatPair cat_states_analytic(const KpoParams& params);

/// Qubit basis |0~> = (|E_0> + |E_1>)/sqrt2, |1~> = (|E_0> - |E_1>)/sqrt2.
/// The sign of |E_1> is chosen so that <0~|alpha> > 0, i.e. |0~> ~ |+alpha>.
struct QubitBasis {
    StateVector zero;
    StateVector one;
    StateVector ground0;  // |E_0>
    StateVector ground1;  // |E_1> with the sign used above
};

QubitBasis computational_basis(const Spectrum& spec);

/// <E_k|O|E_l> under the spectrum's phase convention.
Complex drive_matrix_element(const Spectrum& spec, DriveKind kind, int k, int l);

/// xi_k = (E_0 - E_k) / K.
double xi(const Spectrum& spec, int k);

}  // namespace kpo
