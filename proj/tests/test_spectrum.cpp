#include <cmath>

#include <doctest.h>

#include "kpo/errors.hpp"
#include "kpo/spectrum.hpp"

using namespace kpo;

namespace {

double half_p0_squared(double p0) { return 0.5 * p0 * p0; }

}  // namespace

TEST_CASE("Kerr-only Hamiltonian is diagonal in Fock space") {
    const Operator h = build_kpo_hamiltonian(KpoParams{0.0, 12});
    CHECK(h(4, 4).real() == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK(max_abs(h - Operator(h.diagonal().asDiagonal())) == 0.0);

    const Spectrum spec = kpo_spectrum(KpoParams{0.0, 31});
    const double expected[] = {0, 0, -1, -3, -6, -10, -15};
    for (int k = 0; k < 7; ++k) {
        CHECK(spec.energy(k) == doctest::Approx(expected[k]).epsilon(1e-14));
        CHECK(xi(spec, k) == doctest::Approx(0.5 * k * (k - 1)).epsilon(1e-14));
    }
}

TEST_CASE("Hamiltonian is Hermitian and its top level is p0^2/2") {
    const Operator h = build_kpo_hamiltonian(KpoParams{2.9, 31});
    CHECK(max_abs(h - h.adjoint()) < 1e-14);
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    CHECK(std::abs(spec.energy(0) - 4.205) < 1e-8);
    for (int k = 0; k + 1 < spec.dim(); ++k) CHECK(spec.energy(k) >= spec.energy(k + 1));
}

TEST_CASE("cat pair is exactly degenerate and parities alternate") {
    for (double p0 : {1.0, 2.9, 4.7, 8.0}) {
        CAPTURE(p0);
        // p0 = 8 needs more room than the default truncation allows.
        const Spectrum spec = kpo_spectrum(KpoParams{p0, p0 > 7.5 ? 41 : 31});
        CHECK(std::abs(spec.energy(0) - half_p0_squared(p0)) < 1e-8);
        CHECK(std::abs(spec.energy(1) - half_p0_squared(p0)) < 1e-8);
        const Operator parity = parity_operator(spec.dim());
        for (int k = 0; k <= 8; ++k) {
            const int expected = k % 2 == 0 ? 1 : -1;
            CHECK(spec.parities[k] == expected);
            CHECK(std::abs(expectation(parity, spec.state(k)).real() - expected) < 1e-8);
        }
    }
}

TEST_CASE("eigenvector phase convention") {
    const Spectrum spec = kpo_spectrum(KpoParams{4.7, 31});
    for (int k = 0; k < 12; ++k) {
        const StateVector v = spec.state(k);
        Eigen::Index idx;
        v.cwiseAbs().maxCoeff(&idx);
        CHECK(std::abs(v(idx).imag()) < 1e-14);
        CHECK(v(idx).real() > 0.0);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("labeling rejects Hamiltonians that break parity") {
    const KpoParams params{2.9, 31};
    const Operator a = annihilation_operator(31);
    const Operator h = build_kpo_hamiltonian(params) + 0.05 * (a + a.adjoint());
    CHECK_THROWS_AS(diagonalize_and_label(h, params), LabelingError);
}

TEST_CASE("analytic cat states") {
    CHECK_THROWS_AS(cat_state(KpoParams{0.0, 31}, -1), DomainError);
    const StateVector vac = cat_state(KpoParams{0.0, 31}, +1);
    CHECK(std::abs(std::abs(vac(0)) - 1.0) < 1e-15);

    const CatPair cats = cat_states_analytic(KpoParams{2.9, 31});
    CHECK(std::abs(inner(cats.even, cats.odd)) < 1e-12);
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    CHECK(std::norm(inner(cats.even, spec.state(0))) > 1 - 1e-8);
    CHECK(std::norm(inner(cats.odd, spec.state(1))) > 1 - 1e-8);

    // At dim 31 the truncated top levels leave a residual of ~1e-6; dim 41 removes it.
    const KpoParams p47{4.7, 41};
    const CatPair cats47 = cat_states_analytic(p47);
    const Operator h = build_kpo_hamiltonian(p47);
    CHECK((h * cats47.even - half_p0_squared(4.7) * cats47.even).norm() < 1e-7);
    CHECK((h * cats47.odd - half_p0_squared(4.7) * cats47.odd).norm() < 1e-7);
}

TEST_CASE("computational basis") {
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    const QubitBasis basis = computational_basis(spec);
    CHECK(std::abs(inner(basis.zero, basis.one)) < 1e-12);
    CHECK(std::abs(basis.zero.norm() - 1.0) < 1e-12);
    CHECK(std::abs(basis.one.norm() - 1.0) < 1e-12);

    const StateVector alpha = coherent_state(std::sqrt(2.9), 31);
    const Complex overlap = inner(basis.zero, alpha);
    CHECK(overlap.real() > 0.0);
    CHECK(std::norm(overlap) > 1 - 1e-5);
    CHECK(std::norm(inner(basis.one, coherent_state(-std::sqrt(2.9), 31))) > 1 - 1e-5);

    // Flipping the sign convention of |E_1> exchanges the two basis states.
    const StateVector zero_flipped = (basis.ground0 - basis.ground1) / std::sqrt(2.0);
    CHECK((zero_flipped - basis.one).norm() < 1e-12);
}

TEST_CASE("selection rules") {
    for (double p0 : {1.0, 2.9, 4.7, 8.0}) {
        CAPTURE(p0);
        const Spectrum spec = kpo_spectrum(KpoParams{p0, p0 > 7.5 ? 41 : 31});
        for (int k = 0; k <= 10; ++k) {
            for (int l = 0; l <= 10; ++l) {
                if ((k + l) % 2 == 0) {
                    CHECK(std::abs(drive_matrix_element(spec, DriveKind::SinglePhoton, k, l)) < 1e-10);
                } else {
                    CHECK(std::abs(drive_matrix_element(spec, DriveKind::TwoPhoton, k, l)) < 1e-10);
                }
            }
        }
    }
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    CHECK(std::abs(drive_matrix_element(spec, DriveKind::TwoPhoton, 0, 1)) < 1e-14);
    CHECK(std::abs(drive_matrix_element(spec, DriveKind::TwoPhoton, 1, 0)) < 1e-14);
    CHECK(std::abs(drive_matrix_element(spec, DriveKind::SinglePhoton, 0, 2)) < 1e-12);
}

TEST_CASE("ground-pair coupling approaches sqrt(p0) at large p0") {
    const Spectrum spec = kpo_spectrum(KpoParams{8.0, 41});
    const double m = std::abs(drive_matrix_element(spec, DriveKind::SinglePhoton, 0, 1));
    CHECK(std::abs(m - std::sqrt(8.0)) < 0.05 * std::sqrt(8.0));
}

TEST_CASE("<E_1|a|E_4> peaks near p0/K = 2.9") {
    double best_p0 = 0.0, best = 0.0;
    std::vector<double> values;
    for (double p0 = 1.5; p0 <= 4.5 + 1e-9; p0 += 0.05) {
        const Spectrum spec = kpo_spectrum(KpoParams{p0, 31});
        const double m = std::abs(drive_matrix_element(spec, DriveKind::SinglePhoton, 1, 4));
        values.push_back(m);
        if (m > best) {
            best = m;
            best_p0 = p0;
        }
    }
    CAPTURE(best_p0);
    // Interior maximum, not an edge of the scanned interval.
    CHECK(best > values.front());
    CHECK(best > values.back());
    CHECK(std::abs(best_p0 - 2.9) < 0.4);
}

TEST_CASE("transition frequencies at the single-photon operating point") {
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    CHECK(xi(spec, 0) == 0.0);
    CHECK(std::abs(xi(spec, 1)) < 1e-8);
    // w_d = 7.79 sits between xi_3 and xi_4.
    CHECK(xi(spec, 3) < 7.79);
    CHECK(xi(spec, 4) > 7.79);
    CHECK(std::abs(xi(spec, 4) - 7.79) < 0.6);
    CHECK(std::abs(xi(spec, 3) - 7.79) < 3.0);
}

TEST_CASE("excited states pair up at large p0") {
    double previous23 = 1e9, previous45 = 1e9;
    for (double p0 = 5.0; p0 <= 8.0 + 1e-9; p0 += 0.25) {
        const Spectrum spec = kpo_spectrum(KpoParams{p0, 41});
        const double gap23 = spec.energy(2) - spec.energy(3);
        const double gap45 = spec.energy(4) - spec.energy(5);
        CHECK(gap23 < previous23);
        CHECK(gap45 < previous45);
        previous23 = gap23;
        previous45 = gap45;
    }
    CHECK(previous23 < 0.2);
}

TEST_CASE("labels are continuous in p0") {
    for (double p0 = 0.1; p0 <= 7.0; p0 += 0.3) {
        CAPTURE(p0);
        const Spectrum a = kpo_spectrum(KpoParams{p0, 31});
        const Spectrum b = kpo_spectrum(KpoParams{p0 + 0.01, 31});
        for (int k = 0; k <= 6; ++k) CHECK(std::norm(inner(a.state(k), b.state(k))) > 0.99);
    }
}

TEST_CASE("truncation convergence from dim 31 to 41") {
    for (double p0 : {0.5, 1.0, 2.9, 4.2, 4.7, 5.0}) {
        CAPTURE(p0);
        const Spectrum a = kpo_spectrum(KpoParams{p0, 31});
        const Spectrum b = kpo_spectrum(KpoParams{p0, 41});
        for (int k = 0; k <= 6; ++k) CHECK(std::abs(a.energy(k) - b.energy(k)) < 1e-8);
    }
}

TEST_CASE("drive kinds") {
    CHECK(parse_drive_kind("single") == DriveKind::SinglePhoton);
    CHECK(parse_drive_kind("two") == DriveKind::TwoPhoton);
    CHECK_THROWS_AS(parse_drive_kind("three"), DomainError);
    const Operator a = annihilation_operator(8);
    CHECK(max_abs(drive_operator(DriveKind::TwoPhoton, 8) - 0.5 * a * a) < 1e-15);
    CHECK(drive_parity(DriveKind::SinglePhoton) == -1);
    CHECK(drive_parity(DriveKind::TwoPhoton) == 1);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(KpoParams({8.0, 31}).validate(), TruncationError);
    CHECK_THROWS_AS(KpoParams({-1.0, 31}).validate(), DomainError);
    CHECK_THROWS_AS(KpoParams({1.0, 1}).validate(), InvalidDimension);
}
