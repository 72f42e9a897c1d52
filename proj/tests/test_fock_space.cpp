#include <cmath>

#include <doctest.h>

#include "kpo/errors.hpp"
#include "kpo/fock_space.hpp"
#include "kpo/spectrum.hpp"

using namespace kpo;

TEST_CASE("annihilation operator has the ladder pattern") {
    const Operator a2 = annihilation_operator(2);
    CHECK(a2(0, 1) == Complex(1.0, 0.0));
    CHECK(a2(0, 0) == Complex(0.0, 0.0));
    CHECK(a2(1, 0) == Complex(0.0, 0.0));
    CHECK(a2(1, 1) == Complex(0.0, 0.0));

    const Operator a4 = annihilation_operator(4);
    CHECK(a4(2, 3).real() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (c != r + 1) CHECK(a4(r, c) == Complex(0.0, 0.0));
        }
    }
    CHECK(max_abs(creation_operator(6) - annihilation_operator(6).adjoint()) == 0.0);
}

TEST_CASE("invalid dimensions are rejected") {
    CHECK_THROWS_AS(annihilation_operator(1), InvalidDimension);
    CHECK_THROWS_AS(parity_operator(0), InvalidDimension);
    CHECK_THROWS_AS(fock_state(5, 5), DomainError);
}

TEST_CASE("number operator counts photons") {
    const StateVector five = fock_state(5, 31);
    const StateVector image = number_operator(31) * five;
    CHECK((image - 5.0 * five).norm() < 1e-15);
    CHECK(std::abs(expectation(number_operator(31), fock_state(0, 31))) == 0.0);
}

TEST_CASE("parity operator") {
    const Operator p3 = parity_operator(3);
    CHECK(p3(0, 0).real() == 1.0);
    CHECK(p3(1, 1).real() == -1.0);
    CHECK(p3(2, 2).real() == 1.0);
    CHECK(max_abs(p3 - p3.diagonal().asDiagonal().toDenseMatrix()) == 0.0);

    const Operator p = parity_operator(31);
    CHECK(max_abs(p * p - identity_operator(31)) == 0.0);
    const Operator a = annihilation_operator(31);
    CHECK(max_abs(p * a + a * p) < 1e-12);

    const Operator h = build_kpo_hamiltonian(KpoParams{2.9, 31});
    CHECK(max_abs(h * p - p * h) < 1e-12);
}

TEST_CASE("commutator is the identity away from the truncation edge") {
    const int dim = 31;
    const Operator a = annihilation_operator(dim);
    const Operator comm = a * a.adjoint() - a.adjoint() * a;
    // sqrt(n)^2 is not always n in binary floating point, so "exact" means a few ulps.
    CHECK(max_abs(comm.topLeftCorner(dim - 1, dim - 1) - identity_operator(dim - 1)) < 1e-13);
    CHECK(comm(dim - 1, dim - 1).real() == doctest::Approx(-(dim - 1)));
}

TEST_CASE("coherent states") {
    const StateVector vac = coherent_state(0.0, 31);
    CHECK(std::abs(vac(0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(vac.tail(30).norm() == 0.0);

    for (double n = 0.0; n <= 7.0; n += 0.25) {
        CHECK(std::abs(coherent_state(std::sqrt(n), 31).norm() - 1.0) < 1e-9);
    }

    const double alpha47 = std::sqrt(4.7);
    const StateVector c47 = coherent_state(alpha47, 31);
    CHECK((annihilation_operator(31) * c47 - alpha47 * c47).norm() < 1e-6);

    const double alpha = std::sqrt(2.9);
    const StateVector c = coherent_state(alpha, 31);
    CHECK(std::abs(expectation(number_operator(31), c) - 2.9) < 1e-6);
    CHECK(std::abs(expectation(parity_operator(31), c).real() - std::exp(-2 * 2.9)) < 1e-6);

    // Overlap of opposite coherent states: e^{-4 alpha^2}.
    const double overlap = std::norm(inner(coherent_state(alpha, 31), coherent_state(-alpha, 31)));
    CHECK(overlap == doctest::Approx(std::exp(-4 * 2.9)).epsilon(1e-9));
    CHECK(std::abs(overlap - 9.2e-6) < 1e-7);

    CHECK_THROWS_AS(coherent_state(std::sqrt(7.6), 31), TruncationError);
    CHECK(tail_population(c) < 1e-6);
}

TEST_CASE("expectation and inner product check dimensions") {
    CHECK_THROWS_AS(expectation(number_operator(4), fock_state(0, 5)), DimensionMismatch);
    CHECK_THROWS_AS(inner(fock_state(0, 4), fock_state(0, 5)), DimensionMismatch);
    const StateVector psi = coherent_state(Complex(0.3, -0.4), 10);
    const DensityOperator rho = projector(psi);
    const Operator n = number_operator(10);
    CHECK(std::abs(expectation(n, rho) - expectation(n, psi)) < 1e-14);
    CHECK(std::abs(tail_population(rho) - tail_population(psi)) < 1e-16);
}
