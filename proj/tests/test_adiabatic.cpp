#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "kpo/adiabatic.hpp"
#include "kpo/errors.hpp"
#include "kpo/gate.hpp"

using namespace kpo;

namespace {

constexpr double kPi = std::numbers::pi;

// Exact two-level dynamics i d/dt (g, e) = [[0, gamma e^{2i delta t}], [gamma e^{-2i delta t}, 0]] (g, e)
// from (1, 0), by classical RK4. Returns the final ground amplitude.
Complex two_level_ground_amplitude(double delta, const std::function<double(double)>& gamma,
                                   double T, int steps) {
    using V = Eigen::Vector2cd;
    auto rhs = [&](double t, const V& y) {
        const Complex c = gamma(t) * std::exp(Complex(0.0, 2 * delta * t));
        return V(Complex(0, -1) * c * y(1), Complex(0, -1) * std::conj(c) * y(0));
    };
    V y(1.0, 0.0);
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const V k1 = rhs(t, y);
        const V k2 = rhs(t + h / 2, y + h / 2 * k1);
        const V k3 = rhs(t + h / 2, y + h / 2 * k2);
        const V k4 = rhs(t + h, y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y(0);
}

}  // namespace

TEST_CASE("resonant partners at the reference operating points") {
    const Spectrum s29 = kpo_spectrum(KpoParams{2.9, 31});
    const DriveSpec single{DriveKind::SinglePhoton, 7.79, PulseParams{0.865, 3.9, 10.0}};
    const TwoLevelReduction r0 = two_level_reduction(s29, single, 0);
    const TwoLevelReduction r1 = two_level_reduction(s29, single, 1);
    CHECK(r0.e == 3);
    CHECK(r1.e == 4);
    CHECK(r0.gamma_scale > 0.0);
    CHECK(r1.gamma_scale > 0.0);
    CHECK(r0.delta == doctest::Approx(0.5 * ((s29.energy(0) - s29.energy(3)) - 7.79)));
    CHECK(r1.delta == doctest::Approx(0.5 * ((s29.energy(1) - s29.energy(4)) - 7.79)));

    const Spectrum s47 = kpo_spectrum(KpoParams{4.7, 31});
    const DriveSpec two{DriveKind::TwoPhoton, 16.55, PulseParams{0.383, 2.4, 10.0}};
    const TwoLevelReduction t1 = two_level_reduction(s47, two, 1);
    CHECK(t1.e == 5);
    CHECK(t1.gamma_scale == doctest::Approx(std::abs(drive_matrix_element(s47, DriveKind::TwoPhoton, 1, 5))));

    // Tuned exactly to xi_5, the even ground state still cannot use |E_5>.
    DriveSpec tuned = two;
    tuned.wd_over_K = xi(s47, 5);
    const TwoLevelReduction t0 = two_level_reduction(s47, tuned, 0);
    CHECK(t0.e != 5);
    CHECK(t0.e % 2 == 0);
}

TEST_CASE("no partner inside the window") {
    const Spectrum spec = kpo_spectrum(KpoParams{2.9, 31});
    const DriveSpec far{DriveKind::SinglePhoton, -40.0, PulseParams{0.5, 3.9, 10.0}};
    CHECK_THROWS_AS(two_level_reduction(spec, far, 0), NoResonanceError);
    const DriveSpec near{DriveKind::SinglePhoton, 7.79, PulseParams{0.5, 3.9, 10.0}};
    CHECK_THROWS_AS(two_level_reduction(spec, near, 0, 1e-3), NoResonanceError);
}

TEST_CASE("phase integral") {
    TwoLevelReduction red;
    red.delta = 0.3;
    red.gamma_scale = 0.7;

    CHECK(theta_g(red, PulseParams{0.0, 2.0, 10.0}).theta == 0.0);

    // Rectangular envelope has a closed form.
    const double gamma0 = 0.45;
    const double T = 6.0;
    const auto rect = [&](double) { return gamma0 / red.gamma_scale; };
    const double closed = T * (std::sqrt(red.delta * red.delta + gamma0 * gamma0) - red.delta);
    CHECK(std::abs(theta_g(red, rect, T).theta - closed) < 1e-8);
    red.delta = -0.3;
    CHECK(std::abs(theta_g(red, rect, T).theta + closed) < 1e-8);

    // Sign follows delta and the magnitude grows with the drive.
    red.delta = 0.2;
    double previous = 0.0;
    for (double pd1 = 0.05; pd1 <= 1.5; pd1 += 0.05) {
        const double th = theta_g(red, PulseParams{pd1, 2.4, 10.0}).theta;
        CHECK(th > 0.0);
        CHECK(th >= previous);
        previous = th;
    }
    red.delta = -0.2;
    CHECK(theta_g(red, PulseParams{0.5, 2.4, 10.0}).theta < 0.0);

    red.delta = 0.0;
    const PhaseIntegral at_zero = theta_g(red, PulseParams{0.5, 2.4, 10.0});
    CHECK(at_zero.sign_ambiguous);
    CHECK(at_zero.theta > 0.0);
}

TEST_CASE("phase integral matches exact two-level dynamics for a slow pulse") {
    for (double delta : {0.4, -0.4}) {
        CAPTURE(delta);
        TwoLevelReduction red;
        red.delta = delta;
        red.gamma_scale = 1.0;
        const PulseParams slow{0.3, 40.0, 300.0};
        const double predicted = theta_g(red, slow).theta;
        const Complex g = two_level_ground_amplitude(
            delta, [&](double t) { return pulse_amplitude(std::min(t, slow.K_T), slow); }, slow.K_T,
            60000);
        CHECK(std::abs(std::abs(g) - 1.0) < 1e-3);
        const double exact = -std::arg(g);
        CAPTURE(predicted);
        CAPTURE(exact);
        CHECK(std::abs(canonical_angle(exact - predicted)) < 0.01 * std::abs(predicted));
    }
}

TEST_CASE("predicted rotation") {
    CHECK(predicted_rotation(kPi / 4, 0.0) == doctest::Approx(kPi / 4));
    CHECK(predicted_rotation(0.0, kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(predicted_rotation(2.0, -2.0) == doctest::Approx(4.0 - 2 * kPi));
}

TEST_CASE("two-level eigensystem") {
    const TwoLevelEigensystem off = two_level_eigensystem(0.5, 0.0);
    CHECK(off.omega == doctest::Approx(0.5));
    CHECK((off.u_plus - Eigen::Vector2d(1, 0)).norm() < 1e-15);

    const TwoLevelEigensystem res = two_level_eigensystem(0.0, 0.8);
    CHECK(res.omega == doctest::Approx(0.8));
    CHECK((res.u_plus - Eigen::Vector2d(1, 1) / std::sqrt(2.0)).norm() < 1e-15);
    CHECK((res.u_minus - Eigen::Vector2d(1, -1) / std::sqrt(2.0)).norm() < 1e-15);

    const TwoLevelEigensystem none = two_level_eigensystem(0.0, 0.0);
    CHECK(none.degenerate);
    CHECK(none.omega == 0.0);
    CHECK(std::abs(none.u_plus.dot(none.u_minus)) < 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double d = u(rng), g = u(rng);
        const TwoLevelEigensystem es = two_level_eigensystem(d, g);
        Eigen::Matrix2d m;
        m << d, g, g, -d;
        CHECK(std::abs(es.u_plus.norm() - 1.0) < 1e-14);
        CHECK(std::abs(es.u_minus.norm() - 1.0) < 1e-14);
        CHECK(std::abs(es.u_plus.dot(es.u_minus)) < 1e-14);
        CHECK((m * es.u_plus - es.omega * es.u_plus).norm() < 1e-13);
        CHECK((m * es.u_minus + es.omega * es.u_minus).norm() < 1e-13);
    }
}

TEST_CASE("adaptive Simpson") {
    CHECK(std::abs(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, kPi) - 2.0) < 1e-10);
    CHECK(std::abs(adaptive_simpson([](double x) { return std::exp(-x * x); }, -6.0, 6.0) -
                   std::sqrt(kPi)) < 1e-10);
}

TEST_CASE("prediction pieces fit together") {
    const Spectrum spec = kpo_spectrum(KpoParams{4.7, 31});
    const DriveSpec two{DriveKind::TwoPhoton, 16.55, PulseParams{0.383, 2.4, 10.0}};
    const AdiabaticPrediction p = predict_rotation(spec, two);
    CHECK(p.ground0.g == 0);
    CHECK(p.ground1.g == 1);
    CHECK(p.rotation == doctest::Approx(predicted_rotation(p.theta0.theta, p.theta1.theta)));
    // Same sense of rotation as the full gate (+pi/2).
    CHECK(p.rotation > 0.0);
}
