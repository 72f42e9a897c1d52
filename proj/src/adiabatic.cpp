#include "kpo/adiabatic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kpo/gate.hpp"

namespace kpo {

namespace {

constexpr double kCouplingFloor = 1e-8;

double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b == a) return 0.0;
    // Seed with a few panels so narrow features are not missed by the first estimate.
    constexpr int panels = 16;
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == panels) ? b : lo + width;
        const double flo = f(lo);
        const double fhi = f(hi);
        const double fmid = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, tol / panels, 40);
    }
    return total;
}

TwoLevelReduction two_level_reduction(const Spectrum& spec, const DriveSpec& drive, int g,
                                      double window) {
    if (g != 0 && g != 1) throw DomainError("ground index must be 0 or 1");
    const int dim = spec.dim();
    const int limit = std::min(spec.reliable_cutoff, dim);
    const Operator op = drive_operator(drive.kind, dim);
    const StateVector bra = spec.eigenstates.col(g);
    const StateVector op_dag_bra = op.adjoint() * bra;  // <E_g|O|E_e> = (O^dagger E_g)^dagger E_e

    TwoLevelReduction best;
    best.g = g;
    best.kind = drive.kind;
    bool found = false;
    for (int e = 2; e < limit; ++e) {
        const double coupling = std::abs(op_dag_bra.dot(spec.eigenstates.col(e)));
        if (coupling < kCouplingFloor) continue;
        const double delta = 0.5 * ((spec.energy(g) - spec.energy(e)) - drive.wd_over_K);
        if (2.0 * std::abs(delta) > window) continue;
        if (!found || std::abs(delta) < std::abs(best.delta)) {
            best.e = e;
            best.delta = delta;
            best.gamma_scale = coupling;
            found = true;
        }
    }
    if (!found) {
        throw NoResonanceError("no parity-allowed excited state within detuning window " +
                               std::to_string(window) + " of ground state " + std::to_string(g));
    }
    return best;
}

PhaseIntegral theta_g(const TwoLevelReduction& red, const std::function<double(double)>& envelope,
                      double K_T) {
    const double delta = red.delta;
    const double abs_delta = std::abs(delta);
    const double scale = red.gamma_scale;
    // sqrt(d^2 + g^2) - |d| = g^2 / (sqrt(d^2 + g^2) + |d|), cancellation-free.
    auto integrand = [&](double t) {
        const double gamma = scale * envelope(t);
        const double g2 = gamma * gamma;
        if (g2 == 0.0) return 0.0;
        return g2 / (std::sqrt(delta * delta + g2) + abs_delta);
    };
    const double magnitude = adaptive_simpson(integrand, 0.0, K_T, 1e-10);
    PhaseIntegral out;
    out.sign_ambiguous = (delta == 0.0 && magnitude > 0.0);
    out.theta = (delta < 0.0) ? -magnitude : magnitude;
    return out;
}

PhaseIntegral theta_g(const TwoLevelReduction& red, const PulseParams& pulse) {
    pulse.validate();
    return theta_g(red, [&](double t) { return pulse_amplitude(t, pulse); }, pulse.K_T);
}

double predicted_rotation(double theta0, double theta1) {
    return canonical_angle(theta0 - theta1);
}

TwoLevelEigensystem two_level_eigensystem(double delta, double gamma) {
    TwoLevelEigensystem sys;
    sys.omega = std::hypot(delta, gamma);
    if (sys.omega == 0.0) {
        sys.degenerate = true;
        sys.u_plus = Eigen::Vector2d(1.0, 0.0);
        sys.u_minus = Eigen::Vector2d(0.0, 1.0);
        return sys;
    }
    const double r = delta / sys.omega;
    const double s = 1.0 / std::sqrt(2.0);
    const double sign = gamma < 0.0 ? -1.0 : 1.0;
    sys.u_plus = s * Eigen::Vector2d(std::sqrt(1.0 + r), sign * std::sqrt(std::max(0.0, 1.0 - r)));
    sys.u_minus =
        s * Eigen::Vector2d(std::sqrt(std::max(0.0, 1.0 - r)), -sign * std::sqrt(1.0 + r));
    return sys;
}

AdiabaticPrediction predict_rotation(const Spectrum& spec, const DriveSpec& drive, double window) {
    AdiabaticPrediction p;
    p.ground0 = two_level_reduction(spec, drive, 0, window);
    p.ground1 = two_level_reduction(spec, drive, 1, window);
    p.theta0 = theta_g(p.ground0, drive.pulse);
    p.theta1 = theta_g(p.ground1, drive.pulse);
    p.rotation = predicted_rotation(p.theta0.theta, p.theta1.theta);
    return p;
}

}  // namespace kpo
