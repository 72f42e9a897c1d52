#pragma once

#include <functional>

#include "kpo/pulse.hpp"

namespace kpo {

/// Rotating-wave two-level reduction around one ground state g and its most
/// nearly resonant, parity-allowed partner e.
struct TwoLevelReduction {
    int g = 0;
    int e = 2;
    /// delta_ge = ((E_g - E_e) - w_d) / 2, units of K.
    double delta = 0.0;
    /// |<E_g|O|E_e>|; gamma(t) = gamma_scale * p_d(t).
    double gamma_scale = 0.0;
    DriveKind kind = DriveKind::SinglePhoton;
};

inline constexpr double kDefaultResonanceWindow = 5.0;

/// Picks e minimizing |delta_ge| among excited states below the spectrum's
/// reliable cutoff with a nonzero coupling. `window` bounds the drive
/// detuning |w_d - (E_g - E_e)| = 2|delta|. Throws NoResonanceError.
TwoLevelReduction two_level_reduction(const Spectrum& spec, const DriveSpec& drive, int g,
                                      double window = kDefaultResonanceWindow);

struct PhaseIntegral {
    double theta = 0.0;
    /// delta = 0 with nonzero coupling; sgn(0) taken as +1.
    bool sign_ambiguous = false;
};

/// theta_g = sgn(delta) * int_0^T (sqrt(delta^2 + gamma(t)^2) - |delta|) dt.
PhaseIntegral theta_g(const TwoLevelReduction& red, const PulseParams& pulse);
/// Same with an arbitrary envelope p(t) on [0, T].
PhaseIntegral theta_g(const TwoLevelReduction& red, const std::function<double(double)>& envelope,
                      double K_T);

/// theta_0 - theta_1 on (-pi, pi].
double predicted_rotation(double theta0, double theta1);

struct TwoLevelEigensystem {
    double omega = 0.0;  // eigenvalues are +omega and -omega
    Eigen::Vector2d u_plus;
    Eigen::Vector2d u_minus;
    bool degenerate = false;
};

/// Eigensystem of [[delta, gamma], [gamma, -delta]]:
/// u_+- = (sqrt(1 +- delta/Omega), +-sqrt(1 -+ delta/Omega)) / sqrt2 for gamma >= 0.
/// A negative gamma flips the sign of the second components.
TwoLevelEigensystem two_level_eigensystem(double delta, double gamma);

/// Both ground-state reductions and the resulting Rx angle.
struct AdiabaticPrediction {
    TwoLevelReduction ground0;
    TwoLevelReduction ground1;
    PhaseIntegral theta0;
    PhaseIntegral theta1;
    double rotation = 0.0;
};

AdiabaticPrediction predict_rotation(const Spectrum& spec, const DriveSpec& drive,
                                     double window = kDefaultResonanceWindow);

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10);

}  // namespace kpo
