#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "kpo/errors.hpp"

namespace kpo::ode {

struct StepControl {
    /// A step is accepted when its max-abs local error estimate is <= tol.
    double tol = 1e-10;
    std::size_t max_steps = 5'000'000;
    double initial_step = 1e-2;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    double max_step_error = 0.0;
    /// Sum of accepted local error estimates; a bound-like estimate of the
    /// global error of the final state.
    double error_estimate = 0.0;
};

/// Dormand-Prince 5(4) with FSAL and Hairer's 4th-order continuous extension.
///
/// State is any Eigen dense type. `rhs(t, y)` returns dy/dt. Samples must be
/// sorted and lie in [t0, t1]; `on_sample(i, y)` receives the dense-output
/// state at samples[i]. `on_step(t, y)` sees every accepted step. Returns the
/// state at t1.
template <class State, class Rhs, class OnSample, class OnStep>
State dopri5(Rhs&& rhs, State y, double t0, double t1, std::span<const double> samples,
             const StepControl& control, StepStats& stats, OnSample&& on_sample,
             OnStep&& on_step) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    std::size_t next_sample = 0;
    while (next_sample < samples.size() && samples[next_sample] <= t0) {
        on_sample(next_sample, y);
        ++next_sample;
    }
    if (t1 <= t0) return y;

    double t = t0;
    double h = std::min(control.initial_step, t1 - t0);
    State k1 = rhs(t, y);
    ++stats.rhs_evaluations;
    State k2, k3, k4, k5, k6, k7, y_new, err;

    while (t < t1) {
        if (stats.accepted + stats.rejected >= control.max_steps) {
            throw IntegrationError("step budget of " + std::to_string(control.max_steps) +
                                   " exhausted at t = " + std::to_string(t));
        }
        const bool last = (t + h >= t1);
        if (last) h = t1 - t;
        const double t_end = last ? t1 : t + h;

        k2 = rhs(t + c2 * h, (y + h * (a21 * k1)).eval());
        k3 = rhs(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
        k4 = rhs(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
        k5 = rhs(t + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
        k6 = rhs(t_end,
                 (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
        y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = rhs(t_end, y_new);
        stats.rhs_evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err_norm = err.cwiseAbs().maxCoeff();
        const double allowed = control.tol;
        if (!std::isfinite(err_norm)) {
            throw IntegrationError("non-finite error estimate at t = " + std::to_string(t));
        }

        if (err_norm <= allowed) {
            // Dense output over [t, t_end] for any samples inside.
            if (next_sample < samples.size() && samples[next_sample] <= t_end) {
                const State diff = y_new - y;
                const State bspl = h * k1 - diff;
                const State r4 = diff - h * k7 - bspl;
                const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_sample < samples.size() && samples[next_sample] <= t_end) {
                    const double s = samples[next_sample];
                    if (s >= t_end) {
                        on_sample(next_sample, y_new);
                    } else {
                        const double th = (s - t) / h;
                        const double th1 = 1.0 - th;
                        const State ys = y + th * (diff + th1 * (bspl + th * (r4 + th1 * r5)));
                        on_sample(next_sample, ys);
                    }
                    ++next_sample;
                }
            }
            t = t_end;
            y = y_new;
            k1 = k7;
            ++stats.accepted;
            stats.max_step_error = std::max(stats.max_step_error, err_norm);
            stats.error_estimate += err_norm;
            on_step(t, y);
        } else {
            ++stats.rejected;
        }

        const double ratio = err_norm > 0.0 ? allowed / err_norm : 1e4;
        const double factor = std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw IntegrationError("step size underflow at t = " + std::to_string(t));
        }
    }
    return y;
}

}  // namespace kpo::ode
