#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "kpo/experiments.hpp"

namespace kpo::experiments {

namespace {

double angle_gap(double theta, double target) { return std::abs(canonical_angle(theta - target)); }

GateSetup make_setup(const KpoParams& kpo, DriveKind kind, double wd, double pd1, double tau,
                     double T) {
    GateSetup s;
    s.kpo = kpo;
    s.drive.kind = kind;
    s.drive.wd_over_K = wd;
    s.drive.pulse = PulseParams{pd1, tau, T};
    return s;
}

}  // namespace

std::vector<double> Range::values() const {
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(min + static_cast<double>(i) * step);
    return out;
}

void Range::validate(const char* name) const {
    if (!(step > 0.0)) throw DomainError(std::string(name) + ": step must be > 0");
    if (!(max >= min)) throw DomainError(std::string(name) + ": max must be >= min");
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) throw DomainError("invalid log grid");
    const double decades = std::log10(hi / lo);
    const long n = std::lround(decades * per_decade);
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) {
        out.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    }
    out.back() = hi;
    return out;
}

void ScanGrid::validate() const {
    wd_over_K.validate("w_d grid");
    pd1_over_K.validate("pd1 grid");
    kpo.validate();
    PulseParams{0.0, K_tau, K_T}.validate();
}

Range window_around_xi(const Spectrum& spec, int k, double half_width, double step) {
    const double center = xi(spec, k);
    // Snap the window to the step so grids are reproducible across p0 values.
    const double lo = std::round((center - half_width) / step) * step;
    return Range{lo, lo + 2.0 * half_width, step};
}

std::vector<SpectrumRow> spectrum_table(const std::vector<double>& p0_values, int dim, int kmax) {
    std::vector<SpectrumRow> rows;
    for (double p0 : p0_values) {
        const Spectrum spec = kpo_spectrum(KpoParams{p0, dim});
        for (int k = 0; k <= std::min(kmax, dim - 1); ++k) {
            rows.push_back({p0, k, spec.energy(k), spec.parities[k]});
        }
    }
    return rows;
}

std::vector<MatrixElementRow> matrix_element_table(const std::vector<double>& p0_values, int dim,
                                                   DriveKind kind, int kmax) {
    std::vector<MatrixElementRow> rows;
    for (double p0 : p0_values) {
        const Spectrum spec = kpo_spectrum(KpoParams{p0, dim});
        for (int g = 0; g < 2; ++g) {
            for (int k = 0; k <= std::min(kmax, dim - 1); ++k) {
                const Complex m = drive_matrix_element(spec, kind, g, k);
                const double sign = m.real() < 0.0 ? -1.0 : 1.0;
                rows.push_back({p0, g, k, sign * std::abs(m)});
            }
        }
    }
    return rows;
}

std::vector<ScanPoint> gate_scan(const ScanGrid& grid, const EvolveOptions& options,
                                 unsigned jobs) {
    grid.validate();
    const std::vector<double> wds = grid.wd_over_K.values();
    const std::vector<double> pd1s = grid.pd1_over_K.values();
    const Spectrum spec = kpo_spectrum(grid.kpo);
    GateOptions gate_options;
    gate_options.evolve = options;

    return parallel_map<ScanPoint>(wds.size() * pd1s.size(), jobs, [&](std::size_t i) {
        ScanPoint p;
        p.wd_over_K = wds[i / pd1s.size()];
        p.pd1_over_K = pd1s[i % pd1s.size()];
        const GateSetup setup =
            make_setup(grid.kpo, grid.kind, p.wd_over_K, p.pd1_over_K, grid.K_tau, grid.K_T);
        try {
            p.result = simulate_gate(setup, spec, gate_options).result;
            p.ok = true;
        } catch (const Error& e) {
            p.result.params_echo = setup;
            p.error = e.what();
        }
        return p;
    });
}

std::vector<BestAngle> best_per_frequency(const std::vector<ScanPoint>& points,
                                          double threshold) {
    std::map<double, BestAngle> best;
    for (const ScanPoint& p : points) {
        auto [it, inserted] =
            best.try_emplace(p.wd_over_K, BestAngle{p.wd_over_K, false, 0.0, 1.0, 0.0});
        BestAngle& b = it->second;
        if (!p.ok || p.one_minus_F() >= threshold) continue;
        if (!b.found || std::abs(p.result.theta_star) > std::abs(b.theta)) {
            b = BestAngle{p.wd_over_K, true, p.result.theta_star, p.one_minus_F(), p.pd1_over_K};
        }
    }
    std::vector<BestAngle> out;
    for (const auto& [wd, b] : best) out.push_back(b);
    return out;
}

std::size_t high_fidelity_count(const std::vector<ScanPoint>& points, double min_abs_theta,
                                double threshold) {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [&](const ScanPoint& p) {
        return p.ok && p.one_minus_F() < threshold &&
               std::abs(p.result.theta_star) >= min_abs_theta;
    }));
}

std::vector<LossPoint> loss_scan(const GateSetup& setup, const std::vector<double>& kappas,
                                 const EvolveOptions& options, unsigned jobs) {
    const Spectrum spec = kpo_spectrum(setup.kpo);
    GateOptions gate_options;
    gate_options.evolve = options;
    gate_options.force_lindblad = true;
    return parallel_map<LossPoint>(kappas.size(), jobs, [&](std::size_t i) {
        LossPoint p{kappas[i], false, {}, {}, {}};
        GateSetup s = setup;
        s.kappa_over_K = kappas[i];
        try {
            const GateRun run = simulate_gate(s, spec, gate_options);
            p.result = run.result;
            p.stats = run.stats;
            p.ok = true;
        } catch (const Error& e) {
            p.result.params_echo = s;
            p.error = e.what();
        }
        return p;
    });
}

LinearFit fit_small_kappa(const std::vector<LossPoint>& points, double kappa_max) {
    std::vector<double> xs, ys;
    for (const LossPoint& p : points) {
        if (p.ok && p.kappa_over_K <= kappa_max) {
            xs.push_back(p.kappa_over_K);
            ys.push_back(1.0 - p.result.fidelity);
        }
    }
    LinearFit fit;
    fit.points = xs.size();
    if (xs.size() < 2) throw DomainError("linear fit needs at least two points");
    Eigen::MatrixXd design(xs.size(), 2);
    Eigen::VectorXd rhs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = xs[i];
        rhs(i) = ys[i];
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    fit.epsilon = coef(0);
    fit.eta = coef(1);
    fit.max_residual = (design * coef - rhs).cwiseAbs().maxCoeff();
    fit.range = rhs.maxCoeff() - rhs.minCoeff();
    return fit;
}

GateSetup single_photon_gate() {
    return make_setup(KpoParams{2.9, kDefaultDim}, DriveKind::SinglePhoton, 7.79, 0.865, 3.9, 10.0);
}

GateSetup two_photon_gate() {
    return make_setup(KpoParams{4.7, kDefaultDim}, DriveKind::TwoPhoton, 16.55, 0.383, 2.4, 10.0);
}

GateSetup fast_single_photon_gate() {
    return make_setup(KpoParams{2.9, kDefaultDim}, DriveKind::SinglePhoton, 7.78, 0.848, 2.3, 9.1);
}

GateSetup fast_two_photon_gate() {
    return make_setup(KpoParams{4.2, kDefaultDim}, DriveKind::TwoPhoton, 20.51, 0.732, 1.0, 6.4);
}

CalibrationResult calibrate(const CalibrationRequest& request, const EvolveOptions& options,
                            unsigned jobs) {
    request.kpo.validate();
    const double target = canonical_angle(request.target_theta);
    const Spectrum spec = kpo_spectrum(request.kpo);
    GateOptions gate_options;
    gate_options.evolve = options;

    CalibrationResult out;
    auto run_at = [&](double wd, double pd1) {
        ++out.simulations;
        return simulate_gate(make_setup(request.kpo, request.kind, wd, pd1, request.K_tau,
                                        request.K_T),
                             spec, gate_options)
            .result;
    };

    if (std::abs(target) < 1e-12) {
        out.wd_over_K = request.wd_over_K.min;
        out.pd1_over_K = 0.0;
        out.result = run_at(out.wd_over_K, 0.0);
        return out;
    }

    ScanGrid grid;
    grid.wd_over_K = request.wd_over_K;
    grid.pd1_over_K = request.pd1_over_K;
    grid.kpo = request.kpo;
    grid.kind = request.kind;
    grid.K_tau = request.K_tau;
    grid.K_T = request.K_T;
    const std::vector<ScanPoint> coarse = gate_scan(grid, options, jobs);
    out.simulations += coarse.size();
    const std::size_t columns = grid.pd1_over_K.values().size();

    auto signed_gap = [&](double theta) { return canonical_angle(theta - target); };

    double closest = std::numeric_limits<double>::infinity();
    for (const ScanPoint& p : coarse) {
        if (p.ok) closest = std::min(closest, angle_gap(p.result.theta_star, target));
    }
    if (!(closest < request.acceptance_window)) {
        std::ostringstream msg;
        msg << "no grid point within " << request.acceptance_window << " rad of target " << target
            << " (closest miss " << closest << " rad over " << coarse.size() << " points)";
        throw CalibrationError(msg.str());
    }

    struct Candidate {
        double wd;
        double pd1;
        GateResult result;
    };
    // Deque: refinement keeps pointers to candidates while appending more.
    std::deque<Candidate> candidates;
    for (const ScanPoint& p : coarse) {
        if (p.ok && angle_gap(p.result.theta_star, target) < request.acceptance_window) {
            candidates.push_back({p.wd_over_K, p.pd1_over_K, p.result});
        }
    }

    // Adjacent pd1 points whose angles straddle the target. The jump check
    // skips pairs that only straddle through the branch cut at +-pi.
    struct Crossing {
        const ScanPoint* lo;
        const ScanPoint* hi;
        double estimated_error;
    };
    std::vector<Crossing> crossings;
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        if ((i + 1) % columns == 0) continue;
        const ScanPoint& a = coarse[i];
        const ScanPoint& b = coarse[i + 1];
        if (!a.ok || !b.ok) continue;
        const double ga = signed_gap(a.result.theta_star);
        const double gb = signed_gap(b.result.theta_star);
        if (ga * gb > 0.0 || std::abs(ga - gb) >= request.acceptance_window * 2.0) continue;
        const double w = ga == gb ? 0.5 : ga / (ga - gb);
        crossings.push_back({&a, &b, (1.0 - w) * a.one_minus_F() + w * b.one_minus_F()});
    }
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& l, const Crossing& r) {
        return l.estimated_error < r.estimated_error;
    });
    if (static_cast<int>(crossings.size()) > request.refine_columns) {
        crossings.resize(static_cast<std::size_t>(std::max(0, request.refine_columns)));
    }

    // Illinois regula falsi on pd1 inside [x0, x1]; every evaluation becomes a candidate.
    auto solve_pd1 = [&](double wd, double x0, double f0, double x1, double f1) -> const Candidate* {
        const Candidate* last = nullptr;
        for (int iter = 0; iter < 30 && f0 != 0.0 && f1 != 0.0; ++iter) {
            const double x = x1 - f1 * (x1 - x0) / (f1 - f0);
            GateResult r;
            try {
                r = run_at(wd, x);
            } catch (const Error&) {
                break;
            }
            candidates.push_back({wd, x, r});
            last = &candidates.back();
            const double fx = signed_gap(r.theta_star);
            if (std::abs(fx) < 0.1 * request.angle_tolerance) break;
            if (fx * f1 < 0.0) {
                x0 = x1;
                f0 = f1;
            } else {
                f0 *= 0.5;
            }
            x1 = x;
            f1 = fx;
        }
        return last;
    };

    const Candidate* best_root = nullptr;
    double best_pd1_width = request.pd1_over_K.step;
    for (const Crossing& c : crossings) {
        const Candidate* root =
            solve_pd1(c.lo->wd_over_K, c.lo->pd1_over_K, signed_gap(c.lo->result.theta_star),
                      c.hi->pd1_over_K, signed_gap(c.hi->result.theta_star));
        if (root && angle_gap(root->result.theta_star, target) < request.angle_tolerance &&
            (!best_root || root->result.fidelity > best_root->result.fidelity)) {
            best_root = root;
        }
    }

    // The best root sits on a grid column; follow the theta* = target curve
    // between the neighbouring columns with a golden-section search on w_d.
    if (best_root) {
        const double wd0 = best_root->wd;
        double pd1_guess = best_root->pd1;
        auto error_at = [&](double wd) {
            // Bracket the crossing by expanding around the last root found.
            double h = 0.02 * best_pd1_width / 0.1;
            GateResult centre;
            try {
                centre = run_at(wd, pd1_guess);
            } catch (const Error&) {
                return 1.0;
            }
            candidates.push_back({wd, pd1_guess, centre});
            const double fc = signed_gap(centre.theta_star);
            if (std::abs(fc) < 0.1 * request.angle_tolerance) return 1.0 - centre.fidelity;
            for (int expand = 0; expand < 6; ++expand, h *= 2.0) {
                for (double x : {pd1_guess - h, pd1_guess + h}) {
                    if (x <= 0.0) continue;
                    GateResult r;
                    try {
                        r = run_at(wd, x);
                    } catch (const Error&) {
                        continue;
                    }
                    candidates.push_back({wd, x, r});
                    const double fx = signed_gap(r.theta_star);
                    if (fx * fc <= 0.0 && std::abs(fx - fc) < 2.0 * request.acceptance_window) {
                        const Candidate* root = solve_pd1(wd, pd1_guess, fc, x, fx);
                        if (!root || angle_gap(root->result.theta_star, target) >=
                                         request.angle_tolerance) {
                            return 1.0;
                        }
                        pd1_guess = root->pd1;
                        return 1.0 - root->result.fidelity;
                    }
                }
            }
            return 1.0;
        };
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = wd0 - request.wd_over_K.step, b = wd0 + request.wd_over_K.step;
        double c = b - invphi * (b - a), d = a + invphi * (b - a);
        double fc = error_at(c), fd = error_at(d);
        for (int iter = 0; iter < 12; ++iter) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = error_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = error_at(d);
            }
        }
    }

    const Candidate* best = nullptr;
    for (const Candidate& c : candidates) {
        if (angle_gap(c.result.theta_star, target) >= request.angle_tolerance) continue;
        if (!best || c.result.fidelity > best->result.fidelity) best = &c;
    }
    out.shortfall = (best == nullptr);
    if (!best) {
        for (const Candidate& c : candidates) {
            if (!best || angle_gap(c.result.theta_star, target) <
                             angle_gap(best->result.theta_star, target)) {
                best = &c;
            }
        }
    }
    out.wd_over_K = best->wd;
    out.pd1_over_K = best->pd1;
    out.result = best->result;
    return out;
}

std::vector<AdiabaticRow> adiabatic_check(const GateSetup& base, const std::vector<double>& pd1s,
                                          const EvolveOptions& options, unsigned jobs,
                                          double window) {
    const Spectrum spec = kpo_spectrum(base.kpo);
    GateOptions gate_options;
    gate_options.evolve = options;
    return parallel_map<AdiabaticRow>(pd1s.size(), jobs, [&](std::size_t i) {
        GateSetup s = base;
        s.kappa_over_K = 0.0;
        s.drive.pulse.pd1_over_K = pd1s[i];
        const AdiabaticPrediction prediction = predict_rotation(spec, s.drive, window);
        const GateResult full = simulate_gate(s, spec, gate_options).result;
        AdiabaticRow row;
        row.pd1_over_K = pd1s[i];
        row.theta_predicted = prediction.rotation;
        row.theta_full = full.theta_star;
        row.abs_error = angle_gap(prediction.rotation, full.theta_star);
        row.rel_error = std::abs(full.theta_star) < 1e-9 ? std::numeric_limits<double>::quiet_NaN()
                                               : row.abs_error / std::abs(full.theta_star);
        return row;
    });
}

}  // namespace kpo::experiments
