// kpo: command-line front end for the KPO continuous-gate simulator.
//
// Every subcommand writes one CSV (header row, '#' digest comment) and a
// JSON manifest next to it at <out>.manifest.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpo/experiments.hpp"

namespace ex = kpo::experiments;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kIntegrationFailure = 3,
    kTruncationFailure = 4,
    kCalibrationFailure = 5,
    kModelError = 6,
    kIoError = 7,
};

struct Flags {
    double p0 = 0, wd = 0, pd1 = 0, tau = 0, T = 0, kappa = 0;
    int dim = kpo::kDefaultDim;
    CLI::Option* dim_opt = nullptr;
    std::string drive = "single";
    double tol = 1e-10;
    std::string out;
    unsigned jobs = ex::default_jobs();
    long long seed = 0;

    // Options whose presence changes defaults; filled in by add_flags.
    CLI::Option *p0_opt = nullptr, *wd_opt = nullptr, *pd1_opt = nullptr, *tau_opt = nullptr,
                *T_opt = nullptr, *kappa_opt = nullptr, *drive_opt = nullptr,
                *seed_opt = nullptr;

    // Subcommand-specific knobs. They live on the top-level app so that a
    // flat config file can set any of them.
    double p0_min = 0.0, p0_max = 8.0, p0_step = 0.1;
    int kmax = -1;
    int samples = 500;
    int top_m = 5;
    std::string initial = "zero";
    double wd_min = 0, wd_max = 0, wd_step = 0.05;
    CLI::Option *wd_min_opt = nullptr, *wd_max_opt = nullptr;
    double pd1_min = 0.0, pd1_max = 2.0, pd1_step = 0.05;
    CLI::Option *pd1_step_opt = nullptr;
    int xi_index = 0;
    double kappa_min = 1e-5, kappa_max = 1e-2, fit_max = 1e-3;
    int per_decade = 8;
    double target_theta = 0.0;
    CLI::Option* target_opt = nullptr;
    int refine_columns = 8;
    double angle_tol = 0.01, acceptance_window = 0.3;
    std::vector<double> pd1_list{0.0, 0.02, 0.05, 0.1, 0.2, 0.4};
    double window = kpo::kDefaultResonanceWindow;
};

bool given(const CLI::Option* opt) { return opt && opt->count() > 0; }

void add_flags(CLI::App& app, Flags& f) {
    const char* phys = "Physical parameters";
    f.p0_opt = app.add_option("--p0-over-k", f.p0, "Two-photon pump p0/K")->group(phys);
    f.dim_opt = app.add_option("--dim", f.dim, "Fock-space truncation")->capture_default_str()->group(phys);
    f.drive_opt = app.add_option("--drive", f.drive, "Gate drive kind")
                      ->check(CLI::IsMember({"single", "two"}))
                      ->capture_default_str()
                      ->group(phys);
    f.wd_opt = app.add_option("--wd-over-k", f.wd, "Drive frequency w_d/K")->group(phys);
    f.pd1_opt = app.add_option("--pd1-over-k", f.pd1, "Pulse amplitude pd1/K")->group(phys);
    f.tau_opt = app.add_option("--k-tau", f.tau, "Pulse rise time K*tau")->group(phys);
    f.T_opt = app.add_option("--k-t", f.T, "Gate time K*T")->group(phys);
    f.kappa_opt = app.add_option("--kappa-over-k", f.kappa, "Single-photon loss rate kappa/K")
                      ->check(CLI::NonNegativeNumber)
                      ->group(phys);

    const char* run = "Run control";
    app.add_option("--tol", f.tol, "Integrator local error tolerance per step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->group(run);
    app.add_option("--out", f.out, "Output CSV path (default <command>.csv)")->group(run);
    app.add_option("--jobs", f.jobs, "Worker threads for scans")
        ->check(CLI::Range(1u, 4096u))
        ->capture_default_str()
        ->group(run);
    f.seed_opt = app.add_option("--seed", f.seed, "Reserved; nothing is stochastic yet")->group(run);

    const char* tables = "spectrum / matrix-elements";
    app.add_option("--p0-min", f.p0_min)->capture_default_str()->group(tables);
    app.add_option("--p0-max", f.p0_max)->capture_default_str()->group(tables);
    app.add_option("--p0-step", f.p0_step)->capture_default_str()->group(tables);
    app.add_option("--kmax", f.kmax, "Highest eigenstate index (default 8, or 10 for matrix elements)")
        ->group(tables);

    const char* evolve = "evolve";
    app.add_option("--samples", f.samples, "Output time intervals")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->group(evolve);
    app.add_option("--top-m", f.top_m, "Eigenstates tracked, ranked by final population")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->group(evolve);
    app.add_option("--initial", f.initial, "Initial qubit state")
        ->check(CLI::IsMember({"zero", "one"}))
        ->capture_default_str()
        ->group(evolve);

    const char* scan = "gate-scan / calibrate";
    f.wd_min_opt = app.add_option("--wd-min", f.wd_min)->group(scan);
    f.wd_max_opt = app.add_option("--wd-max", f.wd_max)->group(scan);
    app.add_option("--wd-step", f.wd_step)->capture_default_str()->group(scan);
    app.add_option("--pd1-min", f.pd1_min)->capture_default_str()->group(scan);
    app.add_option("--pd1-max", f.pd1_max)->capture_default_str()->group(scan);
    f.pd1_step_opt = app.add_option("--pd1-step", f.pd1_step,
                                    "pd1 step (default 0.05 for scans, 0.1 for calibration)")
                         ->group(scan);
    app.add_option("--xi-index", f.xi_index,
                   "Centre the w_d window on xi_k (default 4 single, 5 two)")
        ->group(scan);
    f.target_opt = app.add_option("--target-theta", f.target_theta, "Target rotation angle (rad)")
                       ->group(scan);
    app.add_option("--refine-columns", f.refine_columns)->capture_default_str()->group(scan);
    app.add_option("--angle-tol", f.angle_tol)->capture_default_str()->group(scan);
    app.add_option("--acceptance-window", f.acceptance_window)->capture_default_str()->group(scan);

    const char* loss = "loss-scan";
    app.add_option("--kappa-min", f.kappa_min)->capture_default_str()->group(loss);
    app.add_option("--kappa-max", f.kappa_max)->capture_default_str()->group(loss);
    app.add_option("--per-decade", f.per_decade)->capture_default_str()->group(loss);
    app.add_option("--fit-max", f.fit_max, "Upper kappa/K of the linear fit")
        ->capture_default_str()
        ->group(loss);

    const char* adiabatic = "adiabatic-check";
    app.add_option("--pd1-list", f.pd1_list, "Comma-separated pd1/K values")
        ->delimiter(',')
        ->capture_default_str()
        ->group(adiabatic);
    app.add_option("--window", f.window, "Resonance search window in K")
        ->capture_default_str()
        ->group(adiabatic);
}

kpo::DriveKind drive_kind(const Flags& f) { return kpo::parse_drive_kind(f.drive); }

// Reference parameters for the drive kind, overridden by whatever was given.
kpo::GateSetup resolve_setup(const Flags& f, kpo::GateSetup base) {
    base.kpo.dim = f.dim;
    if (given(f.p0_opt)) base.kpo.p0_over_K = f.p0;
    if (given(f.wd_opt)) base.drive.wd_over_K = f.wd;
    if (given(f.pd1_opt)) base.drive.pulse.pd1_over_K = f.pd1;
    if (given(f.tau_opt)) base.drive.pulse.K_tau = f.tau;
    if (given(f.T_opt)) base.drive.pulse.K_T = f.T;
    if (given(f.kappa_opt)) base.kappa_over_K = f.kappa;
    base.kpo.validate();
    base.drive.validate();
    return base;
}

kpo::GateSetup reference_setup(kpo::DriveKind kind) {
    return kind == kpo::DriveKind::SinglePhoton ? ex::single_photon_gate() : ex::two_photon_gate();
}

kpo::GateSetup fast_setup(kpo::DriveKind kind) {
    return kind == kpo::DriveKind::SinglePhoton ? ex::fast_single_photon_gate()
                                                : ex::fast_two_photon_gate();
}

kpo::EvolveOptions evolve_options(const Flags& f) {
    kpo::EvolveOptions o;
    o.tol = f.tol;
    return o;
}

int default_xi_index(kpo::DriveKind kind) { return kind == kpo::DriveKind::SinglePhoton ? 4 : 5; }

ex::Range wd_range(const Flags& f, const kpo::Spectrum& spec, kpo::DriveKind kind) {
    ex::Range r = ex::window_around_xi(spec, f.xi_index > 0 ? f.xi_index : default_xi_index(kind),
                                       1.5, f.wd_step);
    if (given(f.wd_min_opt)) r.min = f.wd_min;
    if (given(f.wd_max_opt)) r.max = f.wd_max;
    r.step = f.wd_step;
    return r;
}

ordered_json to_json(const ex::Range& r) { return {{"min", r.min}, {"max", r.max}, {"step", r.step}}; }

// Shared output plumbing: digest comment, CSV write, manifest sidecar.
class Output {
public:
    Output(const std::string& command, const Flags& f)
        : manifest_(command), path_(f.out.empty() ? command + ".csv" : f.out),
          start_(std::chrono::steady_clock::now()) {
        manifest_.parameters()["seed"] = given(f.seed_opt) ? ordered_json(f.seed) : ordered_json();
        manifest_.results()["execution"] = {{"jobs", f.jobs}};
    }

    ordered_json& parameters() { return manifest_.parameters(); }
    ordered_json& results() { return manifest_.results(); }
    const std::string& path() const { return path_; }

    void write(ex::CsvWriter& csv, const std::string& path) {
        csv.comment(manifest_.digest_comment());
        manifest_.write_output(path, csv.str());
    }

    void finish() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_.set_wall_clock(std::chrono::duration<double>(elapsed).count());
        manifest_.save(path_ + ".manifest.json");
    }

private:
    ex::RunManifest manifest_;
    std::string path_;
    std::chrono::steady_clock::time_point start_;
};

std::vector<double> p0_values(const Flags& f) {
    if (given(f.p0_opt)) return {f.p0};
    ex::Range r{f.p0_min, f.p0_max, f.p0_step};
    r.validate("p0 range");
    return r.values();
}

// Table commands sweep p0 up to where dim = 31 no longer fits, so without an
// explicit --dim they size the truncation to the largest p0 (5 p0/K + 1 keeps
// E_0 converged to better than 1e-8 at p0/K = 8).
int table_dim(const Flags& f, const std::vector<double>& p0s) {
    if (given(f.dim_opt)) return f.dim;
    const double p0_max = *std::max_element(p0s.begin(), p0s.end());
    return std::max(kpo::kDefaultDim, static_cast<int>(std::ceil(5.0 * p0_max)) + 1);
}

int cmd_spectrum(const Flags& f) {
    const std::vector<double> p0s = p0_values(f);
    const int dim = table_dim(f, p0s);
    const int kmax = f.kmax >= 0 ? f.kmax : 8;
    Output out("spectrum", f);
    out.parameters()["p0_over_K"] = p0s;
    out.parameters()["dim"] = dim;
    out.parameters()["kmax"] = kmax;

    ex::CsvWriter csv({"p0_over_K", "k", "E_k_over_K", "parity"});
    for (const ex::SpectrumRow& r : ex::spectrum_table(p0s, dim, kmax)) {
        csv.row().cell(r.p0_over_K).cell(r.k).cell(r.energy).cell(r.parity);
    }
    out.write(csv, out.path());
    out.finish();
    return kOk;
}

int cmd_matrix_elements(const Flags& f) {
    const std::vector<double> p0s = p0_values(f);
    const int dim = table_dim(f, p0s);
    const int kmax = f.kmax >= 0 ? f.kmax : 10;
    const kpo::DriveKind kind = drive_kind(f);
    Output out("matrix-elements", f);
    out.parameters()["p0_over_K"] = p0s;
    out.parameters()["dim"] = dim;
    out.parameters()["drive"] = kpo::to_string(kind);
    out.parameters()["kmax"] = kmax;

    ex::CsvWriter csv({"p0_over_K", "g", "k", "value"});
    for (const ex::MatrixElementRow& r : ex::matrix_element_table(p0s, dim, kind, kmax)) {
        csv.row().cell(r.p0_over_K).cell(r.g).cell(r.k).cell(r.value);
    }
    out.write(csv, out.path());
    out.finish();
    return kOk;
}

int cmd_evolve(const Flags& f) {
    const kpo::GateSetup setup = resolve_setup(f, reference_setup(drive_kind(f)));
    if (setup.kappa_over_K > 0.0) {
        throw CLI::ValidationError("--kappa-over-k",
                                   "evolve traces the closed system; use loss-scan for kappa > 0");
    }
    const kpo::EvolveOptions options = evolve_options(f);
    Output out("evolve", f);
    out.parameters()["setup"] = ex::to_json(setup);
    out.parameters()["initial_state"] = f.initial;
    out.parameters()["samples"] = f.samples;
    out.parameters()["top_m"] = f.top_m;
    out.parameters()["integrator"] = ex::to_json(options);

    const kpo::Spectrum spec = kpo::kpo_spectrum(setup.kpo);
    const kpo::QubitBasis basis = kpo::computational_basis(spec);
    const kpo::StateVector psi0 = f.initial == "zero" ? basis.zero : basis.one;
    const std::vector<double> times = kpo::uniform_times(setup.drive.pulse.K_T, f.samples);
    const kpo::PureTrajectory traj =
        kpo::evolve_schrodinger(psi0, setup.kpo, setup.drive, times, options);
    const kpo::ObservableTable table = kpo::trajectory_observables(traj, spec, f.top_m);
    kpo::GateResult result = kpo::extract_gate_pure(traj.final_state(), basis, psi0);
    result.params_echo = setup;

    std::vector<std::string> header{"Kt"};
    for (int k : table.tracked) header.push_back("pop_E" + std::to_string(k));
    for (const char* name : {"theta_0", "theta_1", "pop_0tilde", "pop_1tilde", "phi"}) {
        header.emplace_back(name);
    }
    ex::CsvWriter csv(header);
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        csv.row().cell(table.times[i]);
        for (double p : table.populations[i]) csv.cell(p);
        csv.cell(table.theta0[i]).cell(table.theta1[i]).cell(table.pop_zero[i]).cell(table.pop_one[i]);
        csv.cell(table.phi[i]);
    }
    out.write(csv, out.path());
    out.results()["gate"] = ex::to_json(result);
    out.results()["integrator"] = ex::to_json(traj.stats);
    out.finish();
    return kOk;
}

int cmd_gate_scan(const Flags& f) {
    const kpo::DriveKind kind = drive_kind(f);
    const kpo::GateSetup base = resolve_setup(f, reference_setup(kind));
    const kpo::Spectrum spec = kpo::kpo_spectrum(base.kpo);

    ex::ScanGrid grid;
    grid.kpo = base.kpo;
    grid.kind = kind;
    grid.K_tau = base.drive.pulse.K_tau;
    grid.K_T = base.drive.pulse.K_T;
    grid.wd_over_K = wd_range(f, spec, kind);
    grid.pd1_over_K = ex::Range{f.pd1_min, f.pd1_max, given(f.pd1_step_opt) ? f.pd1_step : 0.05};
    grid.validate();
    const kpo::EvolveOptions options = evolve_options(f);

    Output out("gate-scan", f);
    out.parameters()["p0_over_K"] = grid.kpo.p0_over_K;
    out.parameters()["dim"] = grid.kpo.dim;
    out.parameters()["drive"] = kpo::to_string(kind);
    out.parameters()["K_tau"] = grid.K_tau;
    out.parameters()["K_T"] = grid.K_T;
    out.parameters()["wd_over_K"] = to_json(grid.wd_over_K);
    out.parameters()["pd1_over_K"] = to_json(grid.pd1_over_K);
    out.parameters()["high_fidelity_threshold"] = ex::kHighFidelityError;
    out.parameters()["integrator"] = ex::to_json(options);

    const std::vector<ex::ScanPoint> points = ex::gate_scan(grid, options, f.jobs);

    ex::CsvWriter csv({"wd_over_K", "pd1_over_K", "theta_star", "one_minus_F", "leakage", "status",
                       "error"});
    std::size_t failures = 0;
    for (const ex::ScanPoint& p : points) {
        csv.row().cell(p.wd_over_K).cell(p.pd1_over_K);
        if (p.ok) {
            csv.cell(p.result.theta_star).cell(p.one_minus_F()).cell(p.result.leakage).cell("ok").cell("");
        } else {
            ++failures;
            const double nan = std::nan("");
            std::string message = p.error;
            for (char& c : message) {
                if (c == ',' || c == '\n') c = ';';
            }
            csv.cell(nan).cell(nan).cell(nan).cell("failed").cell(message);
        }
    }
    out.write(csv, out.path());

    ex::CsvWriter best({"wd_over_K", "found", "theta", "one_minus_F", "pd1_over_K"});
    for (const ex::BestAngle& b : ex::best_per_frequency(points)) {
        best.row().cell(b.wd_over_K).cell(b.found ? 1 : 0);
        if (b.found) {
            best.cell(b.theta).cell(b.one_minus_F).cell(b.pd1_over_K);
        } else {
            best.cell(std::nan("")).cell(std::nan("")).cell(std::nan(""));
        }
    }
    out.write(best, out.path() + ".best.csv");

    ex::CsvWriter xis({"k", "xi_over_K"});
    for (int k = 2; k <= spec.reliable_cutoff; ++k) xis.row().cell(k).cell(kpo::xi(spec, k));
    out.write(xis, out.path() + ".xi.csv");

    out.results()["points"] = points.size();
    out.results()["failed_points"] = failures;
    out.results()["high_fidelity_count_half_pi"] =
        ex::high_fidelity_count(points, std::numbers::pi / 2 - 1e-9);
    out.finish();
    return kOk;
}

int cmd_loss_scan(const Flags& f) {
    std::vector<kpo::DriveKind> kinds;
    if (given(f.drive_opt)) {
        kinds.push_back(drive_kind(f));
    } else {
        kinds = {kpo::DriveKind::SinglePhoton, kpo::DriveKind::TwoPhoton};
    }
    std::vector<double> kappas;
    if (given(f.kappa_opt)) {
        kappas = {f.kappa};
    } else {
        kappas.push_back(0.0);
        for (double k : ex::log_grid(f.kappa_min, f.kappa_max, f.per_decade)) kappas.push_back(k);
    }
    const kpo::EvolveOptions options = evolve_options(f);

    Output out("loss-scan", f);
    out.parameters()["setups"] = ordered_json::array();
    std::vector<kpo::GateSetup> setups;
    for (kpo::DriveKind kind : kinds) {
        kpo::GateSetup s = resolve_setup(f, fast_setup(kind));
        s.kappa_over_K = 0.0;
        setups.push_back(s);
        out.parameters()["setups"].push_back(ex::to_json(s));
    }
    out.parameters()["kappa_over_K"] = kappas;
    out.parameters()["fit_max_kappa_over_K"] = f.fit_max;
    out.parameters()["integrator"] = ex::to_json(options);

    ex::CsvWriter csv({"drive", "kappa_over_K", "one_minus_F", "theta_star", "leakage",
                       "accepted_steps", "status"});
    ex::CsvWriter fits({"drive", "epsilon", "eta", "max_residual", "range", "points"});
    out.results()["fits"] = ordered_json::array();
    bool any_failure = false;
    for (const kpo::GateSetup& s : setups) {
        const std::string name = kpo::to_string(s.drive.kind);
        const std::vector<ex::LossPoint> points = ex::loss_scan(s, kappas, options, f.jobs);
        for (const ex::LossPoint& p : points) {
            csv.row().cell(name).cell(p.kappa_over_K);
            if (p.ok) {
                csv.cell(1.0 - p.result.fidelity).cell(p.result.theta_star).cell(p.result.leakage);
                csv.cell(p.stats.accepted_steps).cell("ok");
            } else {
                any_failure = true;
                const double nan = std::nan("");
                csv.cell(nan).cell(nan).cell(nan).cell(std::size_t{0}).cell("failed");
            }
        }
        try {
            const ex::LinearFit fit = ex::fit_small_kappa(points, f.fit_max);
            fits.row().cell(name).cell(fit.epsilon).cell(fit.eta).cell(fit.max_residual);
            fits.cell(fit.range).cell(fit.points);
            out.results()["fits"].push_back({{"drive", name},
                                             {"epsilon", fit.epsilon},
                                             {"eta", fit.eta},
                                             {"max_residual", fit.max_residual},
                                             {"range", fit.range},
                                             {"points", fit.points}});
        } catch (const kpo::DomainError&) {
            // Too few small-kappa points for a line; the table is still useful.
        }
    }
    out.write(csv, out.path());
    out.write(fits, out.path() + ".fit.csv");
    out.results()["any_failure"] = any_failure;
    out.finish();
    return any_failure ? kIntegrationFailure : kOk;
}

int cmd_calibrate(const Flags& f) {
    if (!given(f.target_opt)) throw CLI::RequiredError("--target-theta");
    const kpo::DriveKind kind = drive_kind(f);
    const kpo::GateSetup base = resolve_setup(f, reference_setup(kind));
    const kpo::Spectrum spec = kpo::kpo_spectrum(base.kpo);

    ex::CalibrationRequest request;
    request.target_theta = f.target_theta;
    request.kind = kind;
    request.kpo = base.kpo;
    request.K_tau = base.drive.pulse.K_tau;
    request.K_T = base.drive.pulse.K_T;
    request.wd_over_K = wd_range(f, spec, kind);
    request.pd1_over_K = ex::Range{f.pd1_min, f.pd1_max, given(f.pd1_step_opt) ? f.pd1_step : 0.1};
    request.refine_columns = f.refine_columns;
    request.angle_tolerance = f.angle_tol;
    request.acceptance_window = f.acceptance_window;
    request.wd_over_K.validate("w_d range");
    request.pd1_over_K.validate("pd1 range");
    const kpo::EvolveOptions options = evolve_options(f);

    Output out("calibrate", f);
    out.parameters()["target_theta"] = request.target_theta;
    out.parameters()["p0_over_K"] = request.kpo.p0_over_K;
    out.parameters()["dim"] = request.kpo.dim;
    out.parameters()["drive"] = kpo::to_string(kind);
    out.parameters()["K_tau"] = request.K_tau;
    out.parameters()["K_T"] = request.K_T;
    out.parameters()["wd_over_K"] = to_json(request.wd_over_K);
    out.parameters()["pd1_over_K"] = to_json(request.pd1_over_K);
    out.parameters()["refine_columns"] = request.refine_columns;
    out.parameters()["angle_tolerance"] = request.angle_tolerance;
    out.parameters()["acceptance_window"] = request.acceptance_window;
    out.parameters()["integrator"] = ex::to_json(options);

    const ex::CalibrationResult cal = ex::calibrate(request, options, f.jobs);

    ex::CsvWriter csv({"target_theta", "wd_over_K", "pd1_over_K", "theta_star", "one_minus_F",
                       "leakage", "shortfall", "simulations"});
    csv.row().cell(request.target_theta).cell(cal.wd_over_K).cell(cal.pd1_over_K);
    csv.cell(cal.result.theta_star).cell(1.0 - cal.result.fidelity).cell(cal.result.leakage);
    csv.cell(cal.shortfall ? 1 : 0).cell(cal.simulations);
    out.write(csv, out.path());
    out.results()["gate"] = ex::to_json(cal.result);
    out.results()["shortfall"] = cal.shortfall;
    out.results()["simulations"] = cal.simulations;
    out.finish();
    return kOk;
}

int cmd_adiabatic_check(const Flags& f) {
    const kpo::GateSetup base = resolve_setup(f, reference_setup(drive_kind(f)));
    const kpo::EvolveOptions options = evolve_options(f);
    Output out("adiabatic-check", f);
    out.parameters()["setup"] = ex::to_json(base);
    out.parameters()["pd1_over_K"] = f.pd1_list;
    out.parameters()["resonance_window"] = f.window;
    out.parameters()["integrator"] = ex::to_json(options);

    const std::vector<ex::AdiabaticRow> rows =
        ex::adiabatic_check(base, f.pd1_list, options, f.jobs, f.window);
    ex::CsvWriter csv({"pd1_over_K", "theta_predicted", "theta_full", "abs_error", "rel_error"});
    for (const ex::AdiabaticRow& r : rows) {
        csv.row().cell(r.pd1_over_K).cell(r.theta_predicted).cell(r.theta_full);
        csv.cell(r.abs_error).cell(r.rel_error);
    }
    out.write(csv, out.path());
    out.finish();
    return kOk;
}

int report(const char* kind, const std::exception& e, int code) {
    std::cerr << "kpo: " << kind << ": " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous Rx gates on a Kerr parametric oscillator (units of K, hbar = 1)", "kpo"};
    app.set_version_flag("--version", std::string(ex::kToolVersion));
    app.set_config("--config", "", "Flat key=value file using the long flag names; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    Flags flags;
    add_flags(app, flags);

    using Handler = int (*)(const Flags&);
    const std::vector<std::tuple<const char*, const char*, Handler>> commands{
        {"spectrum", "Eigenvalues and parities versus p0/K", cmd_spectrum},
        {"matrix-elements", "Drive matrix elements <E_g|O|E_k> versus p0/K", cmd_matrix_elements},
        {"evolve", "Time trace of one gate", cmd_evolve},
        {"gate-scan", "theta* and 1-F over a (w_d, pd1) grid", cmd_gate_scan},
        {"loss-scan", "Gate error versus single-photon loss rate", cmd_loss_scan},
        {"calibrate", "Find (w_d, pd1) realizing a target rotation angle", cmd_calibrate},
        {"adiabatic-check", "Two-level prediction versus full simulation", cmd_adiabatic_check},
    };
    Handler selected = nullptr;
    for (const auto& [name, help, handler] : commands) {
        CLI::App* sub = app.add_subcommand(name, help)->fallthrough();
        sub->callback([&selected, h = handler] { selected = h; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        return selected(flags);
    } catch (const CLI::Error& e) {
        return report("usage", e, kUsage);
    } catch (const kpo::IntegrationError& e) {
        return report("integration failure", e, kIntegrationFailure);
    } catch (const kpo::TruncationError& e) {
        return report("truncation failure", e, kTruncationFailure);
    } catch (const kpo::CalibrationError& e) {
        return report("calibration failure", e, kCalibrationFailure);
    } catch (const kpo::Error& e) {
        return report("error", e, kModelError);
    } catch (const std::exception& e) {
        return report("I/O error", e, kIoError);
    }
}
