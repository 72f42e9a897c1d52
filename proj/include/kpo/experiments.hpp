#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kpo/adiabatic.hpp"
#include "kpo/gate.hpp"

// Scan, calibration and reporting layer behind the `kpo` command-line tool.
namespace kpo::experiments {

inline constexpr const char* kToolVersion = "0.1.0";
/// High-fidelity criterion 1 - F < 1e-3.
inline constexpr double kHighFidelityError = 1e-3;

// ---------------------------------------------------------------- formatting

/// Round-trip decimal form with 17 significant digits; "nan"/"inf" for
/// non-finite values.
std::string format_double(double value);

/// Comma-separated table with a header row and '#' comment lines.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void comment(std::string_view text);
    CsvWriter& row();
    CsvWriter& cell(double value);
    CsvWriter& cell(int value);
    CsvWriter& cell(std::size_t value);
    CsvWriter& cell(std::string_view value);

    std::string str() const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(std::string_view data);

// ---------------------------------------------------------------- manifests

/// One run's record: parameters, tolerances, version, timing and digests of
/// the files it produced. Keys keep insertion order.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    nlohmann::ordered_json& parameters() { return parameters_; }
    nlohmann::ordered_json& results() { return results_; }
    void set_wall_clock(double seconds) { wall_clock_ = seconds; }

    /// SHA-256 over command, version and parameters. Timing and outputs are
    /// excluded so the digest identifies the run configuration.
    std::string digest() const;

    /// Writes `content` to `path` and records its SHA-256.
    void write_output(const std::string& path, const std::string& content);
    /// The CSV header comment line tying a data file to this manifest.
    std::string digest_comment() const;

    nlohmann::ordered_json to_json() const;
    void save(const std::string& path) const;

private:
    std::string command_;
    nlohmann::ordered_json parameters_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
    double wall_clock_ = 0.0;
};

nlohmann::ordered_json to_json(const GateSetup& setup);
nlohmann::ordered_json to_json(const GateResult& result);
nlohmann::ordered_json to_json(const IntegratorStats& stats);
nlohmann::ordered_json to_json(const EvolveOptions& options);

// ---------------------------------------------------------------- parallelism

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Results are
/// stored by index, so output order never depends on scheduling.
template <class Result>
std::vector<Result> parallel_map(std::size_t count, unsigned jobs,
                                 const std::function<Result(std::size_t)>& task);

// ---------------------------------------------------------------- grids

struct Range {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    /// Inclusive grid min, min + step, ..., <= max (+1e-9 step slack).
    std::vector<double> values() const;
    void validate(const char* name) const;
};

std::vector<double> log_grid(double lo, double hi, int per_decade);

struct ScanGrid {
    Range wd_over_K;
    Range pd1_over_K{0.0, 2.0, 0.05};
    KpoParams kpo;
    DriveKind kind = DriveKind::SinglePhoton;
    double K_tau = 3.9;
    double K_T = 10.0;

    void validate() const;
};

/// w_d window of +-half_width around xi_k with the given step.
Range window_around_xi(const Spectrum& spec, int k, double half_width = 1.5, double step = 0.05);

// ---------------------------------------------------------------- tables

struct SpectrumRow {
    double p0_over_K;
    int k;
    double energy;
    int parity;
};

std::vector<SpectrumRow> spectrum_table(const std::vector<double>& p0_values, int dim, int kmax);

struct MatrixElementRow {
    double p0_over_K;
    int g;
    int k;
    double value;
};

/// Signed real <E_g|O|E_k> for g in {0, 1} and k in [0, kmax].
std::vector<MatrixElementRow> matrix_element_table(const std::vector<double>& p0_values, int dim,
                                                   DriveKind kind, int kmax);

// ---------------------------------------------------------------- gate scan

struct ScanPoint {
    double wd_over_K = 0.0;
    double pd1_over_K = 0.0;
    bool ok = false;
    GateResult result;
    std::string error;

    double one_minus_F() const { return 1.0 - result.fidelity; }
};

std::vector<ScanPoint> gate_scan(const ScanGrid& grid, const EvolveOptions& options,
                                 unsigned jobs);

struct BestAngle {
    double wd_over_K;
    bool found;
    double theta;
    double one_minus_F;
    double pd1_over_K;
};

/// Per w_d: the largest |theta*| among points with 1 - F below `threshold`.
std::vector<BestAngle> best_per_frequency(const std::vector<ScanPoint>& points,
                                          double threshold = kHighFidelityError);

/// Points with 1 - F < threshold and |theta*| >= min_abs_theta.
std::size_t high_fidelity_count(const std::vector<ScanPoint>& points, double min_abs_theta,
                                double threshold = kHighFidelityError);

// ---------------------------------------------------------------- loss scan

struct LossPoint {
    double kappa_over_K;
    bool ok;
    GateResult result;
    IntegratorStats stats;
    std::string error;
};

std::vector<LossPoint> loss_scan(const GateSetup& setup, const std::vector<double>& kappas,
                                 const EvolveOptions& options, unsigned jobs);

struct LinearFit {
    double epsilon = 0.0;  // intercept
    double eta = 0.0;      // slope in kappa/K
    double max_residual = 0.0;
    double range = 0.0;    // max - min of the fitted data
    std::size_t points = 0;
};

/// Least-squares 1 - F = epsilon + eta kappa/K over points with kappa <= kappa_max.
LinearFit fit_small_kappa(const std::vector<LossPoint>& points, double kappa_max);

/// Reference parameter sets.
GateSetup single_photon_gate();       // Rx(-pi/2), KT = 10
GateSetup two_photon_gate();          // Rx(+pi/2), KT = 10
GateSetup fast_single_photon_gate();  // KT = 9.1
GateSetup fast_two_photon_gate();     // KT = 6.4

// ---------------------------------------------------------------- calibration

struct CalibrationRequest {
    double target_theta = 0.0;
    DriveKind kind = DriveKind::SinglePhoton;
    KpoParams kpo;
    double K_tau = 3.9;
    double K_T = 10.0;
    Range wd_over_K;
    Range pd1_over_K{0.0, 2.0, 0.1};
    /// Target crossings refined along pd1, best estimated fidelity first.
    int refine_columns = 8;
    double angle_tolerance = 0.01;
    double acceptance_window = 0.3;
};

struct CalibrationResult {
    double wd_over_K = 0.0;
    double pd1_over_K = 0.0;
    GateResult result;
    bool shortfall = false;
    std::size_t simulations = 0;
};

/// Coarse (w_d, pd1) grid, then root-finding on pd1 inside the grid cells
/// where theta* crosses the target, most promising cells first. Throws CalibrationError if no grid point lies within the
/// acceptance window of the target.
CalibrationResult calibrate(const CalibrationRequest& request, const EvolveOptions& options,
                            unsigned jobs);

// ---------------------------------------------------------------- adiabatic check

struct AdiabaticRow {
    double pd1_over_K;
    double theta_predicted;
    double theta_full;
    double abs_error;
    double rel_error;  // abs_error / |theta_full|; NaN when |theta_full| < 1e-9
};

std::vector<AdiabaticRow> adiabatic_check(const GateSetup& base, const std::vector<double>& pd1s,
                                          const EvolveOptions& options, unsigned jobs,
                                          double window = kDefaultResonanceWindow);

}  // namespace kpo::experiments

#include "kpo/experiments_parallel.hpp"
