#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "kpo/experiments.hpp"

namespace kpo::experiments {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // no "-0" in output
    char buffer[64];
    const auto [end, ec] =
        std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    if (ec != std::errc{}) throw std::runtime_error("float formatting failed");
    return std::string(buffer, end);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::comment(std::string_view text) { comments_.emplace_back(text); }

CsvWriter& CsvWriter::row() {
    rows_.emplace_back();
    return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::cell(int value) { return cell(std::string_view(std::to_string(value))); }

CsvWriter& CsvWriter::cell(std::size_t value) {
    return cell(std::string_view(std::to_string(value)));
}

CsvWriter& CsvWriter::cell(std::string_view value) {
    if (rows_.empty()) rows_.emplace_back();
    rows_.back().emplace_back(value);
    return *this;
}

std::string CsvWriter::str() const {
    std::string out;
    for (const std::string& c : comments_) out += "# " + c + "\n";
    auto append_line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_line(header_);
    for (const auto& r : rows_) append_line(r);
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

std::string RunManifest::digest() const {
    nlohmann::ordered_json identity;
    identity["tool"] = "kpo";
    identity["version"] = kToolVersion;
    identity["command"] = command_;
    identity["parameters"] = parameters_;
    return sha256_hex(identity.dump());
}

std::string RunManifest::digest_comment() const { return "manifest_sha256: " + digest(); }

void RunManifest::write_output(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
    outputs_.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "kpo";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["manifest_sha256"] = digest();
    j["parameters"] = parameters_;
    j["results"] = results_;
    j["wall_clock_seconds"] = wall_clock_;
    j["outputs"] = outputs_;
    return j;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json().dump(2) << '\n';
}

nlohmann::ordered_json to_json(const GateSetup& setup) {
    nlohmann::ordered_json j;
    j["p0_over_K"] = setup.kpo.p0_over_K;
    j["dim"] = setup.kpo.dim;
    j["drive"] = to_string(setup.drive.kind);
    j["wd_over_K"] = setup.drive.wd_over_K;
    j["pd1_over_K"] = setup.drive.pulse.pd1_over_K;
    j["K_tau"] = setup.drive.pulse.K_tau;
    j["K_T"] = setup.drive.pulse.K_T;
    j["kappa_over_K"] = setup.kappa_over_K;
    return j;
}

nlohmann::ordered_json to_json(const GateResult& result) {
    nlohmann::ordered_json j;
    j["theta_star"] = result.theta_star;
    j["fidelity"] = result.fidelity;
    j["one_minus_F"] = 1.0 - result.fidelity;
    j["leakage"] = result.leakage;
    j["degenerate"] = result.degenerate;
    j["params"] = to_json(result.params_echo);
    return j;
}

nlohmann::ordered_json to_json(const IntegratorStats& stats) {
    nlohmann::ordered_json j;
    j["accepted_steps"] = stats.accepted_steps;
    j["rejected_steps"] = stats.rejected_steps;
    j["rhs_evaluations"] = stats.rhs_evaluations;
    j["max_step_error"] = stats.max_step_error;
    j["error_estimate"] = stats.error_estimate;
    j["max_tail_population"] = stats.max_tail_population;
    j["final_tail_population"] = stats.final_tail_population;
    j["max_norm_drift"] = stats.max_norm_drift;
    return j;
}

nlohmann::ordered_json to_json(const EvolveOptions& options) {
    nlohmann::ordered_json j;
    j["integrator"] = "dormand-prince-5(4)";
    j["tol"] = options.tol;
    j["max_steps"] = options.max_steps;
    j["tail_limit"] = options.tail_limit;
    j["positivity_limit"] = options.positivity_limit;
    return j;
}

}  // namespace kpo::experiments
