#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kpo/adiabatic.hpp"
#include "kpo/experiments.hpp"

namespace py = pybind11;
using namespace kpo;

namespace {

GateSetup make_setup(double p0, const std::string& drive, double wd, double pd1, double tau,
                     double T, double kappa, int dim) {
    GateSetup s;
    s.kpo = KpoParams{p0, dim};
    s.drive = DriveSpec{parse_drive_kind(drive), wd, PulseParams{pd1, tau, T}};
    s.kappa_over_K = kappa;
    return s;
}

py::dict gate_dict(const GateResult& r) {
    py::dict d;
    d["theta_star"] = r.theta_star;
    d["fidelity"] = r.fidelity;
    d["one_minus_F"] = 1.0 - r.fidelity;
    d["leakage"] = r.leakage;
    d["degenerate"] = r.degenerate;
    return d;
}

py::dict stats_dict(const IntegratorStats& s) {
    py::dict d;
    d["accepted_steps"] = s.accepted_steps;
    d["rejected_steps"] = s.rejected_steps;
    d["error_estimate"] = s.error_estimate;
    d["max_tail_population"] = s.max_tail_population;
    d["max_norm_drift"] = s.max_norm_drift;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kerr parametric oscillator gate simulation";

    py::register_exception<Error>(m, "KpoError", PyExc_RuntimeError);

    m.attr("DEFAULT_DIM") = kDefaultDim;

    m.def("annihilation_operator", &annihilation_operator, py::arg("dim") = kDefaultDim);
    m.def("parity_operator", &parity_operator, py::arg("dim") = kDefaultDim);
    m.def("coherent_state", &coherent_state, py::arg("alpha"), py::arg("dim") = kDefaultDim);
    m.def("kpo_hamiltonian",
          [](double p0, int dim) { return build_kpo_hamiltonian(KpoParams{p0, dim}); },
          py::arg("p0_over_K"), py::arg("dim") = kDefaultDim);

    py::class_<Spectrum>(m, "Spectrum")
        .def_property_readonly("energies", [](const Spectrum& s) { return s.eigenvalues; })
        .def_property_readonly("states", [](const Spectrum& s) { return s.eigenstates; })
        .def_readonly("parities", &Spectrum::parities)
        .def_property_readonly("dim", &Spectrum::dim)
        .def("xi", [](const Spectrum& s, int k) { return xi(s, k); }, py::arg("k"))
        .def("matrix_element",
             [](const Spectrum& s, const std::string& drive, int k, int l) {
                 return drive_matrix_element(s, parse_drive_kind(drive), k, l);
             },
             py::arg("drive"), py::arg("k"), py::arg("l"))
        .def("computational_basis", [](const Spectrum& s) {
            const QubitBasis b = computational_basis(s);
            return py::make_tuple(b.zero, b.one);
        });

    m.def("spectrum", [](double p0, int dim) { return kpo_spectrum(KpoParams{p0, dim}); },
          py::arg("p0_over_K"), py::arg("dim") = kDefaultDim);

    m.def("pulse_amplitude",
          [](double t, double pd1, double tau, double T) {
              return pulse_amplitude(t, PulseParams{pd1, tau, T});
          },
          py::arg("t"), py::arg("pd1_over_K"), py::arg("K_tau"), py::arg("K_T"));

    m.def("simulate_gate",
          [](double p0, const std::string& drive, double wd, double pd1, double tau, double T,
             double kappa, int dim, double tol) {
              const GateSetup s = make_setup(p0, drive, wd, pd1, tau, T, kappa, dim);
              GateOptions opts;
              opts.evolve.tol = tol;
              GateRun run;
              {
                  py::gil_scoped_release release;
                  run = simulate_gate(s, opts);
              }
              py::dict d = gate_dict(run.result);
              d["stats"] = stats_dict(run.stats);
              return d;
          },
          py::arg("p0_over_K"), py::arg("drive"), py::arg("wd_over_K"), py::arg("pd1_over_K"),
          py::arg("K_tau"), py::arg("K_T"), py::arg("kappa_over_K") = 0.0,
          py::arg("dim") = kDefaultDim, py::arg("tol") = 1e-10,
          "Runs the gate from |0~> and returns theta*, fidelity and leakage.");

    m.def("evolve",
          [](const StateVector& psi0, double p0, const std::string& drive, double wd, double pd1,
             double tau, double T, const std::vector<double>& times, int dim, double tol) {
              const GateSetup s = make_setup(p0, drive, wd, pd1, tau, T, 0.0, dim);
              EvolveOptions opts;
              opts.tol = tol;
              PureTrajectory traj;
              {
                  py::gil_scoped_release release;
                  traj = evolve_schrodinger(psi0, s.kpo, s.drive, times, opts);
              }
              Eigen::MatrixXcd states(psi0.size(), traj.states.size());
              for (std::size_t i = 0; i < traj.states.size(); ++i) states.col(i) = traj.states[i];
              return py::make_tuple(traj.times, states, stats_dict(traj.stats));
          },
          py::arg("psi0"), py::arg("p0_over_K"), py::arg("drive"), py::arg("wd_over_K"),
          py::arg("pd1_over_K"), py::arg("K_tau"), py::arg("K_T"), py::arg("times"),
          py::arg("dim") = kDefaultDim, py::arg("tol") = 1e-10,
          "Schrodinger evolution sampled at the given times; states are columns.");

    m.def("extract_gate",
          [](const StateVector& psi_f, const Spectrum& spec, const StateVector& psi_i) {
              return gate_dict(extract_gate_pure(psi_f, computational_basis(spec), psi_i));
          },
          py::arg("psi_final"), py::arg("spectrum"), py::arg("psi_initial"));

    m.def("predict_rotation",
          [](double p0, const std::string& drive, double wd, double pd1, double tau, double T,
             int dim) {
              const GateSetup s = make_setup(p0, drive, wd, pd1, tau, T, 0.0, dim);
              const AdiabaticPrediction p = predict_rotation(kpo_spectrum(s.kpo), s.drive);
              py::dict d;
              d["theta0"] = p.theta0.theta;
              d["theta1"] = p.theta1.theta;
              d["partner0"] = p.ground0.e;
              d["partner1"] = p.ground1.e;
              d["rotation"] = p.rotation;
              return d;
          },
          py::arg("p0_over_K"), py::arg("drive"), py::arg("wd_over_K"), py::arg("pd1_over_K"),
          py::arg("K_tau"), py::arg("K_T"), py::arg("dim") = kDefaultDim);
}
