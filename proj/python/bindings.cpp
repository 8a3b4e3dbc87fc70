#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dpgmg/io.hpp"

namespace py = pybind11;
using namespace dpgmg;

PYBIND11_MODULE(_core, m) {
  m.doc() = "ultraweak DPG Helmholtz solver with multigrid-preconditioned CG";

  py::enum_<StudyKind>(m, "StudyKind")
      .value("uniform_h", StudyKind::UniformH)
      .value("uniform_p", StudyKind::UniformP)
      .value("hp_adaptive", StudyKind::HpAdaptive);

  py::enum_<CoarseOpMode>(m, "CoarseOpMode")
      .value("restrict", CoarseOpMode::Restrict)
      .value("store", CoarseOpMode::Store);

  py::enum_<LoadSpec::Kind>(m, "LoadKind")
      .value("plane_wave", LoadSpec::Kind::PlaneWaveDir)
      .value("gaussian_beam", LoadSpec::Kind::GaussianBeam)
      .value("zero", LoadSpec::Kind::Zero);

  py::class_<LoadSpec>(m, "LoadSpec")
      .def(py::init<>())
      .def_readwrite("kind", &LoadSpec::kind)
      .def_readwrite("dx", &LoadSpec::dx)
      .def_readwrite("dy", &LoadSpec::dy)
      .def_readwrite("center", &LoadSpec::center)
      .def_readwrite("waist", &LoadSpec::waist);

  py::class_<CycleConfig>(m, "CycleConfig")
      .def(py::init<>())
      .def_readwrite("pre_smooth", &CycleConfig::pre_smooth)
      .def_readwrite("post_smooth", &CycleConfig::post_smooth)
      .def_readwrite("damping", &CycleConfig::damping);

  py::class_<StudyConfig>(m, "StudyConfig")
      .def(py::init<>())
      .def_property("omega", [](const StudyConfig& c) { return c.pc.omega; },
                    [](StudyConfig& c, double w) { c.pc.omega = w; })
      .def_property("impedance", [](const StudyConfig& c) { return c.pc.impedance; },
                    [](StudyConfig& c, double z) { c.pc.impedance = z; })
      .def_property("alpha", [](const StudyConfig& c) { return c.pc.alpha; },
                    [](StudyConfig& c, double a) { c.pc.alpha = a; })
      .def_property("wavespeed", [](const StudyConfig& c) { return c.pc.wavespeed; },
                    [](StudyConfig& c, double v) { c.pc.wavespeed = v; })
      .def_readwrite("load", &StudyConfig::load)
      .def_readwrite("kind", &StudyConfig::kind)
      .def_readwrite("omegas", &StudyConfig::omegas)
      .def_readwrite("grids", &StudyConfig::grids)
      .def_readwrite("theta", &StudyConfig::theta)
      .def_readwrite("cycle", &StudyConfig::cycle)
      .def_readwrite("mode", &StudyConfig::mode)
      .def_readwrite("tol", &StudyConfig::tol)
      .def_readwrite("p0", &StudyConfig::p0)
      .def_readwrite("p_max", &StudyConfig::p_max)
      .def_readwrite("warm_start", &StudyConfig::warm_start)
      .def_readwrite("max_iter", &StudyConfig::max_iter)
      .def("validate", &StudyConfig::validate);

  py::class_<ConvergenceRecord>(m, "ConvergenceRecord")
      .def_readonly("grid", &ConvergenceRecord::grid)
      .def_readonly("ndof", &ConvergenceRecord::ndof)
      .def_readonly("iterations", &ConvergenceRecord::iterations)
      .def_readonly("final_residual", &ConvergenceRecord::final_residual)
      .def_readonly("dpg_eta", &ConvergenceRecord::dpg_eta)
      .def_readonly("assembly_s", &ConvergenceRecord::assembly_s)
      .def_readonly("solve_s", &ConvergenceRecord::solve_s)
      .def("__repr__", [](const ConvergenceRecord& r) {
        std::ostringstream s;
        s << "ConvergenceRecord(grid=" << r.grid << ", ndof=" << r.ndof
          << ", iterations=" << r.iterations << ", dpg_eta=" << r.dpg_eta << ")";
        return s.str();
      });

  py::class_<StudyResult>(m, "StudyResult")
      .def_readonly("records", &StudyResult::records)
      .def_readonly("eta_identity_rel", &StudyResult::eta_identity_rel)
      .def_readonly("orders", &StudyResult::orders)
      .def_readonly("nyquist", &StudyResult::nyquist)
      .def_readonly("p_phase_start", &StudyResult::p_phase_start)
      .def_readonly("all_converged", &StudyResult::all_converged);

  py::class_<OmegaSweepRow>(m, "OmegaSweepRow")
      .def_readonly("omega", &OmegaSweepRow::omega)
      .def_readonly("max_iterations", &OmegaSweepRow::max_iterations);

  py::class_<OmegaSweepResult>(m, "OmegaSweepResult")
      .def_readonly("rows", &OmegaSweepResult::rows)
      .def_readonly("studies", &OmegaSweepResult::studies)
      .def_readonly("has_slope", &OmegaSweepResult::has_slope)
      .def_readonly("slope", &OmegaSweepResult::slope);

  m.def("run_study", &run_study, py::arg("config"),
        "Run the configured convergence study (uniform_h, uniform_p or hp_adaptive).");
  m.def("run_omega_sweep", &run_omega_sweep, py::arg("config"),
        "Run the configured study once per frequency and fit the iteration growth.");

  m.def("parse_config", [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  }, py::arg("text"), "Parse a flat key = value study configuration document.");
  m.def("serialize_config", &serialize_config, py::arg("config"));

  m.def("records_to_csv", [](const std::vector<ConvergenceRecord>& recs) {
    std::ostringstream out;
    write_csv(out, recs);
    return out.str();
  }, py::arg("records"));
  m.def("csv_to_records", [](const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
  }, py::arg("text"));

  m.def("selftest", []() {
    std::ostringstream log;
    const int rc = run_selftest(log);
    return py::make_tuple(rc == 0, log.str());
  }, "Run the invariant suite; returns (ok, log).");

  py::register_exception<ConfigError>(m, "ConfigError");
}
