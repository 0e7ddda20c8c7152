// Python bindings for the core library. Operators cross the boundary as
// complex128 numpy arrays; time series come back as numpy arrays.

#include <map>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "photon/filter.hpp"
#include "photon/master.hpp"
#include "photon/opalg.hpp"
#include "photon/pulse.hpp"
#include "photon/slh.hpp"
#include "photon/twolevel.hpp"

namespace py = pybind11;
using namespace photon;

namespace {

std::vector<NamedOperator> named(const std::map<std::string, Operator>& obs) {
  std::vector<NamedOperator> out;
  for (const auto& [name, op] : obs) out.push_back({name, op});
  return out;
}

template <class T>
py::array_t<T> array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> times(const TimeGrid& g) {
  std::vector<double> t(g.n_steps + 1);
  for (std::size_t k = 0; k <= g.n_steps; ++k) t[k] = g.time(k);
  return array(t);
}

}  // namespace

PYBIND11_MODULE(_photon, m) {
  m.doc() = "Single-photon master equations and quantum filters";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
  py::register_exception<FilterError>(m, "FilterError", PyExc_RuntimeError);

  py::class_<Pulse>(m, "Pulse")
      .def_static("gaussian", &Pulse::gaussian, py::arg("t0"), py::arg("sigma"),
                  py::arg("detuning") = 0.0)
      .def_static("exponential", &Pulse::decaying_exponential, py::arg("gamma"),
                  py::arg("t0") = 0.0, py::arg("detuning") = 0.0)
      .def_static("square", &Pulse::square, py::arg("t0"), py::arg("t1"),
                  py::arg("detuning") = 0.0)
      .def_static("tabulated", &Pulse::tabulated, py::arg("grid"), py::arg("values"),
                  py::arg("detuning") = 0.0)
      .def("__call__", &Pulse::eval, py::arg("t"))
      .def("tail_weight", &Pulse::tail_weight, py::arg("t"))
      .def("__repr__", &Pulse::describe);

  py::class_<SLHTriple>(m, "SLHTriple")
      .def(py::init([](Operator S, Operator L, Operator H) {
             return SLHTriple(std::move(S), std::move(L), std::move(H));
           }),
           py::arg("S"), py::arg("L"), py::arg("H"))
      .def_property_readonly("S", &SLHTriple::S)
      .def_property_readonly("L", &SLHTriple::L)
      .def_property_readonly("H", &SLHTriple::H)
      .def_property_readonly("dim", &SLHTriple::dim);

  m.def("two_level_system", &two_level_system, py::arg("kappa"), py::arg("omega") = 0.0);
  m.def(
      "series_product",
      [](const SLHTriple& G, const SLHTriple& M) { return series_product(G, M); },
      py::arg("G"), py::arg("M"));
  m.def("lindblad_heisenberg", &lindblad_heisenberg, py::arg("G"), py::arg("X"));
  m.def("lindblad_schrodinger", &lindblad_schrodinger, py::arg("G"), py::arg("rho"));

  m.def(
      "integrate_master",
      [](const SLHTriple& G, const Pulse& p, const StateVector& eta, double dt, double T,
         const std::map<std::string, Operator>& observables) {
        MasterOptions opts;
        opts.observables = named(observables);
        opts.snapshot_stride = 0;
        const MasterRun run = integrate_master(G, p, eta, dt, T, opts);
        py::dict mu;
        for (std::size_t i = 0; i < run.observable_names.size(); ++i) {
          py::dict blocks;
          for (int jk = 0; jk < 4; ++jk) blocks[kBlockLabels[jk]] = array(run.expectations[i][jk]);
          mu[py::str(run.observable_names[i])] = blocks;
        }
        py::dict inv;
        inv["max_trace_drift"] = run.invariants.max_trace_drift;
        inv["max_cross_trace"] = run.invariants.max_cross_trace;
        inv["max_cross_asymmetry"] = run.invariants.max_cross_asymmetry;
        inv["max_hermiticity_defect"] = run.invariants.max_hermiticity_defect;
        inv["min_eigenvalue"] = run.invariants.min_eigenvalue;
        return py::make_tuple(times(run.grid), mu, inv);
      },
      py::arg("G"), py::arg("pulse"), py::arg("eta"), py::arg("dt"), py::arg("T"),
      py::arg("observables"),
      "Returns (t, {name: {'11','10','01','00': values}}, invariants).");

  m.def(
      "integrate_vacuum_master",
      [](const SLHTriple& G, const Operator& rho0, double dt, double T,
         const std::map<std::string, Operator>& observables) {
        MasterOptions opts;
        opts.observables = named(observables);
        opts.snapshot_stride = 0;
        const VacuumRun run = integrate_vacuum_master(G, rho0, dt, T, opts);
        py::dict out;
        for (std::size_t i = 0; i < run.observable_names.size(); ++i) {
          out[py::str(run.observable_names[i])] = array(run.expectations[i]);
        }
        return py::make_tuple(times(run.grid), out);
      },
      py::arg("G"), py::arg("rho0"), py::arg("dt"), py::arg("T"), py::arg("observables"));

  py::class_<MeasurementRecord>(m, "MeasurementRecord")
      .def(py::init<>())
      .def_readwrite("dt", &MeasurementRecord::dt)
      .def_readwrite("dY", &MeasurementRecord::dY)
      .def_readwrite("seed", &MeasurementRecord::seed)
      .def("save", [](const MeasurementRecord& r, const std::string& path) { save_record(path, r); })
      .def_static("load", &load_record, py::arg("path"));

  m.def(
      "generate_record",
      [](const SLHTriple& G, const Pulse& p, const StateVector& eta, double dt, double T,
         std::uint64_t seed, std::uint64_t trajectory) {
        return generate_record(ExtendedSystem(G, p), eta, dt, T, seed, trajectory).record;
      },
      py::arg("G"), py::arg("pulse"), py::arg("eta"), py::arg("dt"), py::arg("T"),
      py::arg("seed"), py::arg("trajectory") = 0);

  m.def(
      "run_filter",
      [](const SLHTriple& G, const Pulse& p, const StateVector& eta,
         const MeasurementRecord& rec, const std::map<std::string, Operator>& observables) {
        TrajectoryOptions opts;
        opts.observables = named(observables);
        const TrajectoryRun run = run_filter(G, p, eta, rec, opts);
        py::dict pi11;
        for (std::size_t i = 0; i < run.observable_names.size(); ++i) {
          pi11[py::str(run.observable_names[i])] = array(run.pi11[i]);
        }
        py::dict out;
        out["t"] = times(run.grid);
        out["pi11"] = pi11;
        out["Y"] = array(run.Y);
        out["W"] = array(run.W);
        out["gain"] = array(run.gain);
        out["max_trace_drift"] = run.max_trace_drift;
        out["max_cross_asymmetry"] = run.max_cross_asymmetry;
        return out;
      },
      py::arg("G"), py::arg("pulse"), py::arg("eta"), py::arg("record"),
      py::arg("observables"));

  m.def(
      "run_ensemble",
      [](const SLHTriple& G, const Pulse& p, const StateVector& eta, double dt, double T,
         std::uint64_t seed, std::size_t n_traj, const std::map<std::string, Operator>& observables,
         std::vector<double> checkpoints, unsigned threads) {
        TrajectoryOptions opts;
        opts.observables = named(observables);
        opts.checkpoints = std::move(checkpoints);
        EnsembleResult ens;
        {
          py::gil_scoped_release release;
          ens = run_ensemble(G, p, eta, dt, T, seed, n_traj, opts, threads);
        }
        py::dict mean, se;
        for (std::size_t i = 0; i < ens.observable_names.size(); ++i) {
          mean[py::str(ens.observable_names[i])] = array(ens.mean[i]);
          se[py::str(ens.observable_names[i])] = array(ens.stderr_[i]);
        }
        py::dict out;
        out["t"] = array(ens.checkpoint_times);
        out["mean"] = mean;
        out["stderr"] = se;
        out["W_final"] = array(ens.W_final);
        out["W_mean"] = ens.W_mean;
        out["W_var"] = ens.W_var;
        return out;
      },
      py::arg("G"), py::arg("pulse"), py::arg("eta"), py::arg("dt"), py::arg("T"),
      py::arg("seed"), py::arg("n_traj"), py::arg("observables"), py::arg("checkpoints"),
      py::arg("threads") = 0);

  py::module_ tl = m.def_submodule("twolevel", "Bloch-coefficient oracle for the two-level system");
  tl.def(
      "integrate_bloch_master",
      [](double kappa, double omega, const Pulse& p, const StateVector& eta, double dt, double T) {
        const auto steps = twolevel::integrate_bloch_master(kappa, omega, p, eta, dt, T);
        py::array_t<cplx> out({static_cast<py::ssize_t>(steps.size()), py::ssize_t{9}});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < steps.size(); ++k) {
          const auto& c = steps[k];
          const cplx row[9] = {c.x00, c.y00, c.z00, c.x01, c.y01, c.z01, c.x11, c.y11, c.z11};
          for (int j = 0; j < 9; ++j) a(static_cast<py::ssize_t>(k), j) = row[j];
        }
        return out;
      },
      py::arg("kappa"), py::arg("omega"), py::arg("pulse"), py::arg("eta"), py::arg("dt"),
      py::arg("T"), "Columns x00 y00 z00 x01 y01 z01 x11 y11 z11.");
}
