#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qperc/approx.hpp"
#include "qperc/classify.hpp"
#include "qperc/error.hpp"
#include "qperc/experiment.hpp"
#include "qperc/hamiltonian.hpp"
#include "qperc/statevec.hpp"

namespace py = pybind11;
using namespace qperc;

namespace {

QuantumState state_from(const Eigen::VectorXcd& amplitudes) {
    const auto dim = static_cast<std::uint64_t>(amplitudes.size());
    if (dim < 2 || (dim & (dim - 1)) != 0) throw InvalidArgument("state length must be a power of two >= 2");
    int n = 0;
    while ((std::uint64_t{1} << n) < dim) ++n;
    return QuantumState::from_vector(n, amplitudes);
}

/// Runs one experiment from JSON config text; returns (result JSON text,
/// extra files, status).
py::tuple run(const std::string& kind, const std::string& config_text, const std::vector<std::string>& overrides,
              int threads) {
    auto config = parse_config_text(config_text, experiment_kind_from_string(kind));
    for (const auto& o : overrides) apply_seed_override(config, o);
    if (threads > 0) config.threads = threads;
    config.validate();
    ExperimentOutput out;
    {
        py::gil_scoped_release release;
        out = run_experiment(config);
    }
    py::dict files;
    for (const auto& [name, text] : out.files) files[py::str(name)] = py::str(text);
    return py::make_tuple(out.result.dump(2), files, out.status);
}

}  // namespace

PYBIND11_MODULE(_qperc, m) {
    m.doc() = "Quantum perceptron simulation, training and approximation circuits";

    // Translators run newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MappingInfeasible>(m, "MappingInfeasible", PyExc_ValueError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    // State vectors are exchanged as complex numpy arrays, qubit 0 most significant.
    m.def("basis_state", [](const std::string& bits) { return QuantumState::from_bits(bits).to_vector(); },
          py::arg("bits"));
    m.def("expectation_z", [](const Eigen::VectorXcd& s, int q) { return expectation_z(state_from(s), q); },
          py::arg("state"), py::arg("qubit"));
    m.def("fidelity",
          [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return fidelity(state_from(a), state_from(b)); },
          py::arg("a"), py::arg("b"));
    m.def("evolve_dense",
          [](const DenseOperator& h, double tau, const Eigen::VectorXcd& s) {
              return evolve_dense(h, tau, state_from(s)).to_vector();
          },
          py::arg("hamiltonian"), py::arg("tau"), py::arg("state"));

    py::class_<PerceptronParams>(m, "PerceptronParams")
        .def(py::init([](int n) { return PerceptronParams::zeros(n); }), py::arg("num_inputs"))
        .def_readwrite("num_inputs", &PerceptronParams::num_inputs)
        .def_readwrite("delta_o", &PerceptronParams::delta_o)
        .def_readwrite("omega_o", &PerceptronParams::omega_o)
        .def_readwrite("couplings", &PerceptronParams::couplings)
        .def_readwrite("input_drives", &PerceptronParams::input_drives);

    py::class_<RydbergParams>(m, "RydbergParams")
        .def(py::init([](int n) { return RydbergParams::zeros(n); }), py::arg("num_atoms"))
        .def_readwrite("num_atoms", &RydbergParams::num_atoms)
        .def_readwrite("omegas", &RydbergParams::omegas)
        .def_readwrite("detunings", &RydbergParams::detunings)
        .def_readwrite("interactions", &RydbergParams::interactions);

    m.def("build_perceptron", &build_perceptron, py::arg("params"));
    m.def("build_rydberg_perceptron",
          [](const RydbergParams& p) { return build_rydberg(p, perceptron_mask(p.num_atoms - 1)); },
          py::arg("params"), "Rydberg Hamiltonian with only input-output interactions; the last atom is the output.");
    m.def("evolve_perceptron_blocks",
          [](const PerceptronParams& p, double tau, const Eigen::VectorXcd& s) {
              return evolve_perceptron_blocks(p, tau, state_from(s)).to_vector();
          },
          py::arg("params"), py::arg("tau"), py::arg("state"));
    m.def("map_rydberg_to_perceptron",
          [](const RydbergParams& p, double rel_tol) {
              const auto mapping = map_rydberg_to_perceptron(p, rel_tol);
              return py::make_tuple(mapping.params, mapping.constant_shift);
          },
          py::arg("params"), py::arg("rel_tol") = kDefaultMappingTolerance,
          "Returns (PerceptronParams, constant_shift).");
    m.def("verify_mapping", &verify_mapping, py::arg("a"), py::arg("b"));

    py::class_<ApproxSpec>(m, "ApproxSpec")
        .def(py::init([](int n, int d) { return ApproxSpec::zeros(n, d); }), py::arg("n"), py::arg("d"))
        .def_static("random", [](int n, int d, std::uint64_t seed) {
            Rng rng(seed);
            return ApproxSpec::random(n, d, rng);
        }, py::arg("n"), py::arg("d"), py::arg("seed"))
        .def_readwrite("n", &ApproxSpec::n)
        .def_readwrite("d", &ApproxSpec::d)
        .def_readwrite("a", &ApproxSpec::a)
        .def_readwrite("b", &ApproxSpec::b)
        .def_readwrite("gamma", &ApproxSpec::gamma)
        .def_readwrite("R", &ApproxSpec::R)
        .def_property_readonly("num_qubits", &ApproxSpec::num_qubits);

    m.def("f_circuit", [](const ApproxSpec& s, const std::vector<double>& x) { return f_circuit(s, x); },
          py::arg("spec"), py::arg("x"));
    m.def("f_cosine", [](const ApproxSpec& s, const std::vector<double>& x) { return f_cosine(s, x); },
          py::arg("spec"), py::arg("x"));
    m.def("v_prep", &v_prep, py::arg("num_qubits"));

    m.def("run", &run, py::arg("kind"), py::arg("config_text"), py::arg("seed_overrides") = std::vector<std::string>{},
          py::arg("threads") = 0,
          "Runs an experiment; returns (result JSON text, {file name: contents}, status).");
}
