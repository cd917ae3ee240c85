#include "checks.hpp"

#include "fermi/combinatorics.hpp"
#include "fermi/config.hpp"
#include "fermi/dyson.hpp"
#include "fermi/fock.hpp"
#include "fermi/limit.hpp"
#include "fermi/oracle.hpp"
#include "fermi/wick.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fermi;

namespace {

std::vector<int> one_based(std::vector<int> v) {
    for (int& x : v) ++x;
    return v;
}

SimplexScheme scheme_of(const std::string& s) {
    if (s == "auto") return SimplexScheme::Auto;
    if (s == "nested") return SimplexScheme::Nested;
    if (s == "monte_carlo") return SimplexScheme::MonteCarlo;
    throw std::invalid_argument("scheme must be auto, nested or monte_carlo");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fermionic weak-coupling toolkit: CAR algebra, Wick ordering, Dyson terms, limit QSDE";

    py::register_exception<GuardError>(m, "GuardError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("creation", [](int modes, const CVec& f) { return creation(ModeSpace(modes), f).entries; },
          py::arg("modes"), py::arg("f"));
    m.def("annihilation", [](int modes, const CVec& f) { return annihilation(ModeSpace(modes), f).entries; },
          py::arg("modes"), py::arg("f"));
    m.def("car_check", [](int modes, int trials, std::uint64_t seed) {
              auto r = lab::car_check(modes, trials, seed);
              return py::dict(py::arg("anti_err") = r.anti_err, py::arg("create_err") = r.create_err);
          },
          py::arg("modes"), py::arg("trials") = 100, py::arg("seed") = 1);

    m.def("normal_order", [](const std::string& expr, const std::map<std::string, CVec>& vectors) {
              const auto w = parse_word(expr, vectors);
              const auto nf = normal_order_word(w);
              const int M = w.modes();
              double err = -1.0;
              if (M <= 10) {
                  ModeSpace s(M);
                  err = (dense_normal_form(s, w, nf).entries - dense_word(s, w).entries).cwiseAbs().maxCoeff();
              }
              return py::make_tuple(nf.to_string(), err);
          },
          py::arg("expr"), py::arg("vectors"),
          "Normal form text and its max deviation from the dense word (-1 above 10 modes).");

    py::class_<Partition>(m, "Partition")
        .def(py::init(&Partition::from_one_based), py::arg("n"), py::arg("parts"))
        .def_property_readonly("n", &Partition::n)
        .def_property_readonly("g_in", [](const Partition& g) { return one_based(g.g_in()); })
        .def_property_readonly("g_out", [](const Partition& g) { return one_based(g.g_out()); })
        .def("is_type_one", [](const Partition& g) { return is_type_one(g); })
        .def("xi", [](const Partition& g, const Bits& a, const Bits& b) { return sign_xi(g, a, b); })
        .def("xi_expression", [](const Partition& g) { return lab::xi_expression(g); })
        .def("__repr__", &Partition::to_string);
    m.def("bell_number", [](int n) {
        long c = 0;
        for_each_partition(n, [&](const Partition&) { ++c; });
        return c;
    });
    m.def("matching_count", &matching_count);
    m.def("sign_demo", &lab::sign_demo_text);

    m.def("limit_coefficients", [](const CMat& E00, const CMat& E10, const CMat& E11, cplx kappa) {
              const auto c = build_limit_coefficients(SystemModel::make(E00, E10, E11, kappa));
              return py::dict(py::arg("W") = c.W, py::arg("L") = c.L, py::arg("K") = c.K, py::arg("H_eff") = c.H_eff,
                              py::arg("gamma") = c.gamma);
          },
          py::arg("E00"), py::arg("E10"), py::arg("E11"), py::arg("kappa"));

    py::class_<ExperimentConfig>(m, "Experiment")
        .def_static("from_file", &load_config, py::arg("path"))
        .def_static("from_json", &parse_config, py::arg("text"))
        .def_property_readonly("config_hash", [](const ExperimentConfig& c) { return hash_hex(c.hash); })
        .def_property_readonly("lambdas", [](const ExperimentConfig& c) { return c.run.lambdas; })
        .def_property_readonly("t", [](const ExperimentConfig& c) { return c.run.t; })
        .def("qsde", [](const ExperimentConfig& c) {
            const auto r = qsde_matrix_element(c.sys, c.bath, c.left, c.right, c.phi1, c.phi2, c.run.t);
            return py::dict(py::arg("value") = r.value, py::arg("per_order") = r.per_order,
                            py::arg("tail_bound") = r.tail_bound);
        })
        .def("dyson_term",
             [](const ExperimentConfig& c, int n, double lambda, const std::string& scheme, long samples) {
                 IntegratorOptions o;
                 o.scheme = scheme_of(scheme);
                 o.samples = samples;
                 o.seed = c.run.seed;
                 const auto r = dyson_term(c.dyson_spec(n, lambda), o);
                 return py::make_tuple(r.value, r.std_err);
             },
             py::arg("n"), py::arg("lam"), py::arg("scheme") = "auto", py::arg("samples") = 200000,
             "Order-n term without the (-i)^n prefactor, with its error estimate.")
        .def("truncation_bound", [](const ExperimentConfig& c, int n, double lambda) {
                 return truncation_bound(c.dyson_spec(n, lambda), n);
             },
             py::arg("n"), py::arg("lam"))
        .def("oracle", [](const ExperimentConfig& c, double lambda) {
                 OracleResult r;
                 {
                     py::gil_scoped_release nogil;
                     r = oracle_matrix_element(c.propagator_run(lambda), c.left, c.right, c.phi1, c.phi2);
                 }
                 return py::dict(py::arg("value") = r.value, py::arg("norm_drift") = r.norm_drift,
                                 py::arg("leakage") = r.leakage);
             },
             py::arg("lam"));
}
