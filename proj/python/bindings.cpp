#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chyp/io.hpp"
#include "chyp/rescaling.hpp"

namespace py = pybind11;
using namespace chyp;

namespace {

ProperMapSpec spec_from(const py::object& map) {
    if (py::isinstance<ProperMapSpec>(map)) return map.cast<ProperMapSpec>();
    return catalog_map(map.cast<std::string>());
}

py::dict normal_form_dict(const PipelineResult& r) {
    py::dict d;
    d["lambda"] = r.normal_form.lambda;
    d["U"] = r.normal_form.U;
    d["L"] = r.normal_form.L;
    d["U_prime"] = r.normal_form.U_prime;
    d["flatten_residual"] = r.final.flatten_residual;
    d["scaling_error"] = r.scaling.max_relative_error;
    d["cauchy_differences"] = r.limit.cauchy_differences;
    d["A"] = r.final.A.matrix();
    return d;
}

}  // namespace

PYBIND11_MODULE(chyp, m) {
    m.doc() = "Complex hyperbolic geometry of proper holomorphic ball maps";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);

    py::class_<Automorphism>(m, "Automorphism")
        .def(py::init<CMat>(), py::arg("matrix"))
        .def_static("identity", &Automorphism::identity)
        .def_property_readonly("dim", &Automorphism::dim)
        .def_property_readonly("matrix", &Automorphism::matrix)
        .def("__call__", [](const Automorphism& g, const CVec& z) { return apply_ball(g, BallPoint(z)).coords(); })
        .def("__matmul__", &compose)
        .def("inverse", &inverse)
        .def("membership_residual", &verify_membership);

    m.def("cartan", &cartan, py::arg("t"), py::arg("m"));
    m.def("rotation_mapping_e1", [](const CVec& v) { return rotation_mapping_e1(v); });
    m.def("transport_to_origin", [](const CVec& p) { return transport_to_origin(BallPoint(p)); });
    m.def("cayley_to_siegel", [](const CVec& z) { return cayley_to_siegel(BallPoint(z)).coords(); });
    m.def("cayley_to_ball", [](const CVec& w) { return cayley_to_ball(SiegelPoint(w)).coords(); });
    m.def("cartan_siegel", [](double t, const CVec& w) { return cartan_siegel(t, SiegelPoint(w)).coords(); });

    m.def("dist", py::overload_cast<const CVec&, const CVec&>(&dist_ball), py::arg("z"), py::arg("w"));

    py::class_<ProperMapSpec>(m, "ProperMap")
        .def_readonly("domain_dim", &ProperMapSpec::domain_dim)
        .def_readonly("target_dim", &ProperMapSpec::target_dim)
        .def_property_readonly("degree", &ProperMapSpec::degree)
        .def("__call__", [](const ProperMapSpec& f, const CVec& z) { return evaluate(f, z); })
        .def("to_json", [](const ProperMapSpec& f) { return io::to_json(f).dump(); })
        .def_static("from_json", [](const std::string& s) { return io::map_spec_from_json(io::json::parse(s)); });

    m.def("catalog_map", &catalog_map, py::arg("name"));
    m.def("catalog_names", &catalog_names);
    m.def("properness_residual",
          [](const py::object& f, int samples) { return properness_residual(spec_from(f), samples); },
          py::arg("map"), py::arg("samples") = 1000);
    m.def("lipschitz_constant",
          [](const py::object& f, int density) { return lipschitz_boundary_constant(spec_from(f), density).C; },
          py::arg("map"), py::arg("density") = 1);
    m.def("radial_deviation",
          [](const py::object& f, const CVec& v, double t) { return radial_deviation(spec_from(f), v, t); });

    m.def("morse_constant",
          [](int dim, double alpha, double beta, double R, int trials, std::uint64_t seed) {
              return estimate_morse_constant(dim, alpha, beta, R, trials, seed).D;
          },
          py::arg("m"), py::arg("alpha"), py::arg("beta"), py::arg("R") = 0.0, py::arg("trials") = 100,
          py::arg("seed") = 0);

    m.def("scaling_exponent",
          [](int j, int k, std::optional<int> l, int dim, int M) {
              return l ? second_order_exponent(j, k, *l, dim, M) : first_order_exponent(j, k, dim, M);
          },
          py::arg("j"), py::arg("k"), py::arg("l") = py::none(), py::arg("m"), py::arg("M"));

    m.def("rescale",
          [](const py::object& f, int n_start, int n_end, int tail) {
              const ProperMapSpec spec = spec_from(f);
              PipelineOptions options;
              options.tail = tail;
              PipelineResult r;
              run_rescaling_pipeline(spec, cartan_sequence(spec.domain_dim, spec.target_dim, n_start, n_end), options, r);
              return normal_form_dict(r);
          },
          py::arg("map"), py::arg("n_start") = 1, py::arg("n_end") = 12, py::arg("tail") = 3);
}
