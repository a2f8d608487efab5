#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clarklab/clark.hpp"
#include "clarklab/dilation.hpp"
#include "clarklab/suites.hpp"

namespace py = pybind11;
using namespace clarklab;

namespace {

Scenario make_scenario(const std::string& name, SpectralMeasure m, CMatrix g) {
    Scenario s;
    s.name = name;
    s.measure = std::move(m);
    s.gamma = std::move(g);
    return s;
}

CharFnEvaluator evaluator(const Scenario& s) { return CharFnEvaluator(s.measure, ContractionParam(s.gamma)); }

ThetaMethod method_of(const std::string& m) {
    if (m == "cauchy") return ThetaMethod::Cauchy;
    if (m == "resolvent") return ThetaMethod::Resolvent;
    throw Error(ErrorKind::ParseError, "method must be 'cauchy' or 'resolvent'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Characteristic functions, model spaces and Clark operators for finite rank unitary perturbations";

    // ClarklabError carries the error kind name in its `kind` attribute.
    static PyObject* exc_type = PyErr_NewException("clarklab._core.ClarklabError", PyExc_ValueError, nullptr);
    m.attr("ClarklabError") = py::reinterpret_borrow<py::object>(exc_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(exc_type)(e.what());
            inst.attr("kind") = error_kind_name(e.kind());
            PyErr_SetObject(exc_type, inst.ptr());
        }
    });

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("seed", &Scenario::seed)
        .def_readonly("suite", &Scenario::suite)
        .def_property_readonly("gamma", [](const Scenario& s) { return s.gamma; })
        .def_property_readonly("d", [](const Scenario& s) { return s.measure.d; })
        .def_property_readonly("n", [](const Scenario& s) { return s.measure.total_dim(); })
        .def_property_readonly("purely_atomic", [](const Scenario& s) { return s.measure.purely_atomic(); })
        .def_property_readonly("atoms",
                               [](const Scenario& s) {
                                   py::list out;
                                   for (const auto& a : s.measure.atoms)
                                       out.append(py::make_tuple(a.point, a.weight, a.b_block));
                                   return out;
                               })
        .def("to_json", [](const Scenario& s) { return scenario_to_json(s).dump(); })
        .def("__repr__", [](const Scenario& s) {
            return "<Scenario '" + s.name + "' d=" + std::to_string(s.measure.d) + ">";
        });

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", &parse_scenario_string, py::arg("text"));
    m.def("scenario_s1", [](cplx g) { return make_scenario("S1", scenario_s1(), CMatrix::Constant(1, 1, g)); },
          py::arg("gamma") = cplx(0.0));
    m.def("scenario_s2", [](cplx g) { return make_scenario("S2", scenario_s2(), CMatrix::Constant(1, 1, g)); },
          py::arg("gamma") = cplx(0.0));
    m.def("scenario_s3", [](const CMatrix& g) { return make_scenario("S3", scenario_s3(), g); },
          py::arg("gamma") = CMatrix::Zero(2, 2));
    m.def("random_scenario", [](std::uint64_t seed) {
        const auto r = random_scenario(seed);
        return make_scenario("random-" + std::to_string(seed), r.measure, r.gamma);
    }, py::arg("seed"));

    m.def("theta", [](const Scenario& s, cplx z, const std::string& method) { return evaluator(s).theta(z, method_of(method)); },
          py::arg("scenario"), py::arg("z"), py::arg("method") = "cauchy");
    m.def("theta0", [](const Scenario& s, cplx z) { return evaluator(s).theta0(z); }, py::arg("scenario"), py::arg("z"));
    m.def("cauchy_F", [](const Scenario& s, cplx z) { return evaluator(s).F(z); }, py::arg("scenario"), py::arg("z"));
    m.def("delta_sq", [](const Scenario& s, cplx z) { return evaluator(s).delta_sq(z); }, py::arg("scenario"),
          py::arg("z"));
    m.def("lft", [](const CMatrix& th, const CMatrix& g, bool inverse) {
        return lft_apply(inverse ? LftDirection::GammaToZero : LftDirection::ZeroToGamma, th, g).value;
    }, py::arg("theta"), py::arg("gamma"), py::arg("inverse") = false);

    m.def("perturbed_operator", [](const Scenario& s) { return build_T(embed(s.measure), ContractionParam(s.gamma)).T; },
          py::arg("scenario"));
    m.def("dilation", [](const Scenario& s, int N) {
        return build_dilation(build_T(embed(s.measure), ContractionParam(s.gamma)), N).U;
    }, py::arg("scenario"), py::arg("N"));

    m.def("phi_star", [](const Scenario& s, const CVector& f, int K) {
        const auto ev = evaluator(s);
        if (K <= 0) K = theta_coefficients(ev).K();
        return phi_star_nf(ev, f, K).coeffs;
    }, py::arg("scenario"), py::arg("fiber_values"), py::arg("K") = 0,
          "Taylor coefficients (d x (K+1)) of the adjoint Clark operator applied to fiber values at the atoms.");
    m.def("phi_direct", [](const Scenario& s, const CMatrix& coeffs) {
        TaylorRep h{coeffs, 0.0};
        return phi_direct(evaluator(s), h).fiber_values;
    }, py::arg("scenario"), py::arg("coeffs"), "Atom values recovered from Taylor coefficients (d x (K+1)).");

    m.def("validate", [](const Scenario& s) { return run_validate(s).to_json(false).dump(); }, py::arg("scenario"));
    m.def("verify", [](const Scenario& s, const std::string& suite, std::uint64_t seed) {
        return run_verify(s, suite, seed).to_json(false).dump();
    }, py::arg("scenario"), py::arg("suite") = "all", py::arg("seed") = 1);
    m.def("suite_names", &suite_names);
}
