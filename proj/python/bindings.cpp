#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lyacert/certify.hpp"
#include "lyacert/detect.hpp"
#include "lyacert/errors.hpp"
#include "lyacert/lyapunov.hpp"
#include "lyacert/matrix_kernel.hpp"
#include "lyacert/order_structures.hpp"
#include "lyacert/semigroup.hpp"

namespace py = pybind11;
using namespace lyacert;

namespace {

py::tuple bound(const NormBound& b) { return py::make_tuple(b.lower, b.upper); }

std::optional<ConeSpec> cone_named(const std::string& kind, Eigen::Index n) {
  if (kind.empty() || kind == "none") return std::nullopt;
  if (kind == "orthant") return ConeSpec::orthant(n);
  throw InvalidArgument("unknown probe cone '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lyapunov stability certificates for matrix semigroups";
  m.attr("__version__") = tool_version();

  // Translators registered later take precedence, so the base goes first.
  auto base = py::register_exception<Error>(m, "LyacertError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NotStableError>(m, "NotStableError", base.ptr());
  py::register_exception<SingularSystemError>(m, "SingularSystemError", base.ptr());
  py::register_exception<NoInjectionError>(m, "NoInjectionError", base.ptr());

  // matrix kernel
  m.def("expm", &expm, py::arg("a"), py::arg("t") = 1.0);
  m.def("integral_exp", &integral_exp, py::arg("a"), py::arg("t"));
  m.def("cesaro_integral", &cesaro_integral, py::arg("a"), py::arg("t"));
  m.def("eigenvalues", &eigenvalues, py::arg("a"));
  m.def("spectral_abscissa", &spectral_abscissa, py::arg("a"));
  m.def(
      "growth_fit",
      [](const Matrix& a, double horizon, int steps) {
        const GrowthBound g = growth_fit(a, horizon, steps);
        return py::make_tuple(g.m, g.eps);
      },
      py::arg("a"), py::arg("horizon"), py::arg("steps"));
  m.def(
      "induced_norm",
      [](const Matrix& a, double p_from, double p_to) {
        return bound(induced_norm(a, SpaceNorm(p_from), SpaceNorm(p_to)));
      },
      py::arg("a"), py::arg("p_from"), py::arg("p_to"));
  m.def("nuclear_norm", &nuclear_norm, py::arg("a"));
  m.def("svec", &svec, py::arg("sym"));
  m.def("smat", [](const Vector& v) { return smat(v); }, py::arg("coords"));

  // order structures
  m.def(
      "order_unit_norm_psd",
      [](const Matrix& e, const Matrix& x) {
        const ConeSpec cone = ConeSpec::psd(e.rows());
        return order_unit_norm(cone, OrderUnit::make(cone, e), x);
      },
      py::arg("e"), py::arg("x"));
  m.def(
      "cone_contains",
      [](const std::string& kind, const Matrix& x) {
        const ConeSpec cone = kind == "psd" ? ConeSpec::psd(x.rows()) : ConeSpec::orthant(x.rows());
        return cone_contains(cone, x);
      },
      py::arg("kind"), py::arg("x"));

  // semigroup engine
  m.def("is_metzler", &is_metzler, py::arg("a"));
  m.def(
      "weak_detector_check",
      [](const Matrix& a, const Vector& z) {
        const DetectorCheck d = weak_detector_check(SemigroupProbe(a, ConeSpec::orthant(a.rows())), z);
        return py::make_tuple(d.detector, d.witness_phi);
      },
      py::arg("a"), py::arg("z"));
  m.def(
      "s_infinity",
      [](const Matrix& a, const std::string& cone) {
        return s_infinity(SemigroupProbe(a, cone_named(cone, a.rows())));
      },
      py::arg("a"), py::arg("cone") = "");

  // Lyapunov tensor
  m.def(
      "lyap_solve_direct",
      [](const Matrix& a, const Matrix& q) {
        const LyapunovSolution s = lyap_solve_direct(a, q);
        return py::make_tuple(s.p, s.residual);
      },
      py::arg("a"), py::arg("q"));
  m.def(
      "lyap_solve_integral",
      [](const Matrix& a, const Matrix& q) {
        const IntegralSolution s = lyap_solve_integral(a, q);
        py::dict d;
        d["P"] = s.solution.p;
        d["residual"] = s.solution.residual;
        d["steps"] = s.steps;
        d["monotone"] = s.monotone;
        d["direct_agreement"] = s.direct_agreement;
        return d;
      },
      py::arg("a"), py::arg("q"));
  m.def("gramian", &gramian, py::arg("a"), py::arg("q"), py::arg("t"));
  m.def("rkhs_factor", [](const Matrix& q) { return rkhs_factor(q); }, py::arg("q"));
  m.def(
      "implemented_apply",
      [](const Matrix& a, double t, const Matrix& p) { return implemented_apply(a, a, t, p); },
      py::arg("a"), py::arg("t"), py::arg("p"));
  m.def(
      "projective_norm",
      [](const Matrix& coeffs, double p) { return bound(projective_norm(Tensor2(coeffs, false, p))); },
      py::arg("coeffs"), py::arg("p") = 2.0);

  // detectability
  m.def(
      "hautus_detectable", [](const Matrix& a, const Matrix& c) { return hautus_detectable({a, c}); },
      py::arg("a"), py::arg("c"));
  m.def(
      "l2_detectable", [](const Matrix& a, const Matrix& c) { return l2_detectable({a, c}); },
      py::arg("a"), py::arg("c"));
  m.def(
      "unobservable_subspace",
      [](const Matrix& a, const Matrix& c) { return unobservable_subspace({a, c}); }, py::arg("a"),
      py::arg("c"));
  m.def(
      "stabilizing_output_injection",
      [](const Matrix& a, const Matrix& c) { return stabilizing_output_injection({a, c}); },
      py::arg("a"), py::arg("c"));
  m.def(
      "final_observability_constant",
      [](const Matrix& a, const Matrix& c, double t0) {
        return final_observability_constant({a, c}, t0);
      },
      py::arg("a"), py::arg("c"), py::arg("t0"));

  // certification; documents travel as canonical JSON text
  m.def(
      "certify_json",
      [](const std::string& problem) {
        return canonical_dump(to_json(wonham_certify(parse_problem_text(problem))));
      },
      py::arg("problem"));
  m.def(
      "canonical_problem",
      [](const std::string& problem) { return canonical_dump(to_json(parse_problem_text(problem))); },
      py::arg("problem"));
  m.def(
      "input_digest", [](const std::string& problem) { return input_digest(parse_problem_text(problem)); },
      py::arg("problem"));
}
