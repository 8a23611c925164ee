// lyacert command-line front end.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "lyacert/certify.hpp"
#include "lyacert/detect.hpp"
#include "lyacert/errors.hpp"
#include "lyacert/lyapunov.hpp"
#include "lyacert/semigroup.hpp"

namespace {

using namespace lyacert;

ProblemSpec read_problem(const std::string& input) {
  ProblemSpec spec;
  if (input == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    spec = parse_problem_text(buf.str());
  } else {
    spec = load_problem(input);
  }
  apply_seed_override(spec, std::getenv("LYACERT_SEED"));
  return spec;
}

void emit(const Json& doc, const std::string& out) {
  const std::string text = canonical_dump(doc) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

Json bound_to_json(const NormBound& b) {
  return Json{{"lower", b.lower}, {"upper", b.upper}, {"exact", b.exact()}};
}

int cmd_certify(const std::string& input, const std::string& out) {
  const Certificate cert = wonham_certify(read_problem(input));
  emit(to_json(cert), out);
  return exit_code(cert.verdict);
}

int cmd_batch(const std::string& dir, const std::string& out, int jobs) {
  const auto items = certify_batch(dir, out.empty() ? dir + "/certificates" : out, jobs,
                                   std::getenv("LYACERT_SEED"));
  int worst = 0;
  Json summary = Json::array();
  for (const auto& item : items) {
    summary.push_back(Json{{"input", item.input.filename().string()},
                           {"exit_code", item.exit_code},
                           {"error", item.error}});
    if (item.exit_code == 1) worst = 1;
  }
  std::cout << canonical_dump(Json{{"items", summary}}) << "\n";
  return worst;
}

int cmd_solve(const std::string& input, const std::string& method, const std::string& out) {
  const ProblemSpec spec = read_problem(input);
  Json doc;
  if (method == "direct") {
    const LyapunovSolution sol = lyap_solve_direct(spec.a, spec.weight());
    doc = Json{{"method", sol.method}, {"P", matrix_to_json(sol.p)}, {"residual", sol.residual}};
  } else {
    const IntegralSolution sol = lyap_solve_integral(spec.a, spec.weight());
    doc = Json{{"method", sol.solution.method},
               {"P", matrix_to_json(sol.solution.p)},
               {"residual", sol.solution.residual},
               {"steps", sol.steps},
               {"step", sol.step},
               {"monotone", sol.monotone},
               {"direct_agreement",
                sol.direct_agreement ? Json(*sol.direct_agreement) : Json(nullptr)}};
  }
  emit(doc, out);
  return 0;
}

int cmd_detect(const std::string& input, const std::string& out) {
  const ProblemSpec spec = read_problem(input);
  const ObservedPair pair(spec.a, spec.observation());
  const DetectabilityReport report = detectability_report(pair, spec.t0);
  Json doc = to_json(report);
  const L2Decision l2 = l2_decide(pair);
  doc["witness"] = l2.witness ? vector_to_json(*l2.witness) : Json(nullptr);
  emit(doc, out);
  return report.l2 ? 0 : 3;
}

int cmd_observe(const std::string& input, double t0, int samples, const std::string& out) {
  const ProblemSpec spec = read_problem(input);
  const ObservedPair pair(spec.a, spec.observation());
  Json doc;
  doc["t0"] = t0;
  doc["eps_star"] = final_observability_constant(pair, t0);
  doc["finally_observable"] = is_finally_observable(pair, t0);
  if (doc["finally_observable"].get<bool>() && spectral_abscissa(spec.a) < 0.0) {
    const ObserverAudit audit = observer_implies_detector_audit(
        pair, t0, samples, static_cast<std::uint64_t>(spec.seed));
    doc["audit"] = Json{{"max_violation", audit.max_violation},
                        {"min_relative_slack", audit.min_relative_slack},
                        {"operator_slack", audit.operator_slack},
                        {"samples", audit.samples}};
  } else {
    doc["audit"] = nullptr;
  }
  emit(doc, out);
  return 0;
}

int cmd_probe(const std::string& input, double horizon, int steps, const std::string& csv,
              const std::string& out) {
  const ProblemSpec spec = read_problem(input);
  if (!csv.empty()) {
    std::ofstream file(csv, std::ios::trunc);
    if (!file) throw std::runtime_error(csv + ": cannot open for writing");
    emit_decay_csv(spec, horizon, steps, file);
  }
  std::optional<ConeSpec> cone;
  if (spec.cone && spec.cone->is_vector_cone()) cone = spec.cone;
  const SemigroupProbe probe(spec.a, cone, SpaceNorm(spec.p));
  emit(to_json(analyze_stability(probe, horizon, steps)), out);
  return 0;
}

int cmd_norms(const std::string& input, double p, const std::string& out) {
  const ProblemSpec spec = read_problem(input);
  const SpaceNorm norm(p);
  Json doc;
  doc["p"] = std::isfinite(p) ? Json(p) : Json("inf");
  doc["induced_A"] = bound_to_json(induced_norm(spec.a, norm, norm));
  doc["induced_expA"] = bound_to_json(induced_norm(expm(spec.a), norm, norm));
  doc["spectral_A"] = spectral_norm(spec.a);
  doc["nuclear_A"] = nuclear_norm(spec.a);
  doc["projective_Q"] = bound_to_json(projective_norm(Tensor2(spec.weight(), true, p)));
  emit(doc, out);
  return 0;
}

int cmd_gallery(const std::string& dir) {
  const auto entries = run_gallery(dir);
  int failures = 0;
  for (const auto& e : entries) {
    const bool ok = e.certificate.verdict == e.expected;
    failures += ok ? 0 : 1;
    std::cout << e.name << ": " << to_string(e.certificate.verdict)
              << (ok ? "" : " (expected " + to_string(e.expected) + ")") << "\n";
  }
  return failures == 0 ? 0 : 1;
}

int cmd_audit_lemmas(int n, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst_algebraic = 0.0;
  double worst_derivative = 0.0;
  for (int k = 0; k < count; ++k) {
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gauss(rng) / std::sqrt(n);
    for (double t : {0.1, 1.0, 10.0}) {
      const LemmaReport r = lemma_AS_suite(a, t, 1e-4);
      worst_algebraic = std::max(worst_algebraic, r.max_algebraic());
      worst_derivative = std::max(worst_derivative, r.derivative);
      std::cout << canonical_dump(Json{{"instance", k},
                                       {"t", t},
                                       {"as_identity", r.as_identity},
                                       {"commutation", r.commutation},
                                       {"cesaro_identity", r.cesaro_identity},
                                       {"inner_commutation", r.inner_commutation},
                                       {"derivative", r.derivative}})
                << "\n";
    }
  }
  const bool ok = worst_algebraic <= 1e-8 && worst_derivative <= 1e-5;
  std::cout << canonical_dump(Json{{"worst_algebraic", worst_algebraic},
                                   {"worst_derivative", worst_derivative},
                                   {"pass", ok}})
            << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov stability certificates for matrix semigroups"};
  app.set_version_flag("--version", lyacert::tool_version());
  app.require_subcommand(1);

  std::string input = "-";
  std::string out;

  auto* certify = app.add_subcommand("certify", "Certify stability of a problem file");
  std::string batch_dir;
  int jobs = 1;
  certify->add_option("--input,-i", input, "Problem file ('-' for stdin)");
  certify->add_option("--out,-o", out, "Certificate file (stdout by default)");
  certify->add_option("--batch", batch_dir, "Certify every *.json in a directory");
  certify->add_option("--jobs,-j", jobs, "Parallel workers for --batch")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "Solve A^T P + P A = -Q");
  std::string method = "direct";
  solve->add_option("--input,-i", input, "Problem file")->required();
  solve->add_option("--method", method)->check(CLI::IsMember({"direct", "integral"}));
  solve->add_option("--out,-o", out);

  auto* detect = app.add_subcommand("detect", "Detectability report");
  detect->add_option("--input,-i", input, "Problem file")->required();
  detect->add_option("--out,-o", out);

  auto* observe = app.add_subcommand("observe", "Final observability constant and audit");
  double t0 = 1.0;
  int samples = 32;
  observe->add_option("--input,-i", input, "Problem file")->required();
  observe->add_option("--t0", t0)->required()->check(CLI::PositiveNumber);
  observe->add_option("--samples", samples);
  observe->add_option("--out,-o", out);

  auto* probe = app.add_subcommand("probe", "Stability report and decay CSV");
  double horizon = 10.0;
  int steps = 200;
  std::string csv;
  probe->add_option("--input,-i", input, "Problem file")->required();
  probe->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
  probe->add_option("--steps", steps)->check(CLI::PositiveNumber);
  probe->add_option("--csv", csv, "Write t,state_norm,pi_norm_monomial,paired_QTt rows");
  probe->add_option("--out,-o", out);

  auto* norms = app.add_subcommand("norms", "Induced, nuclear and projective norms");
  std::string p_text = "2";
  norms->add_option("--input,-i", input, "Problem file")->required();
  norms->add_option("--p", p_text, "Exponent (number or 'inf')");
  norms->add_option("--out,-o", out);

  auto* gallery = app.add_subcommand("gallery", "Write the fixture gallery");
  std::string gallery_dir;
  gallery->add_option("--out,-o", gallery_dir)->required();

  auto* audit = app.add_subcommand("audit-lemmas", "Integrated-semigroup identities on random A");
  int n = 4;
  std::uint64_t seed = 0;
  int count = 10;
  audit->add_option("--n", n)->check(CLI::Range(1, 64));
  audit->add_option("--seed", seed);
  audit->add_option("--count", count)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*certify) {
      if (!batch_dir.empty()) return cmd_batch(batch_dir, out, jobs);
      return cmd_certify(input, out);
    }
    if (*solve) return cmd_solve(input, method, out);
    if (*detect) return cmd_detect(input, out);
    if (*observe) return cmd_observe(input, t0, samples, out);
    if (*probe) return cmd_probe(input, horizon, steps, csv, out);
    if (*norms) {
      const double p = p_text == "inf" ? lyacert::kInf : std::stod(p_text);
      return cmd_norms(input, p, out);
    }
    if (*gallery) return cmd_gallery(gallery_dir);
    if (*audit) return cmd_audit_lemmas(n, seed, count);
  } catch (const std::exception& e) {
    std::cerr << "lyacert: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
