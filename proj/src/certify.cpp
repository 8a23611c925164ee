#include "lyacert/certify.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "lyacert/errors.hpp"
#include "lyacert/lyapunov.hpp"

#ifndef LYACERT_VERSION
#define LYACERT_VERSION "0.0.0"
#endif

namespace lyacert {

namespace {

bool same_bits(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (std::memcmp(x.data() + k, y.data() + k, sizeof(double)) != 0) return false;
  }
  return true;
}

bool same_bits(const std::optional<Matrix>& x, const std::optional<Matrix>& y) {
  if (x.has_value() != y.has_value()) return false;
  return !x || same_bits(*x, *y);
}

Json cone_to_json(const ConeSpec& cone) {
  Json out;
  out["cone"] = to_string(cone.kind());
  out["dim"] = cone.dim();
  if (cone.kind() == ConeKind::polyhedral) out["generators"] = matrix_to_json(cone.generators());
  return out;
}

ConeSpec cone_from_json(const Json& v, Eigen::Index n) {
  if (!v.is_object()) throw ParseError("/cone: expected an object");
  // "kind" is accepted as an alias of "cone".
  const char* key = v.contains("cone") ? "cone" : "kind";
  if (!v.contains(key) || !v[key].is_string()) throw ParseError("/cone/cone: expected a string");
  const std::string kind = v[key].get<std::string>();
  Eigen::Index dim = n;
  if (v.contains("dim")) {
    if (!v["dim"].is_number_integer()) throw ParseError("/cone/dim: expected an integer");
    dim = v["dim"].get<Eigen::Index>();
  }
  if (dim != n) throw ParseError("/cone/dim: must equal the state dimension");
  try {
    if (kind == "orthant") return ConeSpec::orthant(dim);
    if (kind == "psd") return ConeSpec::psd(dim);
    if (kind == "polyhedral") {
      if (!v.contains("generators")) throw ParseError("/cone/generators: required for polyhedral cones");
      Matrix g = matrix_from_json(v["generators"], "/cone/generators");
      if (g.rows() != n) throw ParseError("/cone/generators: rows must equal the state dimension");
      return ConeSpec::polyhedral(std::move(g));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("/cone: ") + e.what());
  }
  throw ParseError("/cone/cone: unknown cone '" + kind + "'");
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json growth_to_json(const GrowthBound& g) { return Json{{"m", g.m}, {"eps", g.eps}}; }

// Stable verdicts need negative abscissa; unstable ones must not sit
// strictly inside the left half-plane.
void audit_against_abscissa(const Certificate& cert, const ProblemSpec& spec) {
  const double scale = std::max(1.0, spec.a.norm());
  bool consistent = true;
  if (cert.verdict == Verdict::exponentially_stable) consistent = cert.cross_check_abscissa < 0.0;
  if (cert.verdict == Verdict::unstable) {
    consistent = cert.cross_check_abscissa >= -kUnstableBoundary * scale;
  }
  if (consistent) return;
  std::ostringstream os;
  os << "wonham_certify: verdict " << to_string(cert.verdict) << " contradicts spectral abscissa "
     << cert.cross_check_abscissa << "\nproblem: " << canonical_dump(to_json(spec))
     << "\ncertificate: " << canonical_dump(to_json(cert));
  throw InternalInconsistencyError(os.str());
}

}  // namespace

bool operator==(const ProblemSpec& x, const ProblemSpec& y) {
  return same_bits(x.a, y.a) && same_bits(x.c, y.c) && same_bits(x.q, y.q) &&
         std::memcmp(&x.p, &y.p, sizeof(double)) == 0 && x.cone == y.cone && x.t0 == y.t0 &&
         x.tolerances == y.tolerances && x.seed == y.seed;
}

void ProblemSpec::validate() const {
  require_square(a, "problem A");
  require_finite(a, "problem A");
  const Eigen::Index n = a.rows();
  if (c.has_value() == q.has_value()) {
    throw InvalidArgument("problem: exactly one of C and Q must be given");
  }
  if (c && c->cols() != n) throw DimensionError("problem: C must have as many columns as A");
  if (q) {
    if (q->rows() != n || q->cols() != n) throw DimensionError("problem: Q must match A");
    require_symmetric(*q, "problem Q", 1e-10);
    if (min_eigenvalue(symmetrize(*q)) < -kDefaultPsdTol * std::max(1.0, q->norm())) {
      throw NotPsdError("problem: Q is not positive semidefinite");
    }
  }
  if (!(p >= 1.0)) throw InvalidArgument("problem: p must be >= 1");
  if (cone && cone->dim() != n) throw DimensionError("problem: cone dimension must match A");
  if (t0 && !(*t0 > 0.0 && std::isfinite(*t0))) throw InvalidArgument("problem: t0 must be positive");
  for (const auto& [name, value] : tolerances) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw InvalidArgument("problem: tolerance '" + name + "' must be finite and >= 0");
    }
  }
}

Matrix ProblemSpec::observation() const { return c ? *c : rkhs_factor(*q); }

Matrix ProblemSpec::weight() const { return q ? symmetrize(*q) : Matrix(c->transpose() * *c); }

ConeSpec ProblemSpec::effective_cone() const { return cone ? *cone : ConeSpec::psd(a.rows()); }

double ProblemSpec::tolerance(const std::string& name, double fallback) const {
  const auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

ProblemSpec parse_problem(const Json& doc) {
  if (!doc.is_object()) throw ParseError("/: expected an object");
  static const char* const kKnown[] = {"A", "C", "Q", "p", "cone", "t0", "tolerances", "seed"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(std::begin(kKnown), std::end(kKnown), it.key()) == std::end(kKnown)) {
      throw ParseError("/" + it.key() + ": unknown field");
    }
  }
  ProblemSpec spec;
  if (!doc.contains("A")) throw ParseError("/A: required");
  spec.a = matrix_from_json(doc["A"], "/A");
  if (doc.contains("C")) spec.c = matrix_from_json(doc["C"], "/C");
  if (doc.contains("Q")) spec.q = matrix_from_json(doc["Q"], "/Q");
  if (doc.contains("p")) spec.p = number_from_json(doc["p"], "/p");
  if (doc.contains("cone") && !doc["cone"].is_null()) {
    spec.cone = cone_from_json(doc["cone"], spec.a.rows());
  }
  if (doc.contains("t0") && !doc["t0"].is_null()) spec.t0 = number_from_json(doc["t0"], "/t0");
  if (doc.contains("tolerances")) {
    const Json& tol = doc["tolerances"];
    if (!tol.is_object()) throw ParseError("/tolerances: expected an object");
    for (auto it = tol.begin(); it != tol.end(); ++it) {
      spec.tolerances[it.key()] = number_from_json(it.value(), "/tolerances/" + it.key());
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ParseError("/seed: expected an integer");
    spec.seed = doc["seed"].get<std::int64_t>();
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return spec;
}

ProblemSpec parse_problem_text(std::string_view text) { return parse_problem(parse_json(text)); }

ProblemSpec load_problem(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problem_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

Json to_json(const ProblemSpec& spec) {
  Json out;
  out["A"] = matrix_to_json(spec.a);
  if (spec.c) out["C"] = matrix_to_json(*spec.c);
  if (spec.q) out["Q"] = matrix_to_json(*spec.q);
  out["p"] = std::isfinite(spec.p) ? Json(spec.p) : Json("inf");
  if (spec.cone) out["cone"] = cone_to_json(*spec.cone);
  if (spec.t0) out["t0"] = *spec.t0;
  Json tol = Json::object();
  for (const auto& [name, value] : spec.tolerances) tol[name] = value;
  out["tolerances"] = tol;
  out["seed"] = spec.seed;
  return out;
}

void apply_seed_override(ProblemSpec& spec, const char* value) {
  if (value == nullptr || *value == '\0') return;
  const std::string_view text(value);
  std::int64_t seed = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError("LYACERT_SEED: expected an integer, got '" + std::string(text) + "'");
  }
  spec.seed = seed;
}

std::string input_digest(const ProblemSpec& spec) { return sha256_hex(canonical_dump(to_json(spec))); }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::exponentially_stable:
      return "ExponentiallyStable";
    case Verdict::unstable:
      return "Unstable";
    case Verdict::inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::exponentially_stable:
      return 0;
    case Verdict::unstable:
      return 2;
    case Verdict::inconclusive:
      return 3;
  }
  return 1;
}

std::string tool_version() { return LYACERT_VERSION; }

Certificate wonham_certify(const ProblemSpec& spec) {
  spec.validate();
  Certificate cert;
  cert.tool_version = tool_version();
  cert.input_digest = input_digest(spec);
  cert.seed = spec.seed;
  const Matrix q = spec.weight();
  const ObservedPair pair(spec.a, spec.observation());
  cert.cross_check_abscissa = spectral_abscissa(spec.a);

  cert.detectability = detectability_report(pair, spec.t0);
  cert.eps_star = cert.detectability.eps_star;

  // Quadrature spot check of the detector property on seeded states.
  const PiDetectorResult spot =
      pi_detector_check(spec.a, q, 4, static_cast<std::uint64_t>(spec.seed));
  cert.quadrature_samples = spot.samples_checked;
  cert.quadrature_disagreements = spot.quadrature_disagreements;

  if (spec.cone && spec.cone->is_vector_cone()) {
    cert.stability = analyze_stability(SemigroupProbe(spec.a, spec.cone, SpaceNorm(spec.p)));
  }

  bool solved = false;
  try {
    const LyapunovSolution sol = lyap_solve_direct(spec.a, q);
    cert.p = sol.p;
    cert.residual = sol.residual;
    cert.method = "direct";
    solved = sol.residual <= spec.residual_tol();
    if (!solved) cert.reason = "residual above tolerance";
  } catch (const SingularSystemError& e) {
    cert.method = "spectral-only";
    cert.reason = std::string("resonant spectrum: ") + e.what();
  } catch (const NumericalError& e) {
    cert.method = "spectral-only";
    cert.reason = std::string("direct solve rejected: ") + e.what();
  }

  if (!cert.detectability.l2) {
    cert.verdict = Verdict::inconclusive;
    cert.reason = "detector hypothesis fails";
    if (cert.p) cert.p_min_eigenvalue = min_eigenvalue(*cert.p);
  } else if (!solved) {
    // Resonance forces an eigenvalue with nonnegative real part; otherwise
    // only the abscissa is left to go on, and it is not evidence of stability.
    cert.verdict = cert.cross_check_abscissa < 0.0 ? Verdict::inconclusive : Verdict::unstable;
    if (cert.method == "direct") cert.method = "spectral-only";
  } else {
    const Matrix& p = *cert.p;
    cert.p_min_eigenvalue = min_eigenvalue(p);
    const bool psd = *cert.p_min_eigenvalue >= -spec.psd_tol() * std::max(p.norm(), 1e-300);
    if (psd) {
      cert.verdict = Verdict::exponentially_stable;
      const double eps = -cert.cross_check_abscissa * (1.0 - kGrowthMargin);
      if (eps > 0.0) cert.growth = growth_fit(spec.a, std::min(20.0 / eps, 1e6), 400);
      IntegralCrossCheck check;
      try {
        const IntegralSolution integral = lyap_solve_integral(spec.a, q);
        check.steps = integral.steps;
        check.step = integral.step;
        check.monotone = integral.monotone;
        check.agreement = integral.direct_agreement;
      } catch (const Error& e) {
        check.error = e.what();
      }
      cert.integral = check;
    } else {
      cert.verdict = Verdict::unstable;
      cert.reason = "Lyapunov solution is not positive semidefinite";
    }
  }
  audit_against_abscissa(cert, spec);
  return cert;
}

Json to_json(const DetectabilityReport& r) {
  Json out;
  out["hautus"] = r.hautus;
  out["exponential"] = r.exponential;
  out["l2"] = r.l2;
  out["F"] = r.injection ? matrix_to_json(*r.injection) : Json(nullptr);
  out["unobservable_dim"] = r.unobservable.cols();
  out["abscissa_on_unobservable"] = optional_number(r.abscissa_on_unobservable);
  if (r.t0 && r.eps_star) {
    out["eps_star"] = Json{{"t0", *r.t0}, {"value", *r.eps_star}};
  } else {
    out["eps_star"] = nullptr;
  }
  return out;
}

Json to_json(const StabilityReport& r) {
  Json out;
  out["abscissa"] = r.abscissa;
  out["exponential"] = r.exponential;
  out["l1_pi"] = r.l1_pi;
  out["growth"] = r.growth ? growth_to_json(*r.growth) : Json(nullptr);
  if (r.weak_l1) {
    Json w;
    w["stable"] = r.weak_l1->stable;
    w["exact"] = r.weak_l1->exact;
    if (r.weak_l1->witness) {
      w["witness"] = Json{{"phi", vector_to_json(r.weak_l1->witness->phi)},
                          {"x", vector_to_json(r.weak_l1->witness->x)}};
    } else {
      w["witness"] = nullptr;
    }
    out["weak_l1"] = w;
  } else {
    out["weak_l1"] = nullptr;
  }
  return out;
}

Json to_json(const Certificate& cert) {
  Json out;
  out["verdict"] = to_string(cert.verdict);
  out["P"] = cert.p ? matrix_to_json(*cert.p) : Json(nullptr);
  out["residual"] = cert.residual;
  out["P_min_eigenvalue"] = optional_number(cert.p_min_eigenvalue);
  out["growth"] = cert.growth ? growth_to_json(*cert.growth) : Json(nullptr);
  out["detectability"] = to_json(cert.detectability);
  out["eps_star"] = optional_number(cert.eps_star);
  out["cross_check_abscissa"] = cert.cross_check_abscissa;
  out["tool_version"] = cert.tool_version;
  out["input_digest"] = cert.input_digest;
  out["method"] = cert.method;
  out["reason"] = cert.reason;
  if (cert.integral) {
    const IntegralCrossCheck& c = *cert.integral;
    Json ic;
    ic["steps"] = c.steps;
    ic["step"] = c.step;
    ic["monotone"] = c.monotone;
    ic["agreement"] = optional_number(c.agreement);
    ic["error"] = c.error;
    out["integral_cross_check"] = ic;
  } else {
    out["integral_cross_check"] = nullptr;
  }
  out["stability"] = cert.stability ? to_json(*cert.stability) : Json(nullptr);
  out["quadrature"] = Json{{"samples", cert.quadrature_samples},
                           {"disagreements", cert.quadrature_disagreements}};
  out["seed"] = cert.seed;
  return out;
}

std::vector<std::pair<std::string, std::pair<ProblemSpec, Verdict>>> gallery_fixtures() {
  auto make = [](Matrix a, Matrix c) {
    ProblemSpec s;
    s.a = std::move(a);
    s.c = std::move(c);
    s.seed = 42;
    return s;
  };
  std::vector<std::pair<std::string, std::pair<ProblemSpec, Verdict>>> out;

  out.push_back({"stable_detectable",
                 {make(Vector::Constant(2, -0.5).asDiagonal().toDenseMatrix(), Matrix::Identity(2, 2)),
                  Verdict::exponentially_stable}});

  Matrix a(2, 2);
  a << 1, 0, 0, -2;
  Matrix c(1, 2);
  c << 1, 0;
  out.push_back({"unstable_detectable", {make(a, c), Verdict::unstable}});

  ProblemSpec undetectable;
  undetectable.a = Matrix::Constant(1, 1, 1.0);
  undetectable.q = Matrix::Zero(1, 1);
  undetectable.seed = 42;
  out.push_back({"undetectable", {undetectable, Verdict::inconclusive}});

  a << 0, 1, -1, 0;
  out.push_back({"resonant", {make(a, c), Verdict::unstable}});

  a << 1, 0, 0, -1;
  ProblemSpec metzler = make(a, c);
  metzler.cone = ConeSpec::orthant(2);
  out.push_back({"metzler_weak_detector", {metzler, Verdict::unstable}});

  a << -1, 10, 0, -1;
  Matrix c2(1, 2);
  c2 << 0, 1;
  ProblemSpec transient = make(a, c2);
  transient.t0 = 1.0;
  out.push_back({"stable_transient", {transient, Verdict::exponentially_stable}});
  return out;
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

std::vector<GalleryEntry> run_gallery(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<GalleryEntry> entries;
  Json manifest = Json::array();
  for (auto& [name, fixture] : gallery_fixtures()) {
    GalleryEntry e{name, fixture.first, fixture.second, wonham_certify(fixture.first)};
    write_text_file(out_dir / (name + ".problem.json"), canonical_dump(to_json(e.problem)) + "\n");
    write_text_file(out_dir / (name + ".certificate.json"),
                    canonical_dump(to_json(e.certificate)) + "\n");
    manifest.push_back(Json{{"name", name},
                            {"expected", to_string(e.expected)},
                            {"verdict", to_string(e.certificate.verdict)}});
    entries.push_back(std::move(e));
  }
  write_text_file(out_dir / "manifest.json", canonical_dump(Json{{"fixtures", manifest}}) + "\n");
  return entries;
}

void emit_decay_csv(const ProblemSpec& spec, double horizon, int steps, std::ostream& out) {
  spec.validate();
  if (!(horizon > 0.0) || steps < 1) throw InvalidArgument("emit_decay_csv: need horizon > 0, steps >= 1");
  const Eigen::Index n = spec.a.rows();
  const Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  const Matrix q = spec.weight();
  const SpaceNorm norm(spec.p);
  const double dt = horizon / steps;
  auto num = [](double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ec == std::errc() ? end : buf.data());
  };
  out << "t,state_norm,pi_norm_monomial,paired_QTt\n";
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    // Fresh exponential each row keeps the error from accumulating.
    const Vector y = k == 0 ? x : Vector(expm(spec.a, t) * x);
    const double pi = projective_norm(Tensor2::monomial(y, y, spec.p)).upper;
    out << num(t) << ',' << num(norm(y)) << ',' << num(pi) << ',' << num(y.dot(q * y)) << '\n';
  }
}

std::vector<BatchItem> certify_batch(const std::filesystem::path& in_dir,
                                     const std::filesystem::path& out_dir, int jobs,
                                     const char* seed_override) {
  std::vector<BatchItem> items;
  for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      BatchItem item;
      item.input = entry.path();
      item.output = out_dir / (entry.path().stem().string() + ".certificate.json");
      items.push_back(std::move(item));
    }
  }
  std::sort(items.begin(), items.end(),
            [](const BatchItem& x, const BatchItem& y) { return x.input < y.input; });
  std::filesystem::create_directories(out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      BatchItem& item = items[i];
      try {
        ProblemSpec spec = load_problem(item.input);
        apply_seed_override(spec, seed_override);
        const Certificate cert = wonham_certify(spec);
        write_text_file(item.output, canonical_dump(to_json(cert)) + "\n");
        item.exit_code = exit_code(cert.verdict);
      } catch (const std::exception& e) {
        item.exit_code = 1;
        item.error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return items;
}

}  // namespace lyacert
