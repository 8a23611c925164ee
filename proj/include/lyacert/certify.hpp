#pragma once

// Problem files, the Lyapunov certification pipeline, the fixture gallery
// and certificate emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/canonical_json.hpp"
#include "lyacert/detect.hpp"
#include "lyacert/matrix_kernel.hpp"
#include "lyacert/order_structures.hpp"
#include "lyacert/semigroup.hpp"

namespace lyacert {

inline constexpr double kDefaultResidualTol = 1e-8;
inline constexpr double kDefaultPsdTol = 1e-9;

struct ProblemSpec {
  Matrix a;
  /// Exactly one of c, q is set.
  std::optional<Matrix> c;
  std::optional<Matrix> q;
  double p = 2.0;
  /// Absent means the PSD cone on Sym(n).
  std::optional<ConeSpec> cone;
  std::optional<double> t0;
  std::map<std::string, double> tolerances;
  std::int64_t seed = 0;

  /// Throws DimensionError / InvalidArgument / NotPsdError.
  void validate() const;
  /// C, or rkhs_factor(Q).
  Matrix observation() const;
  /// Q, or C^T C.
  Matrix weight() const;
  ConeSpec effective_cone() const;
  double tolerance(const std::string& name, double fallback) const;
  double residual_tol() const { return tolerance("residual", kDefaultResidualTol); }
  double psd_tol() const { return tolerance("psd", kDefaultPsdTol); }

  friend bool operator==(const ProblemSpec& x, const ProblemSpec& y);
};

/// Parses and validates a problem object. Errors carry a JSON pointer.
ProblemSpec parse_problem(const Json& doc);
ProblemSpec parse_problem_text(std::string_view text);
ProblemSpec load_problem(const std::filesystem::path& file);
Json to_json(const ProblemSpec& spec);

/// Replaces the seed when `value` holds an integer (the LYACERT_SEED hook).
void apply_seed_override(ProblemSpec& spec, const char* value);

/// SHA-256 of the canonical serialization.
std::string input_digest(const ProblemSpec& spec);

enum class Verdict { exponentially_stable, unstable, inconclusive };

std::string to_string(Verdict v);
/// 0 stable, 2 unstable, 3 inconclusive.
int exit_code(Verdict v);

struct IntegralCrossCheck {
  long steps = 0;
  double step = 0.0;
  bool monotone = true;
  std::optional<double> agreement;
  std::string error;
};

struct Certificate {
  Verdict verdict = Verdict::inconclusive;
  std::optional<Matrix> p;
  double residual = kInf;
  std::optional<double> p_min_eigenvalue;
  std::optional<GrowthBound> growth;
  DetectabilityReport detectability;
  std::optional<double> eps_star;
  double cross_check_abscissa = 0.0;
  std::string tool_version;
  std::string input_digest;
  /// "direct" or "spectral-only".
  std::string method;
  std::string reason;
  std::optional<IntegralCrossCheck> integral;
  /// Cone-level analysis when the problem names a vector cone.
  std::optional<StabilityReport> stability;
  int quadrature_samples = 0;
  int quadrature_disagreements = 0;
  std::int64_t seed = 0;
};

/// Detectability report, direct Lyapunov solve, PSD test on P, and a
/// spectral-abscissa self-audit. Throws InternalInconsistencyError (with
/// the problem attached) when the verdict contradicts the abscissa.
Certificate wonham_certify(const ProblemSpec& spec);

Json to_json(const Certificate& cert);
Json to_json(const DetectabilityReport& report);
Json to_json(const StabilityReport& report);

std::string tool_version();

struct GalleryEntry {
  std::string name;
  ProblemSpec problem;
  Verdict expected = Verdict::inconclusive;
  Certificate certificate;
};

/// The fixtures alone, without certifying.
std::vector<std::pair<std::string, std::pair<ProblemSpec, Verdict>>> gallery_fixtures();

/// Writes <name>.problem.json, <name>.certificate.json and manifest.json.
std::vector<GalleryEntry> run_gallery(const std::filesystem::path& out_dir);

/// CSV of t, ||T(t)x||, pi(T(t)x (x) T(t)x), <Q T(t)x, T(t)x> for x the
/// normalized all-ones vector; steps + 1 rows after the header.
void emit_decay_csv(const ProblemSpec& spec, double horizon, int steps, std::ostream& out);

struct BatchItem {
  std::filesystem::path input;
  std::filesystem::path output;
  int exit_code = 1;
  std::string error;
};

/// Certifies every *.json in in_dir into out_dir with `jobs` workers.
std::vector<BatchItem> certify_batch(const std::filesystem::path& in_dir,
                                     const std::filesystem::path& out_dir, int jobs,
                                     const char* seed_override = nullptr);

void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace lyacert
