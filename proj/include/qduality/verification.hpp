#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qduality {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum class Comparison { AtMost, AtLeast, Near };

/// One measured quantity against its tolerance. The provenance string says
/// where the tolerance comes from (integrator order, scheme order, roundoff model).
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::AtMost;
  double target = 0.0;  // Near: pass iff |measured - target| <= tolerance
  bool pass = false;
  std::string provenance;

  static Check at_most(std::string name, double measured, double tolerance, std::string provenance);
  static Check at_least(std::string name, double measured, double bound, std::string provenance);
  static Check near(std::string name, double measured, double target, double tolerance, std::string provenance);
};

struct CriterionResult {
  std::string id;     // "A1" ... "A6"
  std::string title;
  std::vector<Check> checks;
  std::string error;  // non-empty if the criterion could not be evaluated
  double seconds = 0.0;

  bool pass() const;
};

struct ConvergenceRow {
  double step = 0.0;
  double error = 0.0;
  double order = 0.0;  // log2-style observed order against the previous row; NaN for the first
};

struct ConvergenceTable {
  std::string name;
  std::string variable;        // "dt" or "dx"
  std::string expected;        // "2", "4", "spectral"
  std::vector<ConvergenceRow> rows;
  bool pass = false;
  std::string provenance;
};

struct VerifyOptions {
  std::size_t n = 256;
  double dt = 1e-3;
  std::uint64_t seed = kDefaultSeed;
};

enum class Suite { Quick, Full };

std::optional<Suite> parse_suite(std::string_view s);
std::string_view to_string(Suite s);

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::string mutation;
  VerifyOptions options;
  std::vector<CriterionResult> criteria;
  std::vector<ConvergenceTable> convergence;

  bool pass() const;
  std::string to_json() const;
};

// Individual acceptance criteria.
CriterionResult criterion_a1(const VerifyOptions& opt);  // gradient oracle
CriterionResult criterion_a2(const VerifyOptions& opt);  // kinetic forms
CriterionResult criterion_a3(const VerifyOptions& opt);  // duality residual on solutions
CriterionResult criterion_a4(const VerifyOptions& opt);  // wave-side energy identity
CriterionResult criterion_a5(const VerifyOptions& opt);  // two derivations agree
CriterionResult criterion_a6(const VerifyOptions& opt);  // de Broglie limit, decomposition

std::vector<ConvergenceTable> convergence_studies(const VerifyOptions& opt);

/// quick: A1-A4. full: A1-A6 plus convergence tables.
VerificationReport verify(Suite suite, const VerifyOptions& opt = {});

/// One line per criterion, e.g. "A3 PASS  duality residual ... (0.41 s)".
std::string summary_line(const CriterionResult& r);

}  // namespace qduality
