#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sharpq/extremiser.hpp"
#include "sharpq/forms.hpp"
#include "sharpq/minimiser.hpp"

// Verification suites and the grid sweep built on them.

namespace sharpq {

inline constexpr const char* kToolVersion = "1.0.0";

// Tolerances of the suites.
inline constexpr double kIdentityRelTol = 1e-8;
inline constexpr double kExtremalRelTol = 1e-6;
inline constexpr double kResidualTol = 1e-8;
inline constexpr double kLambdaRelTol = 1e-6;
inline constexpr double kMinimiserRelTol = 1e-3;
inline constexpr double kLowerBoundSlack = 1e-6;

/// |a - b| / max(|a|, |b|, 1e-12).
double relative_gap(double a, double b);

/// Polynomial-times-exponential functions used by the identity and
/// inequality suites; for mu <= 0 they carry a factor x^max(2, ceil(1 - mu))
/// so that every integral converges and every boundary term at 0 vanishes.
std::vector<FunctionTriple> builtin_test_functions(const ProblemParams& params);

struct IdentityRow {
  std::string label;
  double alpha = 0.0;
  double b = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_gap = 0.0;
};

struct InequalityRow {
  std::string label;
  double quotient = 0.0;
  double sharp_const = 0.0;
  bool holds = false;  // quotient >= sharp_const (1 - 1e-9)
};

struct VerifyReport {
  ProblemParams params;
  DerivedParams derived;
  std::vector<IdentityRow> identity;
  std::vector<InequalityRow> inequality;
  double identity_gap_max = 0.0;
  bool passed = false;
};

/// Runs the identity at every alpha in `alphas`, b in {b_minus, b_plus}, and
/// the inequality on `functions` (built-ins when empty).
VerifyReport run_verify(const ProblemParams& params, const std::vector<double>& alphas,
                        const QuadratureSpec& spec = {},
                        std::vector<FunctionTriple> functions = {});

struct ExtremalReport {
  ProblemParams params;
  DerivedParams derived;
  Branch branch = Branch::kMuPositive;
  double lambda = 1.0;
  std::optional<double> quotient;  // empty when the extremiser leaves the space
  std::string quotient_note;
  double quotient_rel_err = 0.0;
  std::optional<double> lambda_recovered;
  double residual_max = 0.0;  // max |residual| / scale over 50 points
  std::vector<LimitSample> limits;
  double near_zero_slope = 0.0;  // d log|f| / d log x between 1e-7 and 1e-6
  bool membership_warning = false;
  bool passed = false;
};

ExtremalReport run_extremal(const ProblemParams& params, double lambda,
                            const QuadratureSpec& spec = {});

enum class EpsMode { kAbsolute, kFraction };
enum class OutputFormat { kCsv, kJson };

struct SweepConfig {
  std::vector<double> mu_grid;
  EpsMode eps_mode = EpsMode::kFraction;
  std::vector<double> eps_values;  // absolute eps or fractions of mu^2/4
  QuadratureSpec quad;
  int K = 16;
  double scale = 1.0;
  BasisFamily family = BasisFamily::kMultiRate;
  double ratio = 0.5;
  int restarts = 8;
  std::uint64_t seed = 42;
  std::string output;  // empty: standard output
  OutputFormat format = OutputFormat::kCsv;
  int parallelism = 1;

  /// Throws ConfigError.
  void validate() const;
  /// Applies key=value lines; '#' starts a comment. Throws ConfigError on an
  /// unknown key or malformed value.
  void apply_file(const std::string& path);
  void apply(const std::string& key, const std::string& value);
  /// Canonical key=value text, the input of the config hash.
  std::string canonical() const;
};

/// FNV-1a 64-bit, hex encoded.
std::string config_hash(const SweepConfig& config);

struct SweepRecord {
  double mu = 0.0;
  double eps = 0.0;
  double s = 0.0;
  double sharp_const = 0.0;
  std::optional<double> extremal_quotient;
  std::optional<double> identity_gap_max;
  std::optional<double> minimiser_value;
  std::optional<double> min_minus_sharp;
  std::string status;              // ok, warning(membership), failed(tolerance)
  std::vector<std::string> notes;  // reasons for nulls and failures
};

SweepRecord run_record(const ProblemParams& params, const SweepConfig& config);

/// Grid in mu-major order; computed with `config.parallelism` threads.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

inline constexpr const char* kCsvHeader =
    "mu,eps,s,sharp_const,extremal_quotient,identity_gap_max,minimiser_value,min_minus_sharp,"
    "status";

/// 17 significant digits, LF line endings, empty field for a null.
std::string to_csv(const std::vector<SweepRecord>& records);
nlohmann::json to_json(const std::vector<SweepRecord>& records, const SweepConfig& config);

}  // namespace sharpq
