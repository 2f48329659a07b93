#pragma once

#include <span>
#include <string>
#include <vector>

#include "sharpq/forms.hpp"
#include "sharpq/kummer.hpp"

namespace sharpq {

enum class Branch { kMuPositive, kMuNegative };

const char* to_string(Branch b);

/// Branch matching the sign of mu; throws BranchError for mu == 0.
Branch branch_for(double mu);

/// Equality case of the sharp inequality, parameterised by amplitude C and
/// rate lambda. With b = b_minus and z = lambda x:
///   mu > 0:  f = C e^{-z} M(b, mu, z)
///   mu < 0:  f = C z^{1-mu} e^{-z} M(b + 1 - mu, 2 - mu, z)
struct ExtremiserSpec {
  Branch branch = Branch::kMuPositive;
  double C = 1.0;
  double lambda = 1.0;
  ProblemParams params;
};

struct Extremiser {
  FunctionTriple triple;
  double b = 0.0;          // b_minus
  double kummer_b = 0.0;   // numerator parameter of the Kummer factor
  double kummer_mu = 0.0;  // denominator parameter of the Kummer factor
  // eps == mu^2/4 with a non-terminating Kummer factor: f decays like
  // x^{-mu/2} and int f^2 x^{mu-1} diverges logarithmically.
  bool membership_warning = false;
};

/// Throws BranchError, AdmissibilityError, PoleError, or ConfigError for
/// C == 0 / lambda <= 0.
Extremiser build(const ExtremiserSpec& spec);

/// ((s + 1)/2) D / B, the double root of g. Throws DegenerateDenominator.
double lambda_of(const FunctionTriple& f, const ProblemParams& params,
                 const QuadratureSpec& spec = {});
double lambda_of(const FormValues& forms, const ProblemParams& params);

/// Residual of x f'' + lambda x f' + mu f' + (mu - b) lambda f = 0 with
/// b = b_minus; `scale` is the sum of the absolute values of the four terms.
struct PointResidual {
  double x = 0.0;
  double residual = 0.0;
  double scale = 0.0;
};
std::vector<PointResidual> euler_lagrange_residual(const FunctionTriple& f,
                                                   const ProblemParams& params, double lambda,
                                                   std::span<const double> xs);

/// Partial integrals exhibiting why the second Kummer solution is rejected.
struct GrowthRow {
  double cutoff = 0.0;   // delta (lower limit) or T (upper limit)
  double partial = 0.0;  // partial integral up to this cutoff
};
struct GrowthReport {
  Branch branch = Branch::kMuPositive;
  bool ill_posed = false;  // Kummer parameters hit a pole; rows are empty
  std::string note;
  // mu > 0: int_delta^1 ((e^{-t} psi)'')^2 t^{mu+1}, psi = t^{1-mu} M(b+1-mu, 2-mu, t)
  // mu < 0: int_delta^1 (e^{-t} phi)^2 t^{mu-1},     phi = M(b, mu, t)
  std::vector<GrowthRow> near_zero;
  // mu < 0 only: int_1^T (e^{-t} phi)^2 t^{mu-1}.
  std::vector<GrowthRow> near_infinity;
  // Least-squares slope of log(partial) against log(1/delta) over the last
  // three near_zero rows; tends to |mu| when the integral diverges at 0.
  double growth_exponent = 0.0;
};
GrowthReport rejected_solution_evidence(const ProblemParams& params, double lambda,
                                        const QuadratureSpec& spec = {});

/// x_k = 10^{lo + k (hi - lo) / (n - 1)}.
std::vector<double> log_spaced(double lo_exp, double hi_exp, int n);

}  // namespace sharpq
