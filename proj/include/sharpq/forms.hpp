#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sharpq/problem.hpp"
#include "sharpq/quadrature.hpp"

namespace sharpq {

/// f, f', f'' at one point.
struct Jet {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

/// A twice differentiable function on (0, inf) given by an evaluator of
/// its 2-jet. Evaluators must be safe to call concurrently.
struct FunctionTriple {
  std::function<Jet(double)> eval;
  std::string label;

  Jet operator()(double x) const { return eval(x); }
};

/// The integrals of the quotient
///   A = int f''^2 x^{mu+1},  B = int (x^2 f'^2 - eps f^2) x^{mu-1},
///   D = int f'^2 x^mu,
/// and norm_sq = int x^{mu+1} f''^2 + (x^{mu+1} + x^{mu-1}) f'^2 + x^{mu-1} f^2.
/// err is the sum of the four quadrature error estimates.
struct FormValues {
  double A = 0.0;
  double B = 0.0;
  double D = 0.0;
  double norm_sq = 0.0;
  double err = 0.0;
};

struct ResidualCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// g(alpha) = alpha^2 B - alpha (mu + 1 - 2b) D + A.
struct GAlpha {
  double value = 0.0;
  double err = 0.0;
  double linear_coeff = 0.0;  // mu + 1 - 2b
  bool canonical = true;      // b is one of the roots b_minus, b_plus
};

/// Both sides of the expanded-square identity at beta = mu,
/// gamma = (mu - b) alpha.
struct IdentityCheck {
  double lhs = 0.0;  // residual_lhs
  double rhs = 0.0;  // g_alpha
  double gap = 0.0;  // lhs - rhs
  double err = 0.0;  // combined quadrature error
  bool canonical = true;
};

/// Boundary quantities of the weighted space:
/// G1 = f'^2 x^{mu+1}, G2 = f'^2 x^mu, G3 = f^2 x^mu.
struct LimitSample {
  double x = 0.0;
  double G1 = 0.0;
  double G2 = 0.0;
  double G3 = 0.0;
};

/// v * x^p evaluated in log space, so that 0 * inf and overflowing powers
/// of tiny or huge x never produce NaN.
double weighted(double v, double x, double p);

/// Throws DivergenceSuspected when any constituent integral fails to converge.
FormValues form_values(const FunctionTriple& f, const ProblemParams& params,
                       const QuadratureSpec& spec = {});

/// int x^{mu+1} f''^2 + (x^{mu+1} + x^mu) f'^2 + x^{mu-1} f^2 (the larger space).
double norm_prime_sq(const FunctionTriple& f, const ProblemParams& params,
                     const QuadratureSpec& spec = {});

/// int (x f'' + alpha x f' + beta f' + gamma f)^2 x^{mu-1}.
IntegralResult residual_lhs(const FunctionTriple& f, const ProblemParams& params,
                            const ResidualCoefficients& coeffs, const QuadratureSpec& spec = {});

/// The same quantity assembled from separately integrated pieces after the
/// four integrations by parts:
///   A + a^2 Ix + b^2 I1 + c^2 I0 + 2ab D - a(mu+1) D - b mu I1 - 2c D
///     - 2c mu Ic - a c mu I0 + 2bc Ic
/// with Ix = int f'^2 x^{mu+1}, I1 = int f'^2 x^{mu-1}, I0 = int f^2 x^{mu-1},
/// Ic = int f f' x^{mu-1}.
IntegralResult expanded_residual(const FunctionTriple& f, const ProblemParams& params,
                                 const ResidualCoefficients& coeffs,
                                 const QuadratureSpec& spec = {});

GAlpha g_alpha(const FormValues& forms, const ProblemParams& params, double alpha, double b);
GAlpha g_alpha(const FunctionTriple& f, const ProblemParams& params, double alpha, double b,
               const QuadratureSpec& spec = {});

IdentityCheck identity_gap(const FunctionTriple& f, const ProblemParams& params, double alpha,
                           double b, const QuadratureSpec& spec = {});

/// A B / D^2. Throws DegenerateDenominator when D does not exceed its error.
double quotient(const FormValues& forms);
double quotient(const FunctionTriple& f, const ProblemParams& params,
                const QuadratureSpec& spec = {});

/// Throws DomainError on a non-finite evaluation.
std::vector<LimitSample> limit_probe(const FunctionTriple& f, const ProblemParams& params,
                                     std::span<const double> xs);

/// Largest centered-difference mismatch over the probes, measured as
/// |fd(f) - f'| / (|f'| + |f| / max(1, x)) and likewise for f' -> f''.
/// Step 1e-5 * min(1, x).
double consistency_error(const FunctionTriple& f, std::span<const double> xs);

/// Partial integrals over [delta, 1] of the f'^2 x^{mu-1} term (present in
/// the natural norm only) and of the full primed-norm integrand.
struct NormComparisonRow {
  double delta = 0.0;
  double natural_only = 0.0;  // int_delta^1 f'^2 x^{mu-1}
  double primed = 0.0;        // int_delta^1 primed-norm integrand
};
std::vector<NormComparisonRow> norm_comparison(const FunctionTriple& f,
                                               const ProblemParams& params,
                                               std::span<const double> deltas,
                                               const QuadratureSpec& spec = {});

}  // namespace sharpq
