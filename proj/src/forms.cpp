#include "sharpq/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "sharpq/errors.hpp"

namespace sharpq {

namespace {

double sq(double v) { return v * v; }

// Runs the shared-node quadrature and turns non-convergence into the
// membership diagnosis.
std::vector<IntegralResult> integrate_forms(const FunctionTriple& f, const MultiIntegrand& h,
                                            std::size_t n, const QuadratureSpec& spec,
                                            const char* what) {
  try {
    return integrate_halfline(h, n, spec);
  } catch (const NonConvergence& e) {
    std::ostringstream os;
    os << what << " of '" << f.label << "' did not converge; function presumably outside "
       << "the weighted space: " << e.what();
    throw DivergenceSuspected(os.str());
  }
}

double residual_integrand(const Jet& j, double x, double mu, const ResidualCoefficients& c) {
  const double inner = x * j.d2f + c.alpha * x * j.df + c.beta * j.df + c.gamma * j.f;
  return sq(weighted(inner, x, 0.5 * (mu - 1.0)));
}

bool is_canonical(const ProblemParams& params, double b) {
  const DerivedParams d = derive(params);
  const double tol = 1e-12 * std::max(1.0, std::abs(params.mu));
  return std::abs(b - d.b_minus) <= tol || std::abs(b - d.b_plus) <= tol;
}

}  // namespace

double weighted(double v, double x, double p) {
  if (v == 0.0) return 0.0;
  if (p == 0.0) return v;
  const double mag = std::exp(std::log(std::abs(v)) + p * std::log(x));
  return v < 0.0 ? -mag : mag;
}

FormValues form_values(const FunctionTriple& f, const ProblemParams& params,
                       const QuadratureSpec& spec) {
  const double mu = params.mu;
  const double eps = params.eps;
  const MultiIntegrand h = [&](double x, std::span<double> out) {
    const Jet j = f(x);
    const double a = sq(weighted(j.d2f, x, 0.5 * (mu + 1.0)));
    const double dx_hi = sq(weighted(j.df, x, 0.5 * (mu + 1.0)));
    const double dx_lo = sq(weighted(j.df, x, 0.5 * (mu - 1.0)));
    const double f_lo = sq(weighted(j.f, x, 0.5 * (mu - 1.0)));
    out[0] = a;
    out[1] = dx_hi - eps * f_lo;
    out[2] = sq(weighted(j.df, x, 0.5 * mu));
    out[3] = a + dx_hi + dx_lo + f_lo;
  };
  const auto r = integrate_forms(f, h, 4, spec, "form integrals");
  FormValues v;
  v.A = r[0].value;
  v.B = r[1].value;
  v.D = r[2].value;
  v.norm_sq = r[3].value;
  v.err = r[0].err_estimate + r[1].err_estimate + r[2].err_estimate + r[3].err_estimate;
  return v;
}

double norm_prime_sq(const FunctionTriple& f, const ProblemParams& params,
                     const QuadratureSpec& spec) {
  const double mu = params.mu;
  const MultiIntegrand h = [&](double x, std::span<double> out) {
    const Jet j = f(x);
    out[0] = sq(weighted(j.d2f, x, 0.5 * (mu + 1.0))) + sq(weighted(j.df, x, 0.5 * (mu + 1.0))) +
             sq(weighted(j.df, x, 0.5 * mu)) + sq(weighted(j.f, x, 0.5 * (mu - 1.0)));
  };
  return integrate_forms(f, h, 1, spec, "primed norm").front().value;
}

IntegralResult residual_lhs(const FunctionTriple& f, const ProblemParams& params,
                            const ResidualCoefficients& coeffs, const QuadratureSpec& spec) {
  const MultiIntegrand h = [&](double x, std::span<double> out) {
    out[0] = residual_integrand(f(x), x, params.mu, coeffs);
  };
  return integrate_forms(f, h, 1, spec, "residual integral").front();
}

IntegralResult expanded_residual(const FunctionTriple& f, const ProblemParams& params,
                                 const ResidualCoefficients& coeffs,
                                 const QuadratureSpec& spec) {
  const double mu = params.mu;
  const MultiIntegrand h = [&](double x, std::span<double> out) {
    const Jet j = f(x);
    out[0] = sq(weighted(j.d2f, x, 0.5 * (mu + 1.0)));  // A
    out[1] = sq(weighted(j.df, x, 0.5 * (mu + 1.0)));   // Ix
    out[2] = sq(weighted(j.df, x, 0.5 * (mu - 1.0)));   // I1
    out[3] = sq(weighted(j.f, x, 0.5 * (mu - 1.0)));    // I0
    out[4] = sq(weighted(j.df, x, 0.5 * mu));           // D
    out[5] = weighted(j.f * j.df, x, mu - 1.0);         // Ic
  };
  const auto r = integrate_forms(f, h, 6, spec, "expansion integrals");
  const double a = coeffs.alpha;
  const double b = coeffs.beta;
  const double c = coeffs.gamma;
  const double A = r[0].value, Ix = r[1].value, I1 = r[2].value, I0 = r[3].value,
               D = r[4].value, Ic = r[5].value;
  const std::array<double, 11> terms = {
      A,
      a * a * Ix,
      b * b * I1,
      c * c * I0,
      2.0 * a * b * D,
      -a * (mu + 1.0) * D,
      -b * mu * I1,
      -2.0 * c * D,
      -2.0 * c * mu * Ic,
      -a * c * mu * I0,
      2.0 * b * c * Ic,
  };
  const std::array<double, 11> weights = {1.0,
                                          a * a,
                                          b * b,
                                          c * c,
                                          std::abs(2.0 * a * b),
                                          std::abs(a * (mu + 1.0)),
                                          std::abs(b * mu),
                                          std::abs(2.0 * c),
                                          std::abs(2.0 * c * mu),
                                          std::abs(a * c * mu),
                                          std::abs(2.0 * b * c)};
  const std::array<int, 11> source = {0, 1, 2, 3, 4, 4, 2, 4, 5, 3, 5};
  IntegralResult out;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    out.value += terms[k];
    out.err_estimate += weights[k] * r[source[k]].err_estimate;
  }
  out.refinements_used = r[0].refinements_used;
  return out;
}

GAlpha g_alpha(const FormValues& forms, const ProblemParams& params, double alpha, double b) {
  GAlpha g;
  g.linear_coeff = params.mu + 1.0 - 2.0 * b;
  g.value = alpha * alpha * forms.B - alpha * g.linear_coeff * forms.D + forms.A;
  // forms.err sums all four components; norm_sq does not enter g.
  g.err = (alpha * alpha + std::abs(alpha * g.linear_coeff) + 1.0) * forms.err;
  g.canonical = is_canonical(params, b);
  return g;
}

GAlpha g_alpha(const FunctionTriple& f, const ProblemParams& params, double alpha, double b,
               const QuadratureSpec& spec) {
  return g_alpha(form_values(f, params, spec), params, alpha, b);
}

IdentityCheck identity_gap(const FunctionTriple& f, const ProblemParams& params, double alpha,
                           double b, const QuadratureSpec& spec) {
  const ResidualCoefficients c{alpha, params.mu, (params.mu - b) * alpha};
  const IntegralResult lhs = residual_lhs(f, params, c, spec);
  const GAlpha g = g_alpha(f, params, alpha, b, spec);
  IdentityCheck out;
  out.lhs = lhs.value;
  out.rhs = g.value;
  out.gap = lhs.value - g.value;
  out.err = lhs.err_estimate + g.err;
  out.canonical = g.canonical;
  return out;
}

double quotient(const FormValues& forms) {
  if (!(forms.D > forms.err) || forms.D <= 0.0) {
    std::ostringstream os;
    os << "D = " << forms.D << " is not resolved above its error " << forms.err;
    throw DegenerateDenominator(os.str());
  }
  return forms.A * forms.B / (forms.D * forms.D);
}

double quotient(const FunctionTriple& f, const ProblemParams& params, const QuadratureSpec& spec) {
  return quotient(form_values(f, params, spec));
}

std::vector<LimitSample> limit_probe(const FunctionTriple& f, const ProblemParams& params,
                                     std::span<const double> xs) {
  std::vector<LimitSample> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("limit_probe needs x in (0, inf)");
    const Jet j = f(x);
    LimitSample s{x, sq(weighted(j.df, x, 0.5 * (params.mu + 1.0))),
                  sq(weighted(j.df, x, 0.5 * params.mu)), sq(weighted(j.f, x, 0.5 * params.mu))};
    if (!std::isfinite(s.G1) || !std::isfinite(s.G2) || !std::isfinite(s.G3)) {
      std::ostringstream os;
      os << "non-finite boundary quantity at x = " << x;
      throw DomainError(os.str());
    }
    out.push_back(s);
  }
  return out;
}

double consistency_error(const FunctionTriple& f, std::span<const double> xs) {
  double worst = 0.0;
  for (double x : xs) {
    const double h = 1e-5 * std::min(1.0, x);
    const Jet c = f(x);
    const Jet p = f(x + h);
    const Jet m = f(x - h);
    const double fd1 = (p.f - m.f) / (2.0 * h);
    const double fd2 = (p.df - m.df) / (2.0 * h);
    const double s1 = std::abs(c.df) + std::abs(c.f) / std::max(1.0, x);
    const double s2 = std::abs(c.d2f) + std::abs(c.df) / std::max(1.0, x);
    if (s1 > 0.0) worst = std::max(worst, std::abs(fd1 - c.df) / s1);
    if (s2 > 0.0) worst = std::max(worst, std::abs(fd2 - c.d2f) / s2);
  }
  return worst;
}

std::vector<NormComparisonRow> norm_comparison(const FunctionTriple& f,
                                               const ProblemParams& params,
                                               std::span<const double> deltas,
                                               const QuadratureSpec& spec) {
  const double mu = params.mu;
  std::vector<NormComparisonRow> out;
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("norm_comparison needs delta in (0, 1)");
    // Integrate in u = log x: the mass of these integrands is spread over decades.
    const auto in_log = [&](auto integrand) {
      return integrate_interval(
                 [&](double u) {
                   const double x = std::exp(u);
                   return integrand(f(x), x) * x;
                 },
                 std::log(delta), 0.0, spec)
          .value;
    };
    NormComparisonRow row;
    row.delta = delta;
    row.natural_only = in_log([&](const Jet& j, double x) {
      return sq(weighted(j.df, x, 0.5 * (mu - 1.0)));
    });
    row.primed = in_log([&](const Jet& j, double x) {
      return sq(weighted(j.d2f, x, 0.5 * (mu + 1.0))) + sq(weighted(j.df, x, 0.5 * (mu + 1.0))) +
             sq(weighted(j.df, x, 0.5 * mu)) + sq(weighted(j.f, x, 0.5 * (mu - 1.0)));
    });
    out.push_back(row);
  }
  return out;
}

}  // namespace sharpq
