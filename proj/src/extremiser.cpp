#include "sharpq/extremiser.hpp"

#include <cmath>
#include <sstream>

#include "sharpq/errors.hpp"

namespace sharpq {

namespace {

using kummer::damped_derivatives;
using kummer::damped_eval;

bool is_positive_integer(double x) { return x > 0.0 && x == std::nearbyint(x); }

// h(z) = z^{1-mu} e^{-z} M(b+1-mu, 2-mu, z) and its z-derivatives. Written
// through the contiguous relations
//   h'  = (1-mu) z^{-mu} e^{-z} M(b-mu, 1-mu, z)
//   h'' = (1-mu)(-mu) z^{-mu-1} e^{-z} M(b-mu-1, -mu, z)
// so no two large terms are subtracted.
kummer::Derivs power_branch(double b, double mu, double z) {
  kummer::Derivs d;
  d.w = weighted(damped_eval(b + 1.0 - mu, 2.0 - mu, z), z, 1.0 - mu);
  d.dw = (1.0 - mu) * weighted(damped_eval(b - mu, 1.0 - mu, z), z, -mu);
  d.d2w = (1.0 - mu) * (-mu) * weighted(damped_eval(b - mu - 1.0, -mu, z), z, -mu - 1.0);
  return d;
}

double ls_slope(const std::vector<GrowthRow>& rows) {
  if (rows.size() < 2) return 0.0;
  const std::size_t n = std::min<std::size_t>(3, rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = rows.size() - n; k < rows.size(); ++k) {
    const double x = -std::log(rows[k].cutoff);
    const double y = std::log(rows[k].partial);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

// Cumulative int_{delta_k}^{1}, one decade at a time, integrating in log t.
template <typename F>
std::vector<GrowthRow> decades_to_zero(F integrand, int decades, const QuadratureSpec& spec) {
  std::vector<GrowthRow> rows;
  double acc = 0.0;
  for (int k = 1; k <= decades; ++k) {
    const double lo = -k * std::log(10.0);
    const double hi = lo + std::log(10.0);
    acc += integrate_interval(
               [&](double u) {
                 const double t = std::exp(u);
                 return integrand(t) * t;
               },
               lo, hi, spec)
               .value;
    rows.push_back({std::pow(10.0, -k), acc});
  }
  return rows;
}

}  // namespace

const char* to_string(Branch b) {
  return b == Branch::kMuPositive ? "mu_positive" : "mu_negative";
}

Branch branch_for(double mu) {
  if (mu > 0.0) return Branch::kMuPositive;
  if (mu < 0.0) return Branch::kMuNegative;
  throw BranchError("mu = 0 has no extremiser characterisation");
}

Extremiser build(const ExtremiserSpec& spec) {
  const ProblemParams& pp = spec.params;
  const Branch expected = branch_for(pp.mu);
  if (spec.branch != expected) {
    std::ostringstream os;
    os << "branch " << to_string(spec.branch) << " does not match mu = " << pp.mu;
    throw BranchError(os.str());
  }
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) {
    throw ConfigError("extremiser rate lambda must be a finite positive number");
  }
  if (spec.C == 0.0 || !std::isfinite(spec.C)) {
    throw ConfigError("extremiser amplitude C must be finite and nonzero");
  }
  const DerivedParams d = derive(pp);
  const double mu = pp.mu;
  const double b = d.b_minus;
  const double C = spec.C;
  const double lambda = spec.lambda;

  Extremiser out;
  out.b = b;
  std::ostringstream label;
  label.precision(6);
  if (expected == Branch::kMuPositive) {
    out.kummer_b = b;
    out.kummer_mu = mu;
    kummer::check_pole(b, mu);
    label << C << " e^{-" << lambda << " x} 1F1(" << b << ", " << mu << ", " << lambda << " x)";
    out.triple = {[=](double x) {
                    const kummer::Derivs g = damped_derivatives(b, mu, lambda * x);
                    return Jet{C * g.w, C * lambda * g.dw, C * lambda * lambda * g.d2w};
                  },
                  label.str()};
  } else {
    out.kummer_b = b + 1.0 - mu;
    out.kummer_mu = 2.0 - mu;
    kummer::check_pole(b + 1.0 - mu, 2.0 - mu);
    kummer::check_pole(b - mu, 1.0 - mu);
    kummer::check_pole(b - mu - 1.0, -mu);
    label << C << " (" << lambda << " x)^{" << 1.0 - mu << "} e^{-" << lambda << " x} 1F1("
          << out.kummer_b << ", " << out.kummer_mu << ", " << lambda << " x)";
    out.triple = {[=](double x) {
                    const kummer::Derivs h = power_branch(b, mu, lambda * x);
                    return Jet{C * h.w, C * lambda * h.dw, C * lambda * lambda * h.d2w};
                  },
                  label.str()};
  }
  out.membership_warning = on_boundary(pp) && !kummer::is_terminating(out.kummer_b);
  return out;
}

double lambda_of(const FormValues& forms, const ProblemParams& params) {
  if (!(forms.B > forms.err) || forms.B <= 0.0) {
    std::ostringstream os;
    os << "B = " << forms.B << " is not resolved above its error " << forms.err;
    throw DegenerateDenominator(os.str());
  }
  const DerivedParams d = derive(params);
  return 0.5 * (d.s + 1.0) * forms.D / forms.B;
}

double lambda_of(const FunctionTriple& f, const ProblemParams& params, const QuadratureSpec& spec) {
  return lambda_of(form_values(f, params, spec), params);
}

std::vector<PointResidual> euler_lagrange_residual(const FunctionTriple& f,
                                                   const ProblemParams& params, double lambda,
                                                   std::span<const double> xs) {
  const DerivedParams d = derive(params);
  const double mu = params.mu;
  std::vector<PointResidual> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("residual probes must lie in (0, inf)");
    const Jet j = f(x);
    const double t1 = x * j.d2f;
    const double t2 = lambda * x * j.df;
    const double t3 = mu * j.df;
    const double t4 = (mu - d.b_minus) * lambda * j.f;
    PointResidual r{x, t1 + t2 + t3 + t4,
                    std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4)};
    if (!std::isfinite(r.residual) || !std::isfinite(r.scale)) {
      std::ostringstream os;
      os << "non-finite Euler-Lagrange residual at x = " << x;
      throw DomainError(os.str());
    }
    out.push_back(r);
  }
  return out;
}

GrowthReport rejected_solution_evidence(const ProblemParams& params, double lambda,
                                        const QuadratureSpec& spec) {
  GrowthReport rep;
  rep.branch = branch_for(params.mu);
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  const DerivedParams d = derive(params);
  const double mu = params.mu;
  const double b = d.b_minus;
  constexpr int kDecades = 6;

  if (rep.branch == Branch::kMuPositive) {
    if (mu == 1.0) {
      rep.ill_posed = true;
      rep.note = "mu = 1: t^{1-mu} = 1, the second solution is not distinct";
      return rep;
    }
    if (is_positive_integer(mu)) {
      rep.ill_posed = true;
      rep.note = "integer mu: the second solution's Kummer parameters hit a pole";
      return rep;
    }
    // x-variable with t = lambda x: (d^2/dx^2)^2 x^{mu+1} picks up lambda^{3-mu}.
    rep.near_zero = decades_to_zero(
        [&](double x) {
          const double z = lambda * x;
          const double second = lambda * lambda * power_branch(b, mu, z).d2w;
          const double w = weighted(second, x, 0.5 * (mu + 1.0));
          return w * w;
        },
        kDecades, spec);
    rep.note = "int_delta^1 ((e^{-t} psi)'')^2 t^{mu+1}, integrand ~ t^{-1-mu} at 0";
  } else {
    try {
      kummer::check_pole(b, mu);
    } catch (const PoleError&) {
      rep.ill_posed = true;
      rep.note = "negative integer mu: M(b, mu, t) has a pole";
      return rep;
    }
    const auto phi_sq = [&](double x) {
      const double w = weighted(damped_eval(b, mu, lambda * x), x, 0.5 * (mu - 1.0));
      return w * w;
    };
    rep.near_zero = decades_to_zero(phi_sq, kDecades, spec);
    double acc = 0.0;
    for (int k = 1; k <= kDecades; ++k) {
      const double lo = (k - 1) * std::log(10.0);
      acc += integrate_interval(
                 [&](double u) {
                   const double x = std::exp(u);
                   return phi_sq(x) * x;
                 },
                 lo, lo + std::log(10.0), spec)
                 .value;
      rep.near_infinity.push_back({std::pow(10.0, k), acc});
    }
    rep.note = "int_delta^1 (e^{-t} phi)^2 t^{mu-1} diverges at 0 (integrand ~ t^{mu-1}); "
               "the tail to infinity stays bounded for s > 0";
  }
  rep.growth_exponent = ls_slope(rep.near_zero);
  return rep;
}

std::vector<double> log_spaced(double lo_exp, double hi_exp, int n) {
  std::vector<double> xs;
  if (n <= 0) return xs;
  if (n == 1) return {std::pow(10.0, lo_exp)};
  for (int k = 0; k < n; ++k) {
    xs.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * k / (n - 1)));
  }
  return xs;
}

}  // namespace sharpq
