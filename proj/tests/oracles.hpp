#pragma once

// Reference values computed independently of the library: polynomial
// arithmetic plus Gamma-function moments in plain double precision.

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Poly = std::vector<double>;  // coefficient of x^k at index k

inline double moment(double n, double a) { return std::tgamma(n + 1.0) / std::pow(a, n + 1.0); }

inline Poly mul(const Poly& p, const Poly& q) {
  if (p.empty() || q.empty()) return {};
  Poly r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline Poly deriv(const Poly& p) {
  Poly r;
  for (std::size_t k = 1; k < p.size(); ++k) r.push_back(k * p[k]);
  return r;
}

inline Poly axpy(double a, const Poly& x, const Poly& y) {
  Poly r(std::max(x.size(), y.size()), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) r[k] += a * x[k];
  for (std::size_t k = 0; k < y.size(); ++k) r[k] += y[k];
  return r;
}

// int_0^inf P(x) x^w e^{-a x} dx; every term must converge.
inline double integrate(const Poly& p, double w, double a) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] != 0.0) s += p[k] * moment(static_cast<double>(k) + w, a);
  return s;
}

// f = P(x) e^{-r x}: the polynomial parts of f, f', f''.
struct ExpPoly {
  Poly f, d1, d2;
  double rate;
  ExpPoly(Poly p, double r) : f(std::move(p)), rate(r) {
    d1 = axpy(-r, f, deriv(f));
    d2 = axpy(-r, d1, deriv(d1));
  }
};

struct Forms {
  double A, B, D, Ix, I1, I0, Ic;
};

inline Forms forms(const ExpPoly& e, double mu, double eps) {
  const double a = 2.0 * e.rate;
  Forms out;
  out.A = integrate(mul(e.d2, e.d2), mu + 1.0, a);
  out.Ix = integrate(mul(e.d1, e.d1), mu + 1.0, a);
  out.I1 = integrate(mul(e.d1, e.d1), mu - 1.0, a);
  out.I0 = integrate(mul(e.f, e.f), mu - 1.0, a);
  out.Ic = integrate(mul(e.f, e.d1), mu - 1.0, a);
  out.D = integrate(mul(e.d1, e.d1), mu, a);
  out.B = out.Ix - eps * out.I0;
  return out;
}

inline double sharp(double mu, double eps) {
  const double s = std::sqrt(mu * mu - 4.0 * eps);
  return 0.25 * (s + 1.0) * (s + 1.0);
}

inline double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
