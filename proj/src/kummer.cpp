#include "sharpq/kummer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sharpq/compensated.hpp"
#include "sharpq/errors.hpp"

namespace sharpq::kummer {

namespace {

constexpr int kMaxTerms = 20000;
constexpr double kTinyTerm = 1e-16;
constexpr double kCancellationBudget = 1e-10;
// Above this the series would overflow before the damping is applied.
constexpr double kSeriesOverflowZ = 700.0;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::nearbyint(x); }

std::string describe(double b, double mu, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "1F1(" << b << ", " << mu << ", " << z << ")";
  return os.str();
}

// log|Gamma(x)| and sign(Gamma(x)); x must not be a nonpositive integer.
double log_abs_gamma(double x, int& sign) {
  sign = 1;
  if (x < 0.0 && static_cast<long long>(std::ceil(-x)) % 2 == 1) sign = -1;
  return std::lgamma(x);
}

// Summation core shared by the plain and the damped path. `first` is the
// k = 0 term (1, or e^{-z} when the damping is folded into the terms).
SeriesInfo sum_series(double b, double mu, double z, double first) {
  SeriesInfo info;
  if (first == 0.0) return info;  // damping underflowed
  NeumaierSum<double> acc;
  double t = first;
  acc.add(t);
  info.terms = 1;
  int small_run = 0;
  const double settle_k = std::abs(b) + std::abs(mu) + std::abs(z);
  for (int k = 0; k < kMaxTerms; ++k) {
    const double num = b + k;
    if (num == 0.0) {
      info.terminated = true;
      break;
    }
    const double ratio = num * z / ((mu + k) * (k + 1.0));
    t *= ratio;
    if (!std::isfinite(t)) {
      throw PrecisionError(describe(b, mu, z) + ": series term overflow");
    }
    acc.add(t);
    ++info.terms;
    const double partial = std::abs(acc.value());
    small_run = std::abs(t) < kTinyTerm * partial ? small_run + 1 : 0;
    // Three consecutive negligible terms only count once the term ratio is
    // below 1/2 and can no longer grow.
    if (small_run >= 3 && k >= settle_k && std::abs(ratio) < 0.5) break;
    if (t == 0.0 && k >= settle_k) break;
    if (k + 1 == kMaxTerms) {
      throw PrecisionError(describe(b, mu, z) + ": series did not settle");
    }
  }
  info.value = acc.value();
  info.abs_sum = acc.abs_sum();
  // A terminating series is a polynomial evaluated to absolute accuracy
  // ~ terms * eps * abs_sum; near its real zeros a small |sum| is genuine.
  if (!info.terminated && std::abs(info.value) < kCancellationBudget * info.abs_sum) {
    std::ostringstream os;
    os.precision(3);
    os << describe(b, mu, z) << ": catastrophic cancellation (|sum| = " << std::abs(info.value)
       << ", sum|terms| = " << info.abs_sum << ")";
    throw PrecisionError(os.str());
  }
  return info;
}

struct Asymptotic {
  bool usable = false;
  double value = 0.0;
};

// e^{-z} M(b, mu, z) from the large-z expansion. Not usable when the series
// in 1/z does not reach full precision before diverging, or when the
// discarded e^{-z} z^{-b} part is not negligible.
Asymptotic damped_asymptotic(double b, double mu, double z) {
  Asymptotic out;
  int sg_mu = 1;
  int sg_b = 1;
  const double lg_mu = log_abs_gamma(mu, sg_mu);
  const double lg_b = log_abs_gamma(b, sg_b);

  if (!is_nonpositive_integer(mu - b)) {
    int sg_mb = 1;
    const double lg_mb = log_abs_gamma(mu - b, sg_mb);
    // |second part| / |leading part| ~ Gamma(b)/Gamma(mu-b) e^{-z} z^{mu-2b}
    const double log_ratio = lg_b - lg_mb - z + (mu - 2.0 * b) * std::log(z);
    if (log_ratio > std::log(1e-17)) return out;
  }

  NeumaierSum<double> acc;
  double u = 1.0;
  acc.add(u);
  bool settled = false;
  for (int s = 0; s < 400; ++s) {
    const double next = u * (1.0 - b + s) * (mu - b + s) / ((s + 1.0) * z);
    if (next == 0.0) {
      settled = true;
      break;
    }
    if (std::abs(next) > std::abs(u)) break;  // expansion starts to diverge
    u = next;
    acc.add(u);
    if (std::abs(u) < 1e-17 * std::abs(acc.value())) {
      settled = true;
      break;
    }
  }
  if (!settled) return out;

  const double log_pref = lg_mu - lg_b + (b - mu) * std::log(z);
  out.value = sg_mu * sg_b * std::exp(log_pref) * acc.value();
  out.usable = std::isfinite(out.value);
  return out;
}

}  // namespace

bool is_terminating(double b) { return is_nonpositive_integer(b); }

void check_pole(double b, double mu) {
  if (!std::isfinite(b) || !std::isfinite(mu)) {
    throw DomainError("1F1 parameters must be finite");
  }
  if (!is_nonpositive_integer(mu)) return;
  // Polynomial of degree -b ends before the vanishing denominator (mu)_k.
  if (is_terminating(b) && -b < -mu) return;
  std::ostringstream os;
  os.precision(17);
  os << "1F1(" << b << ", " << mu << ", .): mu is a pole of the series";
  throw PoleError(os.str());
}

SeriesInfo series(double b, double mu, double z) {
  check_pole(b, mu);
  if (!std::isfinite(z)) throw DomainError(describe(b, mu, z) + ": non-finite argument");
  if (z == 0.0) return SeriesInfo{1.0, 1.0, 1, false};
  return sum_series(b, mu, z, 1.0);
}

double m_eval(const KummerParams& p, double z) {
  if (!(z >= 0.0) || z > p.z_max) {
    throw DomainError(describe(p.b, p.mu, z) + ": argument outside [0, z_max]");
  }
  return series(p.b, p.mu, z).value;
}

Derivs m_derivatives(const KummerParams& p, double z) {
  Derivs d;
  d.w = m_eval(p, z);
  if (p.b != 0.0) {
    d.dw = p.b / p.mu * m_eval({p.b + 1.0, p.mu + 1.0, p.z_max}, z);
  }
  if (p.b != 0.0 && p.b != -1.0) {
    d.d2w = p.b * (p.b + 1.0) / (p.mu * (p.mu + 1.0)) * m_eval({p.b + 2.0, p.mu + 2.0, p.z_max}, z);
  }
  return d;
}

double ode_residual(const KummerParams& p, double z) {
  const Derivs d = m_derivatives(p, z);
  return z * d.d2w + (p.mu - z) * d.dw - p.b * d.w;
}

double ode_residual_scale(const KummerParams& p, double z) {
  const Derivs d = m_derivatives(p, z);
  return (1.0 + std::abs(d.w) + std::abs(d.dw) + std::abs(d.d2w)) * (1.0 + z);
}

double damped_eval(double b, double mu, double z, double z_max) {
  check_pole(b, mu);
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw DomainError(describe(b, mu, z) + ": damped evaluation needs finite z >= 0");
  }
  if (z == 0.0) return 1.0;
  if (is_terminating(b)) {
    // e^{-z} times a polynomial; folding the damping into the first term
    // keeps large z finite.
    return sum_series(b, mu, z, std::exp(-z)).value;
  }
  if (z <= z_max) return sum_series(b, mu, z, 1.0).value * std::exp(-z);

  const Asymptotic asym = damped_asymptotic(b, mu, z);
  if (asym.usable) return asym.value;
  if (z < kSeriesOverflowZ) return sum_series(b, mu, z, 1.0).value * std::exp(-z);
  throw PrecisionError(describe(b, mu, z) + ": no accurate evaluation path for damped value");
}

Derivs damped_derivatives(double b, double mu, double z, double z_max) {
  Derivs d;
  d.w = damped_eval(b, mu, z, z_max);
  const double c = mu - b;
  if (c != 0.0) {
    d.dw = -(c / mu) * damped_eval(b, mu + 1.0, z, z_max);
  }
  if (c != 0.0 && c != -1.0) {
    d.d2w = c * (c + 1.0) / (mu * (mu + 1.0)) * damped_eval(b, mu + 2.0, z, z_max);
  }
  return d;
}

}  // namespace sharpq::kummer
