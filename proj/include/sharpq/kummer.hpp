#pragma once

// Kummer's confluent hypergeometric function
//
//   M(b, mu, z) = 1F1(b; mu; z) = sum_k (b)_k / (mu)_k z^k / k!,
//
// the solution of z w'' + (mu - z) w' - b w = 0 that equals 1 at z = 0.
//
// Two families of entry points:
//   * m_eval / m_derivatives / ode_residual evaluate M itself for
//     0 <= z <= z_max by compensated series summation.
//   * damped_eval / damped_derivatives evaluate g(z) = e^{-z} M(b, mu, z)
//     for every z >= 0. Beyond z_max the large-argument expansion
//       g(z) ~ Gamma(mu)/Gamma(b) z^{b-mu} sum_s (1-b)_s (mu-b)_s / (s! z^s)
//     is used, and derivatives of g come from the contiguous relation
//       g'(b, mu; z) = -((mu - b)/mu) g(b, mu + 1; z),
//     which never subtracts M' from M.

namespace sharpq::kummer {

inline constexpr double kDefaultZMax = 60.0;

struct KummerParams {
  double b = 0.0;
  double mu = 1.0;
  double z_max = kDefaultZMax;
};

/// Value together with first and second derivative in z.
struct Derivs {
  double w = 0.0;
  double dw = 0.0;
  double d2w = 0.0;
};

/// Diagnostics of one series summation.
struct SeriesInfo {
  double value = 0.0;
  double abs_sum = 0.0;  // sum of |terms|
  int terms = 0;
  bool terminated = false;  // hit an exact zero term (polynomial case)
};

/// True when b is a nonpositive integer, i.e. the series is a polynomial.
bool is_terminating(double b);

/// Throws PoleError when mu is a nonpositive integer and the series does not
/// terminate strictly before reaching the pole.
void check_pole(double b, double mu);

/// Raw compensated series for M(b, mu, z), any finite z. Throws PoleError or
/// PrecisionError (no settling, or cancellation |sum| < 1e-10 * sum|terms| in a
/// non-terminating series; polynomials are exempt).
SeriesInfo series(double b, double mu, double z);

/// M(b, mu, z) for 0 <= z <= p.z_max.
double m_eval(const KummerParams& p, double z);

/// (w, w', w'') with w' = (b/mu) M(b+1, mu+1, z) and
/// w'' = b(b+1)/(mu(mu+1)) M(b+2, mu+2, z).
Derivs m_derivatives(const KummerParams& p, double z);

/// z w'' + (mu - z) w' - b w.
double ode_residual(const KummerParams& p, double z);

/// Scale used by the ODE residual contract:
/// (1 + |w| + |w'| + |w''|) * (1 + z).
double ode_residual_scale(const KummerParams& p, double z);

/// e^{-z} M(b, mu, z) for any z >= 0.
double damped_eval(double b, double mu, double z, double z_max = kDefaultZMax);

/// g, g', g'' for g(z) = e^{-z} M(b, mu, z).
Derivs damped_derivatives(double b, double mu, double z, double z_max = kDefaultZMax);

}  // namespace sharpq::kummer
