#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sharpq {

/// Parameters of the half-line scheme: tanh-sinh on (0, split] and exp-sinh
/// on [split, inf), refined by halving the step until two consecutive levels
/// agree to max(rel_tol * |I|, abs_floor).
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_floor = 1e-15;
  double split = 1.0;
  int max_refinements = 12;
  // Nodes whose weighted contribution stays below this magnitude at the
  // coarsest level are trimmed from both ends of the node window.
  double tail_cut = 1e-18;
};

struct IntegralResult {
  double value = 0.0;
  double err_estimate = 0.0;
  int refinements_used = 0;
};

/// Throws ConfigError for a malformed spec.
void validate(const QuadratureSpec& spec);

/// Vector-valued integrand: writes `out.size()` values at x. All components
/// share the nodes so expensive function evaluations happen once.
using MultiIntegrand = std::function<void(double x, std::span<double> out)>;

/// int_0^inf h(x) dx for h ~ x^p (p > -1) at 0 and decaying at infinity.
/// Never evaluates h at x = 0. Throws NonConvergence or DomainError.
IntegralResult integrate_halfline(const std::function<double(double)>& h,
                                  const QuadratureSpec& spec = {});

/// Component-wise version; converged when every component is.
std::vector<IntegralResult> integrate_halfline(const MultiIntegrand& h, std::size_t n,
                                               const QuadratureSpec& spec = {});

/// int_a^b h(x) dx by tanh-sinh (endpoint singularities allowed).
IntegralResult integrate_interval(const std::function<double(double)>& h, double a, double b,
                                  const QuadratureSpec& spec = {});

/// Second node family for cross-checks: trapezoid rule in u = log x over a
/// fixed window, halving the step until consecutive levels agree.
IntegralResult integrate_halfline_log_trapezoid(const std::function<double(double)>& h,
                                                const QuadratureSpec& spec = {});

}  // namespace sharpq
