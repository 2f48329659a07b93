#include "sharpq/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sharpq/errors.hpp"

namespace sharpq {

namespace {

double boundary_band(double mu) { return kBoundaryRelTol * std::max(1.0, mu * mu); }

}  // namespace

bool on_boundary(const ProblemParams& params) {
  return std::abs(params.eps - 0.25 * params.mu * params.mu) <= boundary_band(params.mu);
}

void check_admissible(const ProblemParams& params) {
  if (!std::isfinite(params.mu) || !std::isfinite(params.eps)) {
    throw AdmissibilityError("mu and eps must be finite");
  }
  if (params.eps > 0.25 * params.mu * params.mu + boundary_band(params.mu)) {
    std::ostringstream os;
    os.precision(17);
    os << "eps = " << params.eps << " exceeds mu^2/4 = " << 0.25 * params.mu * params.mu;
    throw AdmissibilityError(os.str());
  }
}

DerivedParams derive(const ProblemParams& params) {
  check_admissible(params);
  const double mu = params.mu;
  const double eps = params.eps;

  DerivedParams d;
  if (on_boundary(params)) {
    d.s = 0.0;
    d.b_minus = d.b_plus = 0.5 * mu;
  } else {
    d.s = std::sqrt(std::max(0.0, mu * mu - 4.0 * eps));
    if (mu >= 0.0) {
      d.b_plus = 0.5 * (mu + d.s);
      d.b_minus = d.b_plus != 0.0 ? eps / d.b_plus : 0.0;
    } else {
      d.b_minus = 0.5 * (mu - d.s);
      d.b_plus = eps / d.b_minus;
    }
  }
  d.sharp_const = 0.25 * (d.s + 1.0) * (d.s + 1.0);
  return d;
}

double sharp_constant(const ProblemParams& params) { return derive(params).sharp_const; }

}  // namespace sharpq
