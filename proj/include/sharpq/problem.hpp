#pragma once

namespace sharpq {

/// Weight exponent and zeroth-order coefficient of the quotient
///   (int f''^2 x^{mu+1}) (int (x^2 f'^2 - eps f^2) x^{mu-1}) / (int f'^2 x^mu)^2.
struct ProblemParams {
  double mu = 0.0;
  double eps = 0.0;
};

/// Quantities derived from (mu, eps). b_minus/b_plus are the two roots of
/// b^2 - mu b + eps = 0 and s their distance.
struct DerivedParams {
  double s = 0.0;
  double b_minus = 0.0;
  double b_plus = 0.0;
  double sharp_const = 0.25;  // (s + 1)^2 / 4
};

/// Boundary tolerance: |eps - mu^2/4| <= kBoundaryRelTol * max(1, mu^2)
/// is treated as s == 0 exactly.
inline constexpr double kBoundaryRelTol = 1e-12;

/// Throws AdmissibilityError when eps exceeds mu^2/4 beyond the boundary
/// tolerance.
void check_admissible(const ProblemParams& params);

/// True when eps sits on the boundary mu^2/4 (within kBoundaryRelTol).
bool on_boundary(const ProblemParams& params);

/// Roots are formed without subtractive cancellation: the larger-magnitude
/// root directly, the other through b_minus * b_plus = eps.
DerivedParams derive(const ProblemParams& params);

/// (s + 1)^2 / 4.
double sharp_constant(const ProblemParams& params);

}  // namespace sharpq
