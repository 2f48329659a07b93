#pragma once

#include <stdexcept>
#include <string>

namespace sharpq {

/// Base of every error raised by the library. The CLI maps these onto exit
/// codes, so each subclass corresponds to one failure category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// eps > mu^2/4: the inequality's hypothesis does not hold.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Kummer denominator parameter hits a pole of the series.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// A series lost too many digits to cancellation, or failed to settle.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value, or an argument outside the certified range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quadrature exhausted its refinement budget.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// An integral of a quadratic form failed to converge; the function is
/// presumably outside the weighted space.
class DivergenceSuspected : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// Extremiser branch does not match the sign of mu (or mu == 0).
class BranchError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration or options (CLI / sweep / minimiser inputs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sharpq
