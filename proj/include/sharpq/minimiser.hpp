#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sharpq/extremiser.hpp"
#include "sharpq/problem.hpp"
#include "sharpq/quadrature.hpp"

namespace sharpq {

using GramMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using GramVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Trial families; every member is x^{p_k} e^{-a_k x} with p_k = p + shift,
/// p = 0 for mu > 0 and p = 1 - mu for mu < 0.
///   kMultiRate: shift 0, a_k = scale * ratio^k
///   kMonomial:  shift k, a_k = scale
enum class BasisFamily { kMultiRate, kMonomial };

const char* to_string(BasisFamily f);

inline constexpr int kMaxBasisSize = 24;

struct BasisOptions {
  BasisFamily family = BasisFamily::kMultiRate;
  double ratio = 0.5;
  bool cross_check = true;  // recompute every entry by quadrature
  bool parallel = true;
};

struct BasisModel {
  int K = 0;
  Branch branch = Branch::kMuPositive;
  double scale = 1.0;
  BasisFamily family = BasisFamily::kMultiRate;
  ProblemParams params;
  std::vector<double> powers;
  std::vector<double> rates;
  GramMatrix gram_A, gram_B, gram_D;
  // Spectral condition number of D after unit-diagonal scaling.
  double condition_D = 0.0;
  // Largest |closed form - quadrature| / sqrt(N_ii N_jj) over all entries and
  // forms, N being the primed-norm Gram diagonal; 0 when not checked.
  double cross_check_error = 0.0;
};

/// Throws BranchError for mu == 0, ConfigError for K outside [1, 24] or a bad
/// scale/ratio, DivergenceSuspected if an entry is not a convergent
/// integral, and PrecisionError when the cross-check exceeds 1e-9.
BasisModel build_basis(const ProblemParams& params, int K, double scale,
                       const QuadratureSpec& spec = {}, const BasisOptions& opts = {});

/// Same matrices assembled on one thread; reference for the parallel path.
BasisModel build_basis_serial(const ProblemParams& params, int K, double scale,
                              const QuadratureSpec& spec = {}, BasisOptions opts = {});

/// The k-th trial function.
FunctionTriple basis_function(const BasisModel& model, int k);

/// sum_k c_k phi_k.
FunctionTriple combination(const BasisModel& model, const std::vector<double>& c);

struct MinimiseOptions {
  int restarts = 8;
  int max_iters = 2000;
  double grad_tol = 1e-7;
  std::uint64_t seed = 42;
  bool parallel = true;
};

struct MinimisationResult {
  double value = 0.0;
  std::vector<double> coefficients;  // normalised so that c^T D c = 1
  int restarts_used = 0;
  bool converged = false;
  double grad_norm = 0.0;  // tangent gradient at the returned point
  int best_restart = -1;
};

/// F(c) = (c^T A c)(c^T B c) / (c^T D c)^2 and its Euclidean gradient.
struct QuotientGradient {
  long double value = 0.0L;
  GramVector gradient;
};
QuotientGradient quotient_and_gradient(const BasisModel& model, const GramVector& c);

/// Restart 0 starts at the minimiser of the pencil bound
///   min_c sqrt(ab)/d = 1/2 min_tau lambda_min(tau A + B / tau ; D),
/// the rest at seeded Gaussian directions. Each restart runs projected
/// gradient descent on c^T D c = 1 (whitened by a Cholesky factor of D) with
/// Armijo backtracking halving from step 1. Throws DegenerateDenominator if
/// D is not positive definite.
MinimisationResult minimise_quotient(const BasisModel& model, const MinimiseOptions& opts = {});

struct ConvergenceRow {
  int K = 0;
  double value = 0.0;
  double condition_D = 0.0;
  bool converged = false;
};
std::vector<ConvergenceRow> convergence_sweep(const ProblemParams& params,
                                              const std::vector<int>& K_list, double scale,
                                              const QuadratureSpec& spec = {},
                                              const MinimiseOptions& opts = {},
                                              const BasisOptions& basis = {});

}  // namespace sharpq
