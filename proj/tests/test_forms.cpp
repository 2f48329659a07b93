#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sharpq/errors.hpp"
#include "sharpq/forms.hpp"
#include "sharpq/test_functions.hpp"

using namespace sharpq;
namespace fn = sharpq::functions;

namespace {

const FunctionTriple kExp = fn::exp_poly({1.0});

}  // namespace

TEST_CASE("form values of e^{-x}") {
  FormValues v = form_values(kExp, {2.0, 0.0});
  CHECK(v.A == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(v.B == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(v.D == doctest::Approx(0.25).epsilon(1e-12));
  v = form_values(kExp, {3.0, 2.0});
  CHECK(v.A == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(v.B == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v.D == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("constants leave the space") {
  CHECK_THROWS_AS(form_values(fn::constant(2.0), {2.0, 0.0}), DivergenceSuspected);
  CHECK_THROWS_AS(form_values(fn::constant(1.0), {2.0, 0.5}), DivergenceSuspected);
}

TEST_CASE("primed norm") {
  // 3/8 + 3/8 + 1/4 + 1/4
  CHECK(norm_prime_sq(kExp, {2.0, 0.0}) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(norm_prime_sq(fn::constant(0.0), {2.0, 0.0}) == 0.0);
}

TEST_CASE("residual integral") {
  const ProblemParams p2{2.0, 0.0};
  CHECK(residual_lhs(kExp, p2, {0.0, 0.0, 0.0}).value == doctest::Approx(0.375).epsilon(1e-12));
  // x f'' + x f' + 2 f' + 2 f vanishes identically for e^{-x}.
  CHECK(std::abs(residual_lhs(kExp, p2, {1.0, 2.0, 2.0}).value) <= 1e-15);
  CHECK(residual_lhs(kExp, {3.0, 2.0}, {1.0, 3.0, 2.0}).value ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("g(alpha)") {
  GAlpha g = g_alpha(kExp, {2.0, 0.0}, 1.0, 0.0);
  CHECK(std::abs(g.value) <= 1e-14);
  CHECK(g.canonical);
  g = g_alpha(kExp, {3.0, 2.0}, 1.0, 1.0);
  CHECK(g.value == doctest::Approx(0.25).epsilon(1e-12));
  const FormValues v = form_values(fn::exp_poly({1.0, -0.5, 0.25}, 1.5), {2.5, 1.0});
  CHECK(g_alpha(v, {2.5, 1.0}, 0.0, 0.3).value == v.A);
  CHECK_FALSE(g_alpha(v, {2.5, 1.0}, 1.0, 0.3).canonical);
}

TEST_CASE("identity gap on worked cases") {
  CHECK(std::abs(identity_gap(kExp, {2.0, 0.0}, 1.0, 0.0).gap) <= 1e-10);
  const IdentityCheck c = identity_gap(kExp, {3.0, 2.0}, 1.0, 1.0);
  CHECK(c.lhs == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.rhs == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(identity_gap(fn::exp_poly({1.0, 1.0}), {2.0, 0.0}, 2.0, 0.0).gap) <= 1e-10);
}

TEST_CASE("identity gap for a non-root b equals the missing f^2 term") {
  // With b not a root the leftover is alpha^2 (eps - b (mu - b)) int f^2 x^{mu-1}.
  const ProblemParams p{3.0, 2.0};
  const oracle::ExpPoly e({1.0, 0.5}, 1.0);
  const oracle::Forms o = oracle::forms(e, p.mu, p.eps);
  const double alpha = 1.5, b = 0.4;
  const IdentityCheck c = identity_gap(fn::exp_poly({1.0, 0.5}), p, alpha, b);
  CHECK_FALSE(c.canonical);
  const double expected = alpha * alpha * (p.eps - b * (p.mu - b)) * o.I0;
  CHECK(oracle::rel(c.gap, expected) <= 1e-9);
}

TEST_CASE("quotient") {
  CHECK(quotient(kExp, {2.0, 0.0}) == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(quotient(kExp, {3.0, 2.0}) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(quotient(fn::scaled(kExp, 2.0), {2.0, 0.0}) == doctest::Approx(2.25).epsilon(1e-12));
  FormValues degenerate{1.0, 1.0, 0.0, 1.0, 0.0};
  CHECK_THROWS_AS(quotient(degenerate), DegenerateDenominator);
}

TEST_CASE("limit probe") {
  const double xs[] = {20.0, 1e-6};
  const auto s = limit_probe(kExp, {2.0, 0.0}, xs);
  CHECK(oracle::rel(s[0].G1, std::exp(-40.0) * 8000.0) <= 1e-12);
  CHECK(oracle::rel(s[1].G2, std::exp(-2e-6) * 1e-12) <= 1e-12);
  for (const LimitSample& z : limit_probe(fn::constant(0.0), {2.0, 0.0}, xs)) {
    CHECK(z.G1 == 0.0);
    CHECK(z.G2 == 0.0);
    CHECK(z.G3 == 0.0);
  }
}

TEST_CASE("built-in triples are internally consistent") {
  std::vector<double> xs;
  for (int k = -4; k <= 8; ++k) xs.push_back(std::pow(2.0, k));
  CHECK(consistency_error(fn::exp_poly({1.0, -2.0, 0.5, 0.1}, 0.8, 2), xs) <= 1e-6);
  CHECK(consistency_error(fn::primed_norm_witness(), xs) <= 1e-6);
  CHECK(consistency_error(fn::scaled(fn::exp_poly({0.0, 1.0}), 3.0), xs) <= 1e-6);
}

TEST_CASE("the primed norm admits a function outside the natural space") {
  const FunctionTriple w = fn::primed_norm_witness();
  const ProblemParams p{0.0, 0.0};
  // 3/8 + 1/8 + 1/4 + 1/4
  CHECK(oracle::rel(norm_prime_sq(w, p), 1.0) <= 1e-10);
  CHECK_THROWS_AS(form_values(w, p), DivergenceSuspected);
  std::vector<double> deltas;
  for (int k = 1; k <= 12; ++k) deltas.push_back(std::pow(10.0, -8.0 * k));
  const auto rows = norm_comparison(w, p, deltas);
  // int_delta^1 f'^2 / x gains log(10^8) per row; the primed part settles.
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].natural_only - rows[k - 1].natural_only ==
          doctest::Approx(8.0 * std::log(10.0)).epsilon(1e-6));
    CHECK(std::abs(rows[k].primed - rows[k - 1].primed) <= 1e-7);
  }
}

TEST_CASE("property: residual and ten-term expansion against Gamma oracles") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uc(-1.0, 1.0), umu(0.5, 6.0), ua(-3.0, 3.0), u01(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double mu = umu(rng);
    const double eps = -1.0 + u01(rng) * (0.25 * mu * mu + 1.0);
    const ProblemParams p{mu, eps};
    const int deg = static_cast<int>(u01(rng) * 7.0);
    oracle::Poly c(deg + 1);
    for (double& v : c) v = uc(rng);
    c[0] = 1.0;
    const double alpha = ua(rng), beta = ua(rng) * 2.0, gamma = ua(rng);
    const oracle::Forms o = oracle::forms(oracle::ExpPoly(c, 1.0), mu, eps);
    const FunctionTriple f = fn::exp_poly(c);
    const ResidualCoefficients k{alpha, beta, gamma};
    const double lhs = residual_lhs(f, p, k).value;
    const double ten = expanded_residual(f, p, k).value;
    const double ref = o.A + alpha * alpha * o.Ix + beta * beta * o.I1 + gamma * gamma * o.I0 +
                       2 * alpha * beta * o.D - alpha * (mu + 1) * o.D - beta * mu * o.I1 -
                       2 * gamma * o.D - 2 * gamma * mu * o.Ic - alpha * gamma * mu * o.I0 +
                       2 * beta * gamma * o.Ic;
    CAPTURE(mu);
    CAPTURE(trial);
    CHECK(std::abs(lhs - ten) <= 1e-8 * std::max({std::abs(lhs), std::abs(ten), 1e-12}));
    CHECK(std::abs(ten - ref) <= 1e-8 * std::max({std::abs(ref), 1.0}));
    const FormValues v = form_values(f, p);
    CHECK(oracle::rel(v.A, o.A) <= 1e-10);
    CHECK(std::abs(v.B - o.B) <= 1e-10 * std::max(o.Ix, 1.0));
    CHECK(oracle::rel(v.D, o.D) <= 1e-10);
  }
}

TEST_CASE("property: nonnegativity, Hardy and the discriminant bound") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uc(-1.0, 1.0), umu(0.5, 6.0), u01(0.0, 1.0), ua(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double mu = umu(rng);
    const ProblemParams p{mu, u01(rng) * 0.25 * mu * mu};
    const DerivedParams d = derive(p);
    oracle::Poly c = {1.0, uc(rng), uc(rng), uc(rng)};
    const FunctionTriple f = fn::exp_poly(c, 0.5 + u01(rng));
    const FormValues v = form_values(f, p);
    CHECK(v.B >= -v.err);
    for (double b : {d.b_minus, d.b_plus}) {
      const double alpha = ua(rng);
      const IntegralResult r = residual_lhs(f, p, {alpha, mu, (mu - b) * alpha});
      CHECK(r.value >= -r.err_estimate);
      CHECK(g_alpha(v, p, alpha, b).value >= -1e-10 * (v.A + alpha * alpha * v.B + 1.0));
      const double lin = mu + 1.0 - 2.0 * b;
      CHECK(4.0 * v.A * v.B >= lin * lin * v.D * v.D * (1.0 - 1e-10));
    }
  }
}

TEST_CASE("property: scale and amplitude invariance of the quotient") {
  const ProblemParams p{2.7, 1.1};
  const FunctionTriple f = fn::exp_poly({1.0, -0.4, 0.3}, 1.2);
  const double q = quotient(f, p);
  for (double c : {0.5, 2.0}) {
    CHECK(oracle::rel(quotient(fn::scaled(f, c), p), q) <= 1e-8);
    CHECK(oracle::rel(quotient(fn::amplified(f, c), p), q) <= 1e-12);
  }
}

TEST_CASE("exp_poly evaluates to zero past exponential underflow") {
  const FunctionTriple f = functions::exp_poly({1.0, 0.0, 0.3, -0.05}, 0.7, 4);
  const Jet j = f.eval(4e50);
  CHECK(j.f == 0.0);
  CHECK(j.df == 0.0);
  CHECK(j.d2f == 0.0);
}
