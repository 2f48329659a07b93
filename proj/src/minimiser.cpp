#include "sharpq/minimiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "sharpq/errors.hpp"

namespace sharpq {

namespace {

using Real = long double;

// c x^e as one term of (derivative) x^{p} e^{-a x} / e^{-a x}.
struct Term {
  Real e;
  Real c;
};
using Poly = std::vector<Term>;

// d/dx [P(x) e^{-a x}] = (P' - a P) e^{-a x}.
Poly differentiate(const Poly& p, Real a) {
  Poly out;
  for (const Term& t : p) {
    if (t.e != 0.0L) out.push_back({t.e - 1.0L, t.c * t.e});
    out.push_back({t.e, -a * t.c});
  }
  return out;
}

struct Element {
  Poly d0, d1, d2;
  Real rate;
};

// int_0^inf P(x) Q(x) x^w e^{-rate x} dx, one Gamma value per term pair.
Real pair_integral(const Poly& p, const Poly& q, Real w, Real rate) {
  Real acc = 0.0L;
  for (const Term& s : p) {
    for (const Term& t : q) {
      const Real c = s.c * t.c;
      if (c == 0.0L) continue;
      const Real q1 = s.e + t.e + w + 1.0L;
      if (!(q1 > 0.0L)) {
        std::ostringstream os;
        os << "Gram entry integrand behaves like x^" << static_cast<double>(q1 - 1.0L)
           << " at 0; trial function outside the weighted space";
        throw DivergenceSuspected(os.str());
      }
      acc += c * std::exp(std::lgamma(q1) - q1 * std::log(rate));
    }
  }
  return acc;
}

std::vector<Element> elements(const BasisModel& m) {
  std::vector<Element> out;
  for (int k = 0; k < m.K; ++k) {
    Element el;
    el.rate = m.rates[k];
    el.d0 = {{static_cast<Real>(m.powers[k]), 1.0L}};
    el.d1 = differentiate(el.d0, el.rate);
    el.d2 = differentiate(el.d1, el.rate);
    out.push_back(std::move(el));
  }
  return out;
}

Jet basis_jet(double p, double a, double x) {
  const double lx = std::log(x);
  const double v = std::exp(p * lx - a * x);
  if (p == 0.0) return {v, -a * v, a * a * v};
  // Powers folded into the exponent so nothing overflows near x = 0.
  const double v1 = std::exp((p - 1.0) * lx - a * x);
  const double v2 = std::exp((p - 2.0) * lx - a * x);
  return {v, p * v1 - a * v, p * (p - 1.0) * v2 - 2.0 * a * p * v1 + a * a * v};
}

double bilinear_weight(double vi, double vj, double x, double p) {
  return weighted(vi, x, 0.5 * p) * weighted(vj, x, 0.5 * p);
}

void assemble(BasisModel& m, const QuadratureSpec& spec, const BasisOptions& opts) {
  const std::vector<Element> el = elements(m);
  const int K = m.K;
  const Real mu = m.params.mu;
  const Real eps = m.params.eps;
  m.gram_A = GramMatrix::Zero(K, K);
  m.gram_B = GramMatrix::Zero(K, K);
  m.gram_D = GramMatrix::Zero(K, K);
  GramVector norm_diag = GramVector::Zero(K);

  // Exceptions must not escape an OpenMP region; the first one is rethrown.
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int i = 0; i < K; ++i) {
    try {
      for (int j = i; j < K; ++j) {
        const Element& a = el[i];
        const Element& b = el[j];
        const Real r = a.rate + b.rate;
        const Real A = pair_integral(a.d2, b.d2, mu + 1.0L, r);
        const Real Bx = pair_integral(a.d1, b.d1, mu + 1.0L, r);
        const Real B0 = pair_integral(a.d0, b.d0, mu - 1.0L, r);
        const Real D = pair_integral(a.d1, b.d1, mu, r);
        m.gram_A(i, j) = m.gram_A(j, i) = A;
        m.gram_B(i, j) = m.gram_B(j, i) = Bx - eps * B0;
        m.gram_D(i, j) = m.gram_D(j, i) = D;
        if (i == j) norm_diag(i) = A + Bx + pair_integral(a.d1, b.d1, mu - 1.0L, r) + B0;
      }
    } catch (...) {
#pragma omp critical(sharpq_gram_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  if (opts.cross_check) {
    std::vector<double> row_err(K, 0.0);
    const double mud = m.params.mu;
    const double epsd = m.params.eps;
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
    for (int i = 0; i < K; ++i) {
      try {
        const int n = K - i;
        const MultiIntegrand h = [&](double x, std::span<double> out) {
          const Jet ji = basis_jet(m.powers[i], m.rates[i], x);
          for (int j = i; j < K; ++j) {
            const Jet jj = basis_jet(m.powers[j], m.rates[j], x);
            const std::size_t o = 3 * static_cast<std::size_t>(j - i);
            out[o] = bilinear_weight(ji.d2f, jj.d2f, x, mud + 1.0);
            out[o + 1] = bilinear_weight(ji.df, jj.df, x, mud + 1.0) -
                         epsd * bilinear_weight(ji.f, jj.f, x, mud - 1.0);
            out[o + 2] = bilinear_weight(ji.df, jj.df, x, mud);
          }
        };
        // Entries are judged against sqrt(N_ii N_jj), so the absolute floor
        // may sit at that scale; tiny off-diagonal entries then stop forcing
        // refinement down to rounding level.
        QuadratureSpec row_spec = spec;
        row_spec.rel_tol = std::min(spec.rel_tol, 1e-12);
        double smallest = std::numeric_limits<double>::infinity();
        for (int j = i; j < K; ++j) {
          smallest = std::min(smallest, std::sqrt(static_cast<double>(norm_diag(i) * norm_diag(j))));
        }
        row_spec.abs_floor = std::max(row_spec.abs_floor, 1e-12 * smallest);
        const auto r = integrate_halfline(h, 3 * static_cast<std::size_t>(n), row_spec);
        double worst = 0.0;
        for (int j = i; j < K; ++j) {
          const double norm = std::sqrt(static_cast<double>(norm_diag(i) * norm_diag(j)));
          const std::size_t o = 3 * static_cast<std::size_t>(j - i);
          const double dA = std::abs(r[o].value - static_cast<double>(m.gram_A(i, j)));
          const double dB = std::abs(r[o + 1].value - static_cast<double>(m.gram_B(i, j)));
          const double dD = std::abs(r[o + 2].value - static_cast<double>(m.gram_D(i, j)));
          worst = std::max({worst, dA / norm, dB / norm, dD / norm});
        }
        row_err[i] = worst;
      } catch (...) {
#pragma omp critical(sharpq_gram_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) {
      try {
        std::rethrow_exception(failure);
      } catch (const NonConvergence& e) {
        throw DivergenceSuspected(std::string("Gram cross-check quadrature: ") + e.what());
      }
    }
    m.cross_check_error = *std::max_element(row_err.begin(), row_err.end());
    if (m.cross_check_error > 1e-9) {
      std::ostringstream os;
      os << "Gram closed form and quadrature disagree by " << m.cross_check_error
         << " (normalised); reduce K";
      throw PrecisionError(os.str());
    }
  }

  GramVector s = m.gram_D.diagonal().cwiseSqrt().cwiseInverse();
  const GramMatrix Dn = s.asDiagonal() * m.gram_D * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<GramMatrix> es(Dn, Eigen::EigenvaluesOnly);
  const Real lo = es.eigenvalues().minCoeff();
  const Real hi = es.eigenvalues().maxCoeff();
  m.condition_D = lo > 0.0L ? static_cast<double>(hi / lo) : std::numeric_limits<double>::infinity();
}

BasisModel make_model(const ProblemParams& params, int K, double scale, const BasisOptions& opts) {
  check_admissible(params);
  BasisModel m;
  m.branch = branch_for(params.mu);
  if (K < 1 || K > kMaxBasisSize) {
    std::ostringstream os;
    os << "basis size K = " << K << " outside [1, " << kMaxBasisSize << "]";
    throw ConfigError(os.str());
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("basis scale must be positive");
  if (opts.family == BasisFamily::kMultiRate && !(opts.ratio > 0.0 && opts.ratio < 1.0)) {
    throw ConfigError("multi-rate ratio must lie in (0, 1)");
  }
  m.K = K;
  m.scale = scale;
  m.family = opts.family;
  m.params = params;
  const double p = params.mu > 0.0 ? 0.0 : 1.0 - params.mu;
  for (int k = 0; k < K; ++k) {
    if (opts.family == BasisFamily::kMultiRate) {
      m.powers.push_back(p);
      m.rates.push_back(scale * std::pow(opts.ratio, k));
    } else {
      m.powers.push_back(p + k);
      m.rates.push_back(scale);
    }
  }
  return m;
}

// Problem in coordinates y = L^T S^{-1} c where S D S = L L^T, so that the
// constraint c^T D c = 1 becomes |y| = 1.
struct Whitened {
  GramMatrix A, B;
  GramMatrix back;  // c = back * y
};

Whitened whiten(const BasisModel& m) {
  const GramVector s = m.gram_D.diagonal().cwiseSqrt().cwiseInverse();
  const GramMatrix Dn = s.asDiagonal() * m.gram_D * s.asDiagonal();
  Eigen::LLT<GramMatrix> llt(Dn);
  if (llt.info() != Eigen::Success) {
    throw DegenerateDenominator("D Gram matrix is not positive definite; reduce K");
  }
  const GramMatrix L = llt.matrixL();
  const auto tri = L.triangularView<Eigen::Lower>();
  const auto transform = [&](const GramMatrix& M) {
    GramMatrix X = tri.solve(GramMatrix(s.asDiagonal() * M * s.asDiagonal()));
    GramMatrix Y = tri.solve(GramMatrix(X.transpose()));
    return GramMatrix(0.5L * (Y + Y.transpose()));
  };
  Whitened w;
  w.A = transform(m.gram_A);
  w.B = transform(m.gram_B);
  const GramMatrix Linv_t =
      L.transpose().triangularView<Eigen::Upper>().solve(GramMatrix::Identity(m.K, m.K));
  w.back = s.asDiagonal() * Linv_t;
  return w;
}

struct Eval {
  Real value;
  GramVector grad;  // tangent to the unit sphere at |y| = 1
};

Eval evaluate(const Whitened& w, const GramVector& y) {
  const GramVector Ay = w.A * y;
  const GramVector By = w.B * y;
  const Real a = y.dot(Ay);
  const Real b = y.dot(By);
  const Real n = y.squaredNorm();
  Eval e;
  e.value = a * b / (n * n);
  e.grad = (2.0L * b / (n * n)) * Ay + (2.0L * a / (n * n)) * By - (4.0L * a * b / (n * n * n)) * y;
  return e;
}

Real pencil_min(const Whitened& w, Real u, GramVector* vec) {
  const Real t = std::exp(u);
  const GramMatrix P = t * w.A + w.B / t;
  Eigen::SelfAdjointEigenSolver<GramMatrix> es(
      P, vec ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (vec) *vec = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

Real golden_min(const Whitened& w, Real a, Real b, Real* where) {
  const Real g = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  Real c = b - g * (b - a), d = a + g * (b - a);
  Real fc = pencil_min(w, c, nullptr), fd = pencil_min(w, d, nullptr);
  while (b - a > 1e-12L) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = pencil_min(w, c, nullptr);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = pencil_min(w, d, nullptr);
    }
  }
  *where = 0.5L * (a + b);
  return std::min(fc, fd);
}

GramVector spectral_start(const Whitened& w) {
  // min_c sqrt(ab)/d equals 1/2 min_u lambda_min(e^u A + e^{-u} B), so the
  // eigenvector at the best u is the discrete minimiser. The envelope has a
  // row of narrow dips; scan finely and refine the lowest few.
  constexpr Real kLo = -40.0L, kHi = 40.0L, kStep = 0.05L;
  constexpr std::size_t kRefined = 8;
  const int n = static_cast<int>(std::lround((kHi - kLo) / kStep));
  std::vector<Real> h(n + 1);
  for (int i = 0; i <= n; ++i) h[i] = pencil_min(w, kLo + kStep * i, nullptr);
  std::vector<int> dips;
  for (int i = 0; i <= n; ++i) {
    const bool left = i == 0 || h[i] <= h[i - 1];
    const bool right = i == n || h[i] <= h[i + 1];
    if (left && right) dips.push_back(i);
  }
  std::sort(dips.begin(), dips.end(), [&](int x, int y) { return h[x] < h[y] || (h[x] == h[y] && x < y); });
  if (dips.size() > kRefined) dips.resize(kRefined);
  Real best = std::numeric_limits<Real>::infinity(), best_u = kLo;
  for (int i : dips) {
    Real u = 0.0L;
    const Real v = golden_min(w, kLo + kStep * (i - 1), kLo + kStep * (i + 1), &u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  GramVector y;
  pencil_min(w, best_u, &y);
  return y.normalized();
}

struct RestartOutcome {
  Real value = std::numeric_limits<Real>::infinity();
  GramVector y;
  Real grad_norm = std::numeric_limits<Real>::infinity();
  bool converged = false;
};

RestartOutcome descend(const Whitened& w, GramVector y, const MinimiseOptions& opts) {
  y.normalize();
  Eval e = evaluate(w, y);
  RestartOutcome out;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Real gn2 = e.grad.squaredNorm();
    if (std::sqrt(gn2) <= opts.grad_tol) break;
    Real t = 1.0L;
    bool moved = false;
    while (t > 1e-30L) {
      GramVector trial = (y - t * e.grad).normalized();
      Eval et = evaluate(w, trial);
      if (et.value <= e.value - 1e-4L * t * gn2) {
        y = std::move(trial);
        e = std::move(et);
        moved = true;
        break;
      }
      t *= 0.5L;
    }
    if (!moved) break;
  }
  out.value = e.value;
  out.y = y;
  out.grad_norm = e.grad.norm();
  out.converged = out.grad_norm <= opts.grad_tol;
  return out;
}

GramVector random_direction(int K, std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  GramVector y(K);
  for (int k = 0; k < K; ++k) y(k) = normal(rng);
  return y;
}

}  // namespace

const char* to_string(BasisFamily f) {
  return f == BasisFamily::kMultiRate ? "multirate" : "monomial";
}

BasisModel build_basis(const ProblemParams& params, int K, double scale,
                       const QuadratureSpec& spec, const BasisOptions& opts) {
  validate(spec);
  BasisModel m = make_model(params, K, scale, opts);
  assemble(m, spec, opts);
  return m;
}

BasisModel build_basis_serial(const ProblemParams& params, int K, double scale,
                              const QuadratureSpec& spec, BasisOptions opts) {
  opts.parallel = false;
  return build_basis(params, K, scale, spec, opts);
}

FunctionTriple basis_function(const BasisModel& model, int k) {
  if (k < 0 || k >= model.K) throw ConfigError("basis index out of range");
  const double p = model.powers[k];
  const double a = model.rates[k];
  std::ostringstream os;
  os << "x^" << p << " e^{-" << a << " x}";
  return {[p, a](double x) { return basis_jet(p, a, x); }, os.str()};
}

FunctionTriple combination(const BasisModel& model, const std::vector<double>& c) {
  if (static_cast<int>(c.size()) != model.K) throw ConfigError("coefficient count differs from K");
  return {[powers = model.powers, rates = model.rates, c](double x) {
            Jet s;
            for (std::size_t k = 0; k < c.size(); ++k) {
              if (c[k] == 0.0) continue;
              const Jet j = basis_jet(powers[k], rates[k], x);
              s.f += c[k] * j.f;
              s.df += c[k] * j.df;
              s.d2f += c[k] * j.d2f;
            }
            return s;
          },
          "trial combination"};
}

QuotientGradient quotient_and_gradient(const BasisModel& model, const GramVector& c) {
  const GramVector Ac = model.gram_A * c;
  const GramVector Bc = model.gram_B * c;
  const GramVector Dc = model.gram_D * c;
  const Real a = c.dot(Ac);
  const Real b = c.dot(Bc);
  const Real d = c.dot(Dc);
  if (!(d > 0.0L)) throw DegenerateDenominator("c^T D c must be positive");
  QuotientGradient q;
  q.value = a * b / (d * d);
  q.gradient = (2.0L * b / (d * d)) * Ac + (2.0L * a / (d * d)) * Bc - (4.0L * a * b / (d * d * d)) * Dc;
  return q;
}

MinimisationResult minimise_quotient(const BasisModel& model, const MinimiseOptions& opts) {
  if (opts.restarts < 1) throw ConfigError("at least one restart is required");
  if (opts.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(opts.grad_tol > 0.0)) throw ConfigError("grad_tol must be > 0");
  const Whitened w = whiten(model);
  const int K = model.K;
  std::vector<RestartOutcome> outcomes(opts.restarts);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int r = 0; r < opts.restarts; ++r) {
    try {
      const GramVector start = r == 0 ? spectral_start(w) : random_direction(K, opts.seed, r);
      outcomes[r] = descend(w, start, opts);
    } catch (...) {
#pragma omp critical(sharpq_restart_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  int best = 0;
  for (int r = 1; r < opts.restarts; ++r) {
    if (outcomes[r].value < outcomes[best].value) best = r;
  }
  const RestartOutcome& o = outcomes[best];
  MinimisationResult res;
  res.value = static_cast<double>(o.value);
  const GramVector c = w.back * o.y;
  res.coefficients.resize(K);
  for (int k = 0; k < K; ++k) res.coefficients[k] = static_cast<double>(c(k));
  res.restarts_used = opts.restarts;
  res.converged = o.converged;
  res.grad_norm = static_cast<double>(o.grad_norm);
  res.best_restart = best;
  return res;
}

std::vector<ConvergenceRow> convergence_sweep(const ProblemParams& params,
                                              const std::vector<int>& K_list, double scale,
                                              const QuadratureSpec& spec,
                                              const MinimiseOptions& opts,
                                              const BasisOptions& basis) {
  std::vector<ConvergenceRow> rows;
  for (int K : K_list) {
    const BasisModel m = build_basis(params, K, scale, spec, basis);
    const MinimisationResult r = minimise_quotient(m, opts);
    rows.push_back({K, r.value, m.condition_D, r.converged});
  }
  return rows;
}

}  // namespace sharpq
