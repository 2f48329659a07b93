#include "sharpq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sharpq/compensated.hpp"
#include "sharpq/errors.hpp"

namespace sharpq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMinLevel = 3;

// Variable transformation x = x(t) with Jacobian w(t) = dx/dt, sampled on
// t = j * h for j in [j_lo, j_hi] at the finest level.
struct Node {
  double x;
  double w;
};

enum class MapKind { kTanhSinhLeft, kExpSinh, kTanhSinhInterval, kLog };

struct Segment {
  MapKind kind;
  double a;  // left end (interval / exp-sinh offset)
  double b;  // right end (tanh-sinh)
  double t_lo;
  double t_hi;
  double h0;

  Node map(double t) const {
    switch (kind) {
      case MapKind::kTanhSinhLeft: {
        // x = b / (1 + e^{-pi sinh t}); accurate as x -> 0.
        const double e = std::exp(-kPi * std::sinh(t));
        const double x = b / (1.0 + e);
        const double w = b * kPi * std::cosh(t) / (e + 2.0 + 1.0 / e);
        return {x, w};
      }
      case MapKind::kTanhSinhInterval: {
        const double e = std::exp(-kPi * std::sinh(t));
        const double len = b - a;
        const double x = t <= 0.0 ? a + len / (1.0 + e) : b - len * e / (1.0 + e);
        const double w = len * kPi * std::cosh(t) / (e + 2.0 + 1.0 / e);
        return {x, w};
      }
      case MapKind::kExpSinh: {
        const double e = std::exp(0.5 * kPi * std::sinh(t));
        return {a + e, 0.5 * kPi * std::cosh(t) * e};
      }
      case MapKind::kLog: {
        const double e = std::exp(t);
        return {e, e};
      }
    }
    return {0.0, 0.0};
  }
};

// Windows: the tanh-sinh side reaches x ~ 1e-200 * split, the exp-sinh side
// x ~ 1e60. Both are far enough that any integrand the callers form (x^p,
// p > -1, at 0; at least x^{-1-s}, s >= 1/2, at infinity) is negligible
// beyond them; the edge test below catches the ones that are not.
double tanh_sinh_t_max() { return std::asinh(200.0 * std::log(10.0) / kPi); }
double exp_sinh_t_lo() { return -std::asinh(30.0 * std::log(10.0) / (0.5 * kPi)); }
double exp_sinh_t_hi() { return std::asinh(60.0 * std::log(10.0) / (0.5 * kPi)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class Engine {
 public:
  Engine(const MultiIntegrand& h, std::size_t n, std::vector<Segment> segments,
         const QuadratureSpec& spec)
      : h_(h), n_(n), segments_(std::move(segments)), spec_(spec), buf_(n) {}

  std::vector<IntegralResult> run() {
    const std::size_t ns = segments_.size();
    // Per segment, per component compensated sums of w * h at all nodes so far.
    std::vector<std::vector<NeumaierSum<double>>> sums(ns, std::vector<NeumaierSum<double>>(n_));
    std::vector<long> j_lo(ns), j_hi(ns);

    // Level 0 over the full window, then trim.
    for (std::size_t s = 0; s < ns; ++s) {
      const Segment& seg = segments_[s];
      const long lo = static_cast<long>(std::ceil(seg.t_lo / seg.h0));
      const long hi = static_cast<long>(std::floor(seg.t_hi / seg.h0));
      std::vector<double> peak(hi - lo + 1, 0.0);
      std::vector<std::vector<double>> contrib(hi - lo + 1, std::vector<double>(n_, 0.0));
      for (long j = lo; j <= hi; ++j) {
        if (!eval(seg, j * seg.h0, contrib[j - lo])) continue;
        for (double c : contrib[j - lo]) peak[j - lo] = std::max(peak[j - lo], std::abs(c));
      }
      long first = hi + 1;
      long last = lo - 1;
      for (long j = lo; j <= hi; ++j) {
        if (peak[j - lo] > spec_.tail_cut) {
          first = std::min(first, j);
          last = std::max(last, j);
        }
      }
      if (first > last) {  // negligible everywhere
        j_lo[s] = 0;
        j_hi[s] = -1;
        continue;
      }
      j_lo[s] = std::max(lo, first - 1);
      j_hi[s] = std::min(hi, last + 1);
      for (long j = j_lo[s]; j <= j_hi[s]; ++j) {
        for (std::size_t k = 0; k < n_; ++k) sums[s][k].add(contrib[j - lo][k]);
      }
      edge_.push_back({s, peak[j_lo[s] - lo], j_lo[s] == lo});
      edge_.push_back({s, peak[j_hi[s] - lo], j_hi[s] == hi});
    }

    std::vector<double> prev = totals(sums, 0);
    check_edges(prev);
    std::vector<double> err(n_, 0.0);
    for (int level = 1; level <= spec_.max_refinements; ++level) {
      for (std::size_t s = 0; s < ns; ++s) {
        if (j_lo[s] > j_hi[s]) continue;
        const Segment& seg = segments_[s];
        const long scale = 1L << level;
        const double h = seg.h0 / static_cast<double>(scale);
        // New nodes are the odd multiples of h inside the trimmed window.
        const long lo = j_lo[s] * scale;
        const long hi = j_hi[s] * scale;
        std::vector<double> c(n_);
        for (long j = lo + 1; j < hi; j += 2) {
          if (!eval(seg, j * h, c)) continue;
          for (std::size_t k = 0; k < n_; ++k) sums[s][k].add(c[k]);
        }
      }
      std::vector<double> cur = totals(sums, level);
      bool converged = level >= kMinLevel;
      for (std::size_t k = 0; k < n_; ++k) {
        err[k] = std::abs(cur[k] - prev[k]);
        if (err[k] > tolerance(cur[k])) converged = false;
      }
      prev = std::move(cur);
      if (converged) {
        std::vector<IntegralResult> out(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = {prev[k], err[k], level};
        return out;
      }
    }
    std::ostringstream os;
    os << "quadrature did not converge after " << spec_.max_refinements << " refinements";
    for (std::size_t k = 0; k < n_; ++k) {
      os << (k == 0 ? " (" : ", ") << "I=" << fmt(prev[k]) << " err=" << fmt(err[k]);
    }
    os << ")";
    throw NonConvergence(os.str());
  }

 private:
  struct Edge {
    std::size_t segment;
    double peak;
    bool at_window_limit;
  };

  double tolerance(double value) const {
    return std::max(spec_.rel_tol * std::abs(value), spec_.abs_floor);
  }

  // Writes w(t) * h(x(t)) into out; false when the node degenerates
  // (x == 0 or zero weight from under/overflow of the map).
  bool eval(const Segment& seg, double t, std::vector<double>& out) {
    const Node node = seg.map(t);
    std::fill(out.begin(), out.end(), 0.0);
    // Half-line maps must never hand x = 0 to the integrand; interval nodes
    // may be anywhere in [a, b].
    const bool positive_x = seg.kind != MapKind::kTanhSinhInterval;
    if ((positive_x && !(node.x > 0.0)) || !(node.w > 0.0) || !std::isfinite(node.x) ||
        !std::isfinite(node.w)) {
      return false;
    }
    h_(node.x, buf_);
    for (std::size_t k = 0; k < n_; ++k) {
      if (!std::isfinite(buf_[k])) {
        throw DomainError("integrand is not finite at x = " + fmt(node.x));
      }
      out[k] = node.w * buf_[k];
    }
    return true;
  }

  std::vector<double> totals(const std::vector<std::vector<NeumaierSum<double>>>& sums,
                             int level) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      const double h = segments_[s].h0 / static_cast<double>(1L << level);
      for (std::size_t k = 0; k < n_; ++k) out[k] += h * sums[s][k].value();
    }
    return out;
  }

  // An integrand still significant where the window ends is either
  // divergent or decays too slowly for the fixed window; both are failures.
  void check_edges(const std::vector<double>& level0) const {
    double scale = 0.0;
    for (double v : level0) scale = std::max(scale, tolerance(v));
    for (const Edge& e : edge_) {
      if (e.at_window_limit && e.peak > 0.1 * scale && e.peak > spec_.tail_cut) {
        throw NonConvergence("integrand not negligible at the end of the node window (|w h| = " +
                             fmt(e.peak) + ")");
      }
    }
  }

  const MultiIntegrand& h_;
  std::size_t n_;
  std::vector<Segment> segments_;
  QuadratureSpec spec_;
  std::vector<double> buf_;
  std::vector<Edge> edge_;
};

std::vector<Segment> halfline_segments(const QuadratureSpec& spec) {
  const double tm = tanh_sinh_t_max();
  return {
      Segment{MapKind::kTanhSinhLeft, 0.0, spec.split, -tm, tm, 0.5},
      Segment{MapKind::kExpSinh, spec.split, 0.0, exp_sinh_t_lo(), exp_sinh_t_hi(), 0.5},
  };
}

MultiIntegrand wrap_scalar(const std::function<double(double)>& h) {
  return [&h](double x, std::span<double> out) { out[0] = h(x); };
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (!(spec.rel_tol > 0.0)) throw ConfigError("quadrature rel_tol must be > 0");
  if (!(spec.abs_floor >= 0.0)) throw ConfigError("quadrature abs_floor must be >= 0");
  if (!(spec.split > 0.0) || !std::isfinite(spec.split)) {
    throw ConfigError("quadrature split must be a finite positive number");
  }
  if (spec.max_refinements < 1 || spec.max_refinements > 24) {
    throw ConfigError("quadrature max_refinements must lie in [1, 24]");
  }
  if (!(spec.tail_cut >= 0.0)) throw ConfigError("quadrature tail_cut must be >= 0");
}

std::vector<IntegralResult> integrate_halfline(const MultiIntegrand& h, std::size_t n,
                                               const QuadratureSpec& spec) {
  validate(spec);
  return Engine(h, n, halfline_segments(spec), spec).run();
}

IntegralResult integrate_halfline(const std::function<double(double)>& h,
                                  const QuadratureSpec& spec) {
  const MultiIntegrand m = wrap_scalar(h);
  return integrate_halfline(m, 1, spec).front();
}

IntegralResult integrate_interval(const std::function<double(double)>& h, double a, double b,
                                  const QuadratureSpec& spec) {
  validate(spec);
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate_interval needs finite a < b");
  }
  const double tm = std::asinh(40.0 * std::log(10.0) / kPi);
  const MultiIntegrand m = wrap_scalar(h);
  return Engine(m, 1, {Segment{MapKind::kTanhSinhInterval, a, b, -tm, tm, 0.5}}, spec)
      .run()
      .front();
}

IntegralResult integrate_halfline_log_trapezoid(const std::function<double(double)>& h,
                                                const QuadratureSpec& spec) {
  validate(spec);
  const double lo = -200.0 * std::log(10.0) + std::log(spec.split);
  const double hi = 60.0 * std::log(10.0);
  const MultiIntegrand m = wrap_scalar(h);
  return Engine(m, 1, {Segment{MapKind::kLog, 0.0, 0.0, lo, hi, 1.0}}, spec).run().front();
}

}  // namespace sharpq
