// One PASS/FAIL line per acceptance criterion. Exit status 0 iff the set of
// failing criteria equals the set named by --known-failure (empty by default).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sharpq/errors.hpp"
#include "sharpq/extremiser.hpp"
#include "sharpq/forms.hpp"
#include "sharpq/kummer.hpp"
#include "sharpq/minimiser.hpp"
#include "sharpq/problem.hpp"
#include "sharpq/test_functions.hpp"

using namespace sharpq;
namespace fn = sharpq::functions;

namespace {

// Tolerances pinned by the criteria.
constexpr double kAnchorRelTol = 1e-8;
constexpr double kAnchorSeconds = 1.0;
constexpr double kIdentityRel = 1e-8;
constexpr double kIdentityFloor = 1e-12;
constexpr double kIdentitySeconds = 30.0;
constexpr double kAttainRelTol = 1e-6;
constexpr double kAttainResidual = 1e-8;
constexpr double kLambdaRel = 1e-6;
constexpr double kMinimiserAbove = 1e-3;
constexpr double kMinimiserBelow = 1e-6;
constexpr double kMinimiserSeconds = 60.0;
constexpr double kRemarkCoeffTol = 1e-10;
constexpr double kKummerResidual = 1e-9;
constexpr double kTerminatingTol = 1e-14;
constexpr double kClosedFormTol = 1e-12;
constexpr double kDecayBound = 1e-8;
constexpr double kScaleRel = 1e-8;

double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::set<int> failed;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) failed.insert(id);
  std::printf("%s criterion %d: %s [%s; %.2f s]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// The grid of sharp-attainment cases.
std::vector<ProblemParams> attainment_grid() {
  std::vector<ProblemParams> out;
  for (double mu : {1.0, 2.0, 3.0, 5.0})
    for (double eps : {0.0, mu * mu / 8.0, mu * mu / 4.0 - 0.25}) out.push_back({mu, eps});
  for (double mu : {-1.0, -2.5})
    for (double eps : {0.0, mu * mu / 8.0}) out.push_back({mu, eps});
  return out;
}

struct RandomCase {
  ProblemParams params;
  FunctionTriple f;
  double alpha = 0.0;
  double b = 0.0;
};

// Polynomial-times-exponential functions; a factor x^2 for mu <= 0 keeps
// every boundary term at the origin zero.
std::vector<RandomCase> identity_cases() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u01(0.0, 1.0), uc(-1.0, 1.0), ua(-3.0, 3.0);
  std::vector<RandomCase> out;
  for (int k = 0; k < 200; ++k) {
    double mu;
    if (k % 10 == 8) {
      mu = -1.0;
    } else if (k % 10 == 9) {
      mu = 0.0;
    } else {
      mu = 0.5 + 5.5 * u01(rng);
    }
    const double eps = 0.25 * mu * mu - u01(rng) * (0.25 * mu * mu + 1.0);
    const int degree = static_cast<int>(u01(rng) * 5.0);
    std::vector<double> c(degree + 1);
    for (double& v : c) v = uc(rng);
    c[0] = 1.0;
    const double rate = 0.5 + 1.5 * u01(rng);
    const ProblemParams p{mu, eps};
    const DerivedParams d = derive(p);
    const double alpha = ua(rng);
    const double b = (k % 2 == 0) ? d.b_minus : d.b_plus;
    out.push_back({p, fn::exp_poly(c, rate, mu <= 0.0 ? 2 : 0), alpha, b});
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SHARPQ_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
      known.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--known-failure N]...\n", argv[0]);
      return 2;
    }
  }
  criterion(1, "closed-form anchor mu=2, eps=0, f=e^{-x}", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemParams p{2.0, 0.0};
    const FormValues v = form_values(fn::exp_poly({1.0}), p);
    const double q = quotient(v);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double worst = std::max({rel(v.A, 0.375), rel(v.B, 0.375), rel(v.D, 0.25),
                                   rel(q, 2.25), rel(sharp_constant(p), 2.25)});
    return Outcome{worst <= kAnchorRelTol && secs < kAnchorSeconds,
                   "A=" + fmt("%.17g", v.A) + " B=" + fmt("%.17g", v.B) + " D=" +
                       fmt("%.17g", v.D) + " Q=" + fmt("%.17g", q) + " max rel " +
                       fmt("%.2e", worst)};
  });

  criterion(2, "identity suite, 200 randomized cases", [] {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int bad = 0;
    for (const RandomCase& c : identity_cases()) {
      const IdentityCheck ic = identity_gap(c.f, c.params, c.alpha, c.b);
      const double scale = std::max({std::abs(ic.lhs), std::abs(ic.rhs), kIdentityFloor});
      const double r = std::abs(ic.gap) / scale;
      worst = std::max(worst, r);
      if (!(r <= kIdentityRel)) ++bad;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Outcome{bad == 0 && secs < kIdentitySeconds,
                   "max scaled gap " + fmt("%.2e", worst) + ", failures " + std::to_string(bad)};
  });

  criterion(3, "sharp attainment by the built extremisers", [] {
    const std::vector<double> xs = log_spaced(-6.0, 6.0, 50);
    double worst_q = 0.0, worst_res = 0.0, worst_l = 0.0;
    for (const ProblemParams& p : attainment_grid()) {
      const Extremiser e = build({branch_for(p.mu), 1.0, 1.0, p});
      const FormValues v = form_values(e.triple, p);
      worst_q = std::max(worst_q, rel(quotient(v), sharp_constant(p)));
      worst_l = std::max(worst_l, rel(lambda_of(v, p), 1.0));
      for (const PointResidual& r : euler_lagrange_residual(e.triple, p, 1.0, xs))
        worst_res = std::max(worst_res, r.scale > 0.0 ? std::abs(r.residual) / r.scale : 0.0);
    }
    return Outcome{worst_q <= kAttainRelTol && worst_res <= kAttainResidual &&
                       worst_l <= kLambdaRel,
                   "quotient rel " + fmt("%.2e", worst_q) + ", residual " +
                       fmt("%.2e", worst_res) + ", lambda rel " + fmt("%.2e", worst_l)};
  });

  criterion(4, "direct minimisation against the sharp constant", [] {
    struct Case {
      ProblemParams p;
      int K;
    };
    std::string detail;
    bool ok = true;
    for (const Case& c : {Case{{2.0, 0.0}, 8}, Case{{3.0, 2.0}, 16}}) {
      const auto t0 = std::chrono::steady_clock::now();
      const BasisModel m = build_basis(c.p, c.K, 1.0);
      MinimiseOptions o;
      o.restarts = 8;
      const MinimisationResult r = minimise_quotient(m, o);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double sc = sharp_constant(c.p);
      const double excess = (r.value - sc) / sc;
      ok = ok && excess <= kMinimiserAbove && r.value >= sc - kMinimiserBelow &&
           secs < kMinimiserSeconds;
      detail += (detail.empty() ? "" : ", ") + std::string("K=") + std::to_string(c.K) + " min " +
                fmt("%.10f", r.value) + " vs " + fmt("%.4g", sc) + " in " + fmt("%.2f", secs) +
                " s";
    }
    return Outcome{ok, detail};
  });

  criterion(5, "b_plus branch gives the weaker bound", [] {
    double worst_coeff = 0.0;
    bool bound = true, weaker = true;
    for (const ProblemParams& p : attainment_grid()) {
      const DerivedParams d = derive(p);
      std::vector<FunctionTriple> fs = {build({branch_for(p.mu), 1.0, 1.0, p}).triple};
      const int lead = p.mu <= 0.0 ? std::max(2, static_cast<int>(std::ceil(1.0 - p.mu))) : 0;
      fs.push_back(fn::exp_poly({1.0}, 1.0, lead));
      fs.push_back(fn::exp_poly({1.0, 1.0}, 1.0, lead));
      fs.push_back(fn::exp_poly({2.0, -1.0, 0.5}, 1.5, lead));
      fs.push_back(fn::exp_poly({1.0, 0.0, 0.3, -0.05}, 0.7, lead));
      for (const FunctionTriple& f : fs) {
        const FormValues v = form_values(f, p);
        const GAlpha g = g_alpha(v, p, 1.0, d.b_plus);
        worst_coeff = std::max(worst_coeff, std::abs(g.linear_coeff - (1.0 - d.s)));
        const double lhs = 0.25 * (1.0 - d.s) * (1.0 - d.s) * v.D * v.D;
        if (!(lhs <= v.A * v.B * (1.0 + 1e-12))) bound = false;
      }
      if (d.s > 0.0 && !((1.0 - d.s) * (1.0 - d.s) < (1.0 + d.s) * (1.0 + d.s))) weaker = false;
    }
    return Outcome{worst_coeff <= kRemarkCoeffTol && bound && weaker,
                   "max |coeff - (1 - s)| " + fmt("%.2e", worst_coeff) +
                       (bound ? ", bound holds" : ", bound violated") +
                       (weaker ? ", strictly weaker for s > 0" : ", not weaker")};
  });

  criterion(6, "Kummer function correctness", [] {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ub(0.05, 4.0), umu(0.2, 6.0);
    double worst = 0.0;
    for (int pair = 0; pair < 50; ++pair) {
      const kummer::KummerParams kp{ub(rng), umu(rng)};
      for (int k = 0; k < 100; ++k) {
        const double z = std::min(
            kp.z_max, std::pow(10.0, -3.0 + k * (std::log10(kp.z_max) + 3.0) / 99.0));
        worst = std::max(worst, std::abs(kummer::ode_residual(kp, z)) /
                                    kummer::ode_residual_scale(kp, z));
      }
    }
    double term = 0.0;
    for (int n = 1; n <= 6; ++n) {
      for (double mu : {0.5, 3.0}) {
        for (double z : {0.5, 2.0, 10.0}) {
          double s = 0.0, a = 0.0, t = 1.0;
          for (int k = 0; k <= n; ++k) {
            s += t;
            a += std::abs(t);
            t *= (-n + k) * z / ((mu + k) * (k + 1.0));
          }
          term = std::max(term, std::abs(kummer::m_eval({-double(n), mu}, z) - s) / a);
        }
      }
    }
    const double e = std::exp(1.0);
    const double closed = std::max(rel(kummer::m_eval({2.0, 2.0}, 1.0), e),
                                   rel(kummer::m_eval({1.0, 3.0}, 1.0), 2.0 * (e - 2.0)));
    return Outcome{worst <= kKummerResidual && term <= kTerminatingTol && closed <= kClosedFormTol,
                   "ODE residual " + fmt("%.2e", worst) + ", terminating " + fmt("%.2e", term) +
                       ", closed forms " + fmt("%.2e", closed)};
  });

  criterion(7, "decay of the boundary terms for every built extremiser", [] {
    std::vector<double> xs;
    for (int k = 1; k <= 6; ++k) xs.push_back(std::pow(10.0, -k));
    for (int k = 1; k <= 6; ++k) xs.push_back(std::pow(10.0, k));
    double worst = 0.0;
    bool monotone = true;
    std::string over;
    for (const ProblemParams& p : attainment_grid()) {
      const Extremiser e = build({branch_for(p.mu), 1.0, 1.0, p});
      const auto s = limit_probe(e.triple, p, xs);
      for (std::size_t end : {std::size_t{5}, std::size_t{11}}) {
        const double g = std::max({s[end].G1, s[end].G2, s[end].G3});
        worst = std::max(worst, g);
        if (g > kDecayBound) {
          over += (over.empty() ? "" : " ") + std::string("(") + fmt("%g", p.mu) + "," +
                  fmt("%g", p.eps) + (end == 5 ? ",0)" : ",inf)");
        }
        for (std::size_t k = end - 4; k <= end; ++k) {
          if (s[k].G1 > s[k - 1].G1 || s[k].G2 > s[k - 1].G2 || s[k].G3 > s[k - 1].G3)
            monotone = false;
        }
      }
    }
    return Outcome{worst <= kDecayBound && monotone,
                   "largest G at 1e-6 / 1e6 " + fmt("%.2e", worst) +
                       (monotone ? ", monotone" : ", not monotone") +
                       (over.empty() ? "" : "; above bound at (mu,eps,end): " + over)};
  });

  criterion(8, "scale invariance of the quotient", [] {
    double worst = 0.0;
    for (const RandomCase& c : identity_cases()) {
      const double q = quotient(c.f, c.params);
      for (double s : {0.5, 2.0})
        worst = std::max(worst, rel(quotient(fn::scaled(c.f, s), c.params), q));
    }
    return Outcome{worst <= kScaleRel, "max rel change " + fmt("%.2e", worst)};
  });

  criterion(9, "sweep determinism at parallelism 1 and 8", [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "sharpq_acceptance";
    fs::create_directories(dir);
    const std::string base = "sweep --mu 1,2,3,5 --eps 0,0.5 --seed 42 --output ";
    std::vector<std::string> outputs;
    bool exits_ok = true;
    for (int par : {1, 1, 8, 8}) {
      const fs::path out = dir / ("run" + std::to_string(outputs.size()) + ".csv");
      exits_ok = exits_ok && run_cli(base + out.string() + " --parallelism " + std::to_string(par)) == 0;
      outputs.push_back(slurp(out));
    }
    fs::remove_all(dir);
    const bool same = !outputs[0].empty() &&
                      std::all_of(outputs.begin(), outputs.end(),
                                  [&](const std::string& s) { return s == outputs[0]; });
    return Outcome{same && exits_ok,
                   std::string(same ? "byte-identical" : "outputs differ") + " across 4 runs, " +
                       std::to_string(outputs[0].size()) + " bytes"};
  });

  std::string list;
  for (int id : failed) list += " " + std::to_string(id);
  std::printf("%zu of 9 criteria failed:%s\n", failed.size(), list.empty() ? " none" : list.c_str());
  if (failed != known) {
    std::printf("failing set differs from the declared known failures\n");
    return 1;
  }
  return 0;
}
