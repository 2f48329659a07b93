// Command-line front end: verify, extremal, sweep, kummer, minimise.
//
// Exit codes: 0 pass, 1 tolerance failure, 2 usage or admissibility error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sharpq/errors.hpp"
#include "sharpq/extremiser.hpp"
#include "sharpq/kummer.hpp"
#include "sharpq/minimiser.hpp"
#include "sharpq/sweep.hpp"
#include "sharpq/test_functions.hpp"

namespace {

using nlohmann::json;
using namespace sharpq;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

constexpr double kKummerResidualTol = 1e-9;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void add_quad_flags(CLI::App* cmd, QuadratureSpec& q) {
  cmd->add_option("--rel-tol", q.rel_tol, "quadrature relative tolerance");
  cmd->add_option("--abs-floor", q.abs_floor, "quadrature absolute floor");
  cmd->add_option("--split", q.split, "split point between the two maps");
  cmd->add_option("--max-refinements", q.max_refinements, "step halvings before giving up");
  cmd->add_option("--tail-cut", q.tail_cut, "negligible node contribution");
}

void write_report(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write report '" + path + "'");
  out << j.dump(2) << '\n';
}

// Failures of the inputs map to 2, numerical failures to 1.
int classify(const Error& e) {
  if (dynamic_cast<const AdmissibilityError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const BranchError*>(&e) || dynamic_cast<const PoleError*>(&e) ||
      dynamic_cast<const PrecisionError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    return kUsage;
  }
  return kFail;
}

struct VerifyArgs {
  ProblemParams params;
  std::vector<double> alphas;
  QuadratureSpec quad;
  std::string report;
};

int cmd_verify(const VerifyArgs& a) {
  const std::vector<double> alphas =
      a.alphas.empty() ? std::vector<double>{-2.0, -0.5, 1.0, 2.5} : a.alphas;
  const VerifyReport rep = run_verify(a.params, alphas, a.quad);
  std::cout << "mu=" << g17(a.params.mu) << " eps=" << g17(a.params.eps)
            << " s=" << g17(rep.derived.s) << " sharp_const=" << g17(rep.derived.sharp_const)
            << "\n";
  json ids = json::array();
  for (const IdentityRow& r : rep.identity) {
    std::cout << "identity  f=" << r.label << " alpha=" << r.alpha << " b=" << g17(r.b)
              << " lhs=" << g17(r.lhs) << " g_alpha=" << g17(r.rhs) << " rel_gap=" << r.rel_gap
              << "\n";
    ids.push_back({{"function", r.label},
                   {"alpha", r.alpha},
                   {"b", r.b},
                   {"lhs", r.lhs},
                   {"g_alpha", r.rhs},
                   {"rel_gap", r.rel_gap}});
  }
  json ineq = json::array();
  for (const InequalityRow& r : rep.inequality) {
    std::cout << "quotient  f=" << r.label << " value=" << g17(r.quotient)
              << (r.holds ? " >= " : " < ") << "sharp_const\n";
    ineq.push_back({{"function", r.label}, {"quotient", r.quotient}, {"holds", r.holds}});
  }
  // The extremal quotient is reported where an extremiser exists.
  json extremal = nullptr;
  if (a.params.mu != 0.0) {
    try {
      const ExtremalReport ex = run_extremal(a.params, 1.0, a.quad);
      if (ex.quotient) {
        extremal = *ex.quotient;
        std::cout << "extremal_quotient=" << g17(*ex.quotient) << "\n";
      }
    } catch (const Error& e) {
      std::cout << "extremal_quotient: " << e.what() << "\n";
    }
  }
  std::cout << "identity_gap_max=" << rep.identity_gap_max << " "
            << (rep.passed ? "PASS" : "FAIL") << "\n";
  write_report(a.report, {{"mu", a.params.mu},
                          {"eps", a.params.eps},
                          {"s", rep.derived.s},
                          {"sharp_const", rep.derived.sharp_const},
                          {"extremal_quotient", extremal},
                          {"identity", ids},
                          {"inequality", ineq},
                          {"identity_gap_max", rep.identity_gap_max},
                          {"passed", rep.passed}});
  return rep.passed ? kPass : kFail;
}

struct ExtremalArgs {
  ProblemParams params;
  double lambda = 1.0;
  std::string branch = "auto";
  QuadratureSpec quad;
  std::string report;
};

int cmd_extremal(const ExtremalArgs& a) {
  check_admissible(a.params);
  const Branch natural = branch_for(a.params.mu);
  if (a.branch != "auto" && a.branch != to_string(natural)) {
    throw BranchError("branch " + a.branch + " does not apply to mu = " + g17(a.params.mu));
  }
  const ExtremalReport rep = run_extremal(a.params, a.lambda, a.quad);
  std::cout << "branch=" << to_string(rep.branch) << " b=" << g17(rep.derived.b_minus)
            << " sharp_const=" << g17(rep.derived.sharp_const) << "\n";
  if (rep.quotient) {
    std::cout << "quotient=" << g17(*rep.quotient) << " rel_err=" << rep.quotient_rel_err << "\n";
  } else {
    std::cout << "quotient=null (" << rep.quotient_note << ")\n";
  }
  if (rep.lambda_recovered) std::cout << "lambda_recovered=" << g17(*rep.lambda_recovered) << "\n";
  std::cout << "ode_residual_max=" << rep.residual_max << "\n";
  std::cout << "near_zero_slope=" << g17(rep.near_zero_slope) << "\n";
  json limits = json::array();
  for (const LimitSample& s : rep.limits) {
    std::cout << "limit x=" << s.x << " G1=" << s.G1 << " G2=" << s.G2 << " G3=" << s.G3 << "\n";
    limits.push_back({{"x", s.x}, {"G1", s.G1}, {"G2", s.G2}, {"G3", s.G3}});
  }
  if (rep.membership_warning) {
    std::cout << "warning(membership): eps = mu^2/4 and the Kummer factor does not terminate\n";
  }
  const GrowthReport g = rejected_solution_evidence(a.params, a.lambda, a.quad);
  json growth = {{"ill_posed", g.ill_posed}, {"note", g.note}};
  if (!g.ill_posed) {
    std::cout << "second solution: " << g.note << "\n";
    json nz = json::array();
    for (const GrowthRow& r : g.near_zero) {
      std::cout << "  delta=" << r.cutoff << " partial=" << g17(r.partial) << "\n";
      nz.push_back({{"delta", r.cutoff}, {"partial", r.partial}});
    }
    json ni = json::array();
    for (const GrowthRow& r : g.near_infinity) {
      std::cout << "  T=" << r.cutoff << " partial=" << g17(r.partial) << "\n";
      ni.push_back({{"T", r.cutoff}, {"partial", r.partial}});
    }
    std::cout << "  growth_exponent=" << g.growth_exponent << "\n";
    growth["near_zero"] = nz;
    growth["near_infinity"] = ni;
    growth["growth_exponent"] = g.growth_exponent;
  } else {
    std::cout << "second solution: " << g.note << "\n";
  }
  std::cout << (rep.passed ? "PASS" : "FAIL") << "\n";
  write_report(a.report,
               {{"mu", a.params.mu},
                {"eps", a.params.eps},
                {"lambda", a.lambda},
                {"branch", to_string(rep.branch)},
                {"quotient", rep.quotient ? json(*rep.quotient) : json(nullptr)},
                {"lambda_recovered",
                 rep.lambda_recovered ? json(*rep.lambda_recovered) : json(nullptr)},
                {"ode_residual_max", rep.residual_max},
                {"near_zero_slope", rep.near_zero_slope},
                {"membership_warning", rep.membership_warning},
                {"limits", limits},
                {"second_solution", growth},
                {"passed", rep.passed}});
  return rep.passed ? kPass : kFail;
}

int cmd_sweep(const SweepConfig& config) {
  const std::vector<SweepRecord> records = run_sweep(config);
  std::string text;
  if (config.format == OutputFormat::kCsv) {
    text = to_csv(records);
  } else {
    text = to_json(records, config).dump(2) + "\n";
  }
  if (config.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(config.output, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + config.output + "'");
    out << text;
  }
  for (const SweepRecord& r : records) {
    if (r.status == "failed(tolerance)") return kFail;
  }
  return kPass;
}

int cmd_kummer(double b, double mu, double z, double z_max) {
  const kummer::KummerParams p{b, mu, z_max};
  const kummer::Derivs d = kummer::m_derivatives(p, z);
  const double res = kummer::ode_residual(p, z);
  const double scaled = std::abs(res) / kummer::ode_residual_scale(p, z);
  std::cout << "M=" << g17(d.w) << "\n"
            << "dM=" << g17(d.dw) << "\n"
            << "d2M=" << g17(d.d2w) << "\n"
            << "residual=" << res << " scaled=" << scaled << "\n";
  return scaled <= kKummerResidualTol ? kPass : kFail;
}

struct MinimiseArgs {
  ProblemParams params;
  int K = 16;
  double scale = 1.0;
  std::string family = "multirate";
  double ratio = 0.5;
  MinimiseOptions opts;
  QuadratureSpec quad;
};

int cmd_minimise(const MinimiseArgs& a) {
  BasisOptions bo;
  if (a.family == "monomial") {
    bo.family = BasisFamily::kMonomial;
  } else if (a.family != "multirate") {
    throw ConfigError("family must be 'multirate' or 'monomial'");
  }
  bo.ratio = a.ratio;
  const BasisModel m = build_basis(a.params, a.K, a.scale, a.quad, bo);
  const MinimisationResult r = minimise_quotient(m, a.opts);
  const double sharp = sharp_constant(a.params);
  std::cout << "K=" << a.K << " family=" << to_string(m.family) << " cond(D)=" << m.condition_D
            << " gram_cross_check=" << m.cross_check_error << "\n"
            << "value=" << g17(r.value) << " sharp_const=" << g17(sharp)
            << " rel_excess=" << (r.value - sharp) / sharp << "\n"
            << "restarts=" << r.restarts_used << " best_restart=" << r.best_restart
            << " grad_norm=" << r.grad_norm << " converged=" << (r.converged ? "yes" : "no")
            << "\n";
  std::cout << "coefficients=";
  for (std::size_t k = 0; k < r.coefficients.size(); ++k) {
    std::cout << (k ? "," : "") << g17(r.coefficients[k]);
  }
  std::cout << "\n";
  const bool ok = r.converged && r.value >= sharp - kLowerBoundSlack;
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp weighted interpolation inequality: verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sharpq::kToolVersion);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "identity and inequality suites");
  verify->add_option("--mu", va.params.mu)->required();
  verify->add_option("--eps", va.params.eps)->required();
  verify->add_option("--alpha", va.alphas, "alpha values (repeatable)");
  verify->add_option("--report", va.report, "write a JSON report here");
  add_quad_flags(verify, va.quad);

  ExtremalArgs ea;
  auto* extremal = app.add_subcommand("extremal", "build and check the extremiser");
  extremal->add_option("--mu", ea.params.mu)->required();
  extremal->add_option("--eps", ea.params.eps)->required();
  extremal->add_option("--lambda", ea.lambda, "rate of the extremiser")->capture_default_str();
  extremal->add_option("--branch", ea.branch, "auto, mu_positive or mu_negative")
      ->capture_default_str();
  extremal->add_option("--report", ea.report, "write a JSON report here");
  add_quad_flags(extremal, ea.quad);

  SweepConfig sc;
  std::string config_file;
  std::vector<double> mu_grid, eps_grid;
  std::string eps_mode, family, format;
  auto* sweep = app.add_subcommand("sweep", "grid sweep over (mu, eps)");
  sweep->add_option("--config", config_file, "key=value config file");
  auto* o_mu = sweep->add_option("--mu", mu_grid, "mu grid")->delimiter(',');
  auto* o_eps = sweep->add_option("--eps", eps_grid, "eps values or fractions")->delimiter(',');
  auto* o_mode = sweep->add_option("--eps-mode", eps_mode, "absolute or fraction");
  SweepConfig flags;
  auto* o_K = sweep->add_option("--K", flags.K);
  auto* o_scale = sweep->add_option("--scale", flags.scale);
  auto* o_family = sweep->add_option("--family", family, "multirate or monomial");
  auto* o_ratio = sweep->add_option("--ratio", flags.ratio);
  auto* o_restarts = sweep->add_option("--restarts", flags.restarts);
  auto* o_seed = sweep->add_option("--seed", flags.seed);
  auto* o_out = sweep->add_option("--output", flags.output);
  auto* o_format = sweep->add_option("--format", format, "csv or json");
  auto* o_par = sweep->add_option("--parallelism", flags.parallelism);
  QuadratureSpec& fq = flags.quad;
  auto* o_rel = sweep->add_option("--rel-tol", fq.rel_tol);
  auto* o_abs = sweep->add_option("--abs-floor", fq.abs_floor);
  auto* o_split = sweep->add_option("--split", fq.split);
  auto* o_maxr = sweep->add_option("--max-refinements", fq.max_refinements);
  auto* o_tail = sweep->add_option("--tail-cut", fq.tail_cut);

  double kb = 0.0, kmu = 1.0, kz = 0.0, kzmax = kummer::kDefaultZMax;
  auto* kum = app.add_subcommand("kummer", "evaluate 1F1(b; mu; z) and its ODE residual");
  kum->add_option("--b", kb)->required();
  kum->add_option("--mu", kmu)->required();
  kum->add_option("--z", kz)->required();
  kum->add_option("--z-max", kzmax)->capture_default_str();

  MinimiseArgs ma;
  auto* mini = app.add_subcommand("minimise", "direct minimisation over a trial space");
  mini->add_option("--mu", ma.params.mu)->required();
  mini->add_option("--eps", ma.params.eps)->required();
  mini->add_option("--K", ma.K)->capture_default_str();
  mini->add_option("--scale", ma.scale)->capture_default_str();
  mini->add_option("--family", ma.family)->capture_default_str();
  mini->add_option("--ratio", ma.ratio)->capture_default_str();
  mini->add_option("--restarts", ma.opts.restarts)->capture_default_str();
  mini->add_option("--seed", ma.opts.seed)->capture_default_str();
  mini->add_option("--max-iters", ma.opts.max_iters)->capture_default_str();
  mini->add_option("--grad-tol", ma.opts.grad_tol)->capture_default_str();
  add_quad_flags(mini, ma.quad);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(va);
    if (*extremal) return cmd_extremal(ea);
    if (*kum) return cmd_kummer(kb, kmu, kz, kzmax);
    if (*mini) return cmd_minimise(ma);
    if (*sweep) {
      if (!config_file.empty()) sc.apply_file(config_file);
      // Flags override the file.
      if (o_mu->count()) sc.mu_grid = mu_grid;
      if (o_eps->count()) sc.eps_values = eps_grid;
      if (o_mode->count()) sc.apply("eps_mode", eps_mode);
      if (o_K->count()) sc.K = flags.K;
      if (o_scale->count()) sc.scale = flags.scale;
      if (o_family->count()) sc.apply("family", family);
      if (o_ratio->count()) sc.ratio = flags.ratio;
      if (o_restarts->count()) sc.restarts = flags.restarts;
      if (o_seed->count()) sc.seed = flags.seed;
      if (o_out->count()) sc.output = flags.output;
      if (o_format->count()) sc.apply("format", format);
      if (o_par->count()) sc.parallelism = flags.parallelism;
      if (o_rel->count()) sc.quad.rel_tol = fq.rel_tol;
      if (o_abs->count()) sc.quad.abs_floor = fq.abs_floor;
      if (o_split->count()) sc.quad.split = fq.split;
      if (o_maxr->count()) sc.quad.max_refinements = fq.max_refinements;
      if (o_tail->count()) sc.quad.tail_cut = fq.tail_cut;
      return cmd_sweep(sc);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
