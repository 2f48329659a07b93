#include "sharpq/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sharpq/errors.hpp"
#include "sharpq/test_functions.hpp"

namespace sharpq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a finite number");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::nearbyint(d)) throw ConfigError("config key '" + key + "' needs an integer");
  return static_cast<long long>(d);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + fmt17(v[k]);
  return out;
}

bool is_failed(const SweepRecord& r) { return r.status == "failed(tolerance)"; }

}  // namespace

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

std::vector<FunctionTriple> builtin_test_functions(const ProblemParams& params) {
  const int lead =
      params.mu <= 0.0 ? std::max(2, static_cast<int>(std::ceil(1.0 - params.mu))) : 0;
  return {
      functions::exp_poly({1.0}, 1.0, lead),
      functions::exp_poly({1.0, 1.0}, 1.0, lead),
      functions::exp_poly({2.0, -1.0, 0.5}, 1.5, lead),
      functions::exp_poly({1.0, 0.0, 0.3, -0.05}, 0.7, lead),
  };
}

VerifyReport run_verify(const ProblemParams& params, const std::vector<double>& alphas,
                        const QuadratureSpec& spec, std::vector<FunctionTriple> functions) {
  check_admissible(params);
  VerifyReport rep;
  rep.params = params;
  rep.derived = derive(params);
  if (functions.empty()) functions = builtin_test_functions(params);
  bool ok = true;
  for (const FunctionTriple& f : functions) {
    const FormValues forms = form_values(f, params, spec);
    for (double alpha : alphas) {
      for (double b : {rep.derived.b_minus, rep.derived.b_plus}) {
        const ResidualCoefficients c{alpha, params.mu, (params.mu - b) * alpha};
        const double lhs = residual_lhs(f, params, c, spec).value;
        const double rhs = g_alpha(forms, params, alpha, b).value;
        IdentityRow row{f.label, alpha, b, lhs, rhs, relative_gap(lhs, rhs)};
        rep.identity_gap_max = std::max(rep.identity_gap_max, row.rel_gap);
        ok = ok && row.rel_gap <= kIdentityRelTol;
        rep.identity.push_back(std::move(row));
      }
    }
    const double q = quotient(forms);
    InequalityRow in{f.label, q, rep.derived.sharp_const,
                     q >= rep.derived.sharp_const * (1.0 - 1e-9)};
    ok = ok && in.holds;
    rep.inequality.push_back(std::move(in));
  }
  rep.passed = ok;
  return rep;
}

ExtremalReport run_extremal(const ProblemParams& params, double lambda,
                            const QuadratureSpec& spec) {
  check_admissible(params);
  ExtremalReport rep;
  rep.params = params;
  rep.derived = derive(params);
  rep.branch = branch_for(params.mu);
  rep.lambda = lambda;
  const Extremiser ex = build({rep.branch, 1.0, lambda, params});
  rep.membership_warning = ex.membership_warning;

  bool ok = true;
  try {
    const FormValues forms = form_values(ex.triple, params, spec);
    rep.quotient = quotient(forms);
    rep.quotient_rel_err = relative_gap(*rep.quotient, rep.derived.sharp_const);
    rep.lambda_recovered = lambda_of(forms, params);
    ok = rep.quotient_rel_err <= kExtremalRelTol &&
         relative_gap(*rep.lambda_recovered, lambda) <= kLambdaRelTol;
  } catch (const DivergenceSuspected& e) {
    rep.quotient_note = e.what();
    // Expected on the boundary, where the extremiser sits outside the space.
    ok = rep.membership_warning;
  }

  const std::vector<double> xs = log_spaced(-6.0, 6.0, 50);
  for (const PointResidual& r : euler_lagrange_residual(ex.triple, params, lambda, xs)) {
    if (r.scale > 0.0) rep.residual_max = std::max(rep.residual_max, std::abs(r.residual) / r.scale);
  }
  ok = ok && rep.residual_max <= kResidualTol;

  std::vector<double> probes;
  for (int k = 1; k <= 6; ++k) probes.push_back(std::pow(10.0, -k));
  for (int k = 1; k <= 6; ++k) probes.push_back(std::pow(10.0, k));
  rep.limits = limit_probe(ex.triple, params, probes);

  const double f6 = std::abs(ex.triple(1e-6).f);
  const double f7 = std::abs(ex.triple(1e-7).f);
  rep.near_zero_slope = (std::log(f6) - std::log(f7)) / std::log(10.0);
  rep.passed = ok;
  return rep;
}

void SweepConfig::validate() const {
  if (mu_grid.empty()) throw ConfigError("mu grid is empty");
  if (eps_values.empty()) throw ConfigError("eps grid is empty");
  if (eps_mode == EpsMode::kFraction) {
    for (double f : eps_values) {
      if (f > 1.0) throw ConfigError("eps fractions must be <= 1");
    }
  }
  if (K < 1 || K > kMaxBasisSize) throw ConfigError("K must lie in [1, 24]");
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("ratio must lie in (0, 1)");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  sharpq::validate(quad);
}

void SweepConfig::apply(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "mu_grid" || key == "mu") {
    mu_grid = parse_list(key, v);
  } else if (key == "eps_mode") {
    if (v == "absolute") {
      eps_mode = EpsMode::kAbsolute;
    } else if (v == "fraction") {
      eps_mode = EpsMode::kFraction;
    } else {
      throw ConfigError("eps_mode must be 'absolute' or 'fraction'");
    }
  } else if (key == "eps" || key == "eps_values") {
    eps_values = parse_list(key, v);
  } else if (key == "rel_tol") {
    quad.rel_tol = parse_double(key, v);
  } else if (key == "abs_floor") {
    quad.abs_floor = parse_double(key, v);
  } else if (key == "split") {
    quad.split = parse_double(key, v);
  } else if (key == "max_refinements") {
    quad.max_refinements = static_cast<int>(parse_int(key, v));
  } else if (key == "tail_cut") {
    quad.tail_cut = parse_double(key, v);
  } else if (key == "K") {
    K = static_cast<int>(parse_int(key, v));
  } else if (key == "scale") {
    scale = parse_double(key, v);
  } else if (key == "family") {
    if (v == "multirate") {
      family = BasisFamily::kMultiRate;
    } else if (v == "monomial") {
      family = BasisFamily::kMonomial;
    } else {
      throw ConfigError("family must be 'multirate' or 'monomial'");
    }
  } else if (key == "ratio") {
    ratio = parse_double(key, v);
  } else if (key == "restarts") {
    restarts = static_cast<int>(parse_int(key, v));
  } else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw ConfigError("seed must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "output") {
    output = v;
  } else if (key == "format") {
    if (v == "csv") {
      format = OutputFormat::kCsv;
    } else if (v == "json") {
      format = OutputFormat::kJson;
    } else {
      throw ConfigError("format must be 'csv' or 'json'");
    }
  } else if (key == "parallelism") {
    parallelism = static_cast<int>(parse_int(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void SweepConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(n) + ": expected key=value");
    }
    apply(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

// Output path, format and parallelism do not change the records, so they
// stay out of the hash.
std::string SweepConfig::canonical() const {
  std::ostringstream os;
  os << "mu_grid=" << join(mu_grid) << '\n'
     << "eps_mode=" << (eps_mode == EpsMode::kFraction ? "fraction" : "absolute") << '\n'
     << "eps=" << join(eps_values) << '\n'
     << "rel_tol=" << fmt17(quad.rel_tol) << '\n'
     << "abs_floor=" << fmt17(quad.abs_floor) << '\n'
     << "split=" << fmt17(quad.split) << '\n'
     << "max_refinements=" << quad.max_refinements << '\n'
     << "tail_cut=" << fmt17(quad.tail_cut) << '\n'
     << "K=" << K << '\n'
     << "scale=" << fmt17(scale) << '\n'
     << "family=" << to_string(family) << '\n'
     << "ratio=" << fmt17(ratio) << '\n'
     << "restarts=" << restarts << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

std::string config_hash(const SweepConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SweepRecord run_record(const ProblemParams& params, const SweepConfig& config) {
  SweepRecord r;
  r.mu = params.mu;
  r.eps = params.eps;
  bool failed = false;
  const auto fail = [&](const std::string& why) {
    failed = true;
    r.notes.push_back(why);
  };
  try {
    check_admissible(params);
  } catch (const AdmissibilityError& e) {
    r.s = std::nan("");
    r.sharp_const = std::nan("");
    r.status = "failed(tolerance)";
    r.notes.push_back(e.what());
    return r;
  }
  const DerivedParams d = derive(params);
  r.s = d.s;
  r.sharp_const = d.sharp_const;
  const bool boundary = on_boundary(params);

  if (params.mu == 0.0) {
    r.notes.push_back("extremal_quotient: no extremiser for mu = 0");
  } else {
    try {
      const ExtremalReport ex = run_extremal(params, 1.0, config.quad);
      r.extremal_quotient = ex.quotient;
      if (!ex.quotient) r.notes.push_back("extremal_quotient: " + ex.quotient_note);
      if (!ex.passed) fail("extremiser checks exceeded tolerance");
    } catch (const Error& e) {
      fail(std::string("extremal_quotient: ") + e.what());
    }
  }

  try {
    const VerifyReport v = run_verify(params, {-2.0, -0.5, 1.0, 2.5}, config.quad);
    r.identity_gap_max = v.identity_gap_max;
    if (!v.passed) fail("identity or inequality check exceeded tolerance");
  } catch (const Error& e) {
    fail(std::string("identity_gap_max: ") + e.what());
  }

  if (params.mu == 0.0) {
    r.notes.push_back("minimiser_value: mu = 0 is not minimised");
  } else {
    try {
      BasisOptions bo;
      bo.family = config.family;
      bo.ratio = config.ratio;
      bo.parallel = false;
      const BasisModel m = build_basis(params, config.K, config.scale, config.quad, bo);
      MinimiseOptions mo;
      mo.restarts = config.restarts;
      mo.seed = config.seed;
      mo.parallel = false;
      const MinimisationResult res = minimise_quotient(m, mo);
      r.minimiser_value = res.value;
      r.min_minus_sharp = res.value - d.sharp_const;
      if (res.value < d.sharp_const - kLowerBoundSlack) fail("minimiser value below the sharp constant");
      if (*r.min_minus_sharp > kMinimiserRelTol * d.sharp_const) {
        if (boundary) {
          r.notes.push_back("minimiser: slow convergence in K on the boundary eps = mu^2/4");
        } else {
          fail("minimiser value above the sharp constant by more than the tolerance");
        }
      }
    } catch (const Error& e) {
      fail(std::string("minimiser_value: ") + e.what());
    }
  }

  if (failed) {
    r.status = "failed(tolerance)";
  } else if (boundary) {
    r.status = "warning(membership)";
  } else {
    r.status = "ok";
  }
  return r;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<ProblemParams> grid;
  for (double mu : config.mu_grid) {
    for (double e : config.eps_values) {
      grid.push_back({mu, config.eps_mode == EpsMode::kFraction ? e * 0.25 * mu * mu : e});
    }
  }
  std::vector<SweepRecord> out(grid.size());
  const int n = static_cast<int>(grid.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.parallelism)
  for (int k = 0; k < n; ++k) {
    try {
      out[k] = run_record(grid[k], config);
    } catch (const std::exception& e) {
      SweepRecord r;
      r.mu = grid[k].mu;
      r.eps = grid[k].eps;
      r.status = "failed(tolerance)";
      r.notes.push_back(e.what());
      out[k] = std::move(r);
    }
  }
  return out;
}

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  for (const SweepRecord& r : records) {
    out += fmt17(r.mu) + "," + fmt17(r.eps) + "," + fmt17(r.s) + "," + fmt17(r.sharp_const) + "," +
           opt(r.extremal_quotient) + "," + opt(r.identity_gap_max) + "," +
           opt(r.minimiser_value) + "," + opt(r.min_minus_sharp) + "," + r.status + "\n";
  }
  return out;
}

nlohmann::json to_json(const std::vector<SweepRecord>& records, const SweepConfig& config) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json recs = json::array();
  for (const SweepRecord& r : records) {
    recs.push_back({{"mu", r.mu},
                    {"eps", r.eps},
                    {"s", num(r.s)},
                    {"sharp_const", num(r.sharp_const)},
                    {"extremal_quotient", opt(r.extremal_quotient)},
                    {"identity_gap_max", opt(r.identity_gap_max)},
                    {"minimiser_value", opt(r.minimiser_value)},
                    {"min_minus_sharp", opt(r.min_minus_sharp)},
                    {"status", r.status},
                    {"notes", r.notes}});
  }
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream ts;
  ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  const bool any_failed = std::any_of(records.begin(), records.end(), is_failed);
  return {{"metadata",
           {{"tool_version", kToolVersion},
            {"config_hash", config_hash(config)},
            {"config", config.canonical()},
            {"parallelism", config.parallelism},
            {"timestamp_utc", ts.str()},
            {"all_passed", !any_failed}}},
          {"records", recs}};
}

}  // namespace sharpq
