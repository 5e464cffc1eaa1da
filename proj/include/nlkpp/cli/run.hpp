#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlkpp/asymptotics/limits.hpp"
#include "nlkpp/asymptotics/problem.hpp"
#include "nlkpp/asymptotics/sweeps.hpp"
#include "nlkpp/core/hypotheses.hpp"
#include "nlkpp/dynamics/periodic.hpp"
#include "nlkpp/io/config.hpp"
#include "nlkpp/io/csv.hpp"
#include "nlkpp/maxprin/maxprin.hpp"
#include "nlkpp/nonlocal/consistency.hpp"
#include "nlkpp/spectral/principal.hpp"
#include "nlkpp/spectral/report.hpp"

namespace nlkpp {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { exit_ok = 0, exit_assertion = 1, exit_config = 2, exit_solver = 3 };

struct RunOptions {
  int threads = 1;
  /// Overrides the config seed when set.
  std::optional<long long> seed;
};

struct RunResult {
  int exit_code = exit_ok;
  nlohmann::ordered_json summary;
  /// file name -> contents.
  std::map<std::string, std::string> files;

  /// Writes every file plus summary.json into `dir`.
  void save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : files) {
      std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
      if (!f) throw Error("cannot write " + name + " in " + dir);
      f << text;
    }
    std::ofstream f(std::filesystem::path(dir) / "summary.json", std::ios::binary);
    if (!f) throw Error("cannot write summary.json in " + dir);
    f << summary.dump(2) << '\n';
  }
};

// ---------------------------------------------------------------------------
// Config -> problem.

inline Sampler coefficient_sampler(const std::string& source, double T, const std::string& key) {
  Expression e = Expression::parse(source, {{"T", T}});
  if (e.uses('z') || e.uses('r')) throw ConfigError("key '" + key + "': coefficients depend on t, x, y only");
  return [e](double t, const Point& x) { return e(Variables{x.x, x.y, t, 0.0, 0.0}); };
}

inline KernelProfile kernel_from_config(const ExperimentConfig& c, int dim) {
  const std::string k = c.text("kernel");
  if (k == "triangular") return builtin_kernel(KernelShape::triangular, dim);
  if (k == "uniform") return builtin_kernel(KernelShape::uniform, dim);
  if (k == "cosine") return builtin_kernel(KernelShape::cosine_bump, dim);
  if (!c.has("kernel_expr")) throw ConfigError("kernel = custom needs kernel_expr");
  Expression e = Expression::parse(c.text("kernel_expr"));
  if (e.uses('t')) throw ConfigError("key 'kernel_expr': kernels do not depend on t");
  return normalize_kernel([e](const Point& z) { return e(Variables{z.x, z.y, 0.0, z.x, norm(z)}); },
                          c.real("kernel_radius"), dim, KernelShape::custom);
}

inline Problem problem_from_config(const ExperimentConfig& c) {
  Problem p;
  p.dimension = static_cast<int>(c.integer("dimension"));
  if (p.dimension != 1 && p.dimension != 2) throw ConfigError("dimension must be 1 or 2");
  auto dom = c.list("domain");
  if (dom.size() != static_cast<std::size_t>(2 * p.dimension))
    throw ConfigError("domain needs " + std::to_string(2 * p.dimension) + " numbers in dimension " +
                      std::to_string(p.dimension));
  p.bounds = Box{{dom[0], p.dimension == 2 ? dom[2] : 0.0}, {dom[1], p.dimension == 2 ? dom[3] : 0.0}};
  p.topology = c.text("topology") == "torus" ? Topology::torus : Topology::hostile;
  p.kernel = kernel_from_config(c, p.dimension);
  p.period = c.real("T");
  p.D = c.real("D");
  p.sigma = c.real("sigma");
  p.m = c.real("m");
  if (!(p.period > 0.0) || !(p.D > 0.0) || !(p.sigma > 0.0)) throw ConfigError("T, D and sigma must be positive");
  if (!(p.m >= 0.0)) throw ConfigError("m must be non-negative");
  p.a = coefficient_sampler(c.text("a"), p.period, "a");
  p.b = coefficient_sampler(c.text("b"), p.period, "b");
  p.reaction = c.text("nonlinearity") == "linear" ? KPPNonlinearity::Family::linear : KPPNonlinearity::Family::logistic;
  p.resolution = static_cast<int>(c.integer("resolution"));
  p.time_samples = static_cast<int>(c.integer("time_samples"));
  if (p.time_samples < 8) throw ConfigError("time_samples must be at least 8");
  p.eigen.time_samples = p.time_samples;
  p.eigen.tol = c.real("eigen_tol");
  p.eigen.residual_tol = c.real("residual_tol");
  p.evolution.time_samples = p.time_samples;
  return p;
}

// ---------------------------------------------------------------------------
// Experiments.

namespace detail {

struct RunContext {
  RunContext(const ExperimentConfig& c, Problem p) : cfg(c), problem(std::move(p)) {}

  const ExperimentConfig& cfg;
  Problem problem;
  int threads = 1;
  long long seed = 1;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  nlohmann::ordered_json assertions = nlohmann::ordered_json::array();
  nlohmann::ordered_json tolerances = nlohmann::ordered_json::object();
  std::map<std::string, std::string> files;

  double tol(const std::string& name, double value) {
    tolerances[name] = value;
    return value;
  }
  void check(const std::string& name, bool passed, nlohmann::ordered_json observed = nullptr,
             const std::string& tolerance = "") {
    nlohmann::ordered_json a;
    a["name"] = name;
    a["passed"] = passed;
    if (!observed.is_null()) a["observed"] = std::move(observed);
    if (!tolerance.empty()) {
      a["tolerance"] = tolerance;
      a["tolerance_value"] = tolerances.at(tolerance);
    }
    assertions.push_back(std::move(a));
  }
  void file(const std::string& name, const CsvWriter& w) {
    std::ostringstream os;
    w.write(os);
    files[name] = os.str();
  }
};

inline nlohmann::ordered_json num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json eigen_json(const EigenResult& r) {
  return {{"lambda1", num(r.lambda1)},     {"lambda_star", num(r.lambda_star)},   {"is_principal", r.is_principal},
          {"converged", r.converged},      {"residual", num(r.residual)},         {"iterations", r.iterations},
          {"method", r.method},            {"lambda_lower", num(r.lambda_lower)}, {"lambda_upper", num(r.lambda_upper)},
          {"diagnostic", r.diagnostic}};
}

/// Column k of `values` is the field at t = k dt.
inline void field_csv(RunContext& ctx, const std::string& name, const DomainGrid& grid, const Eigen::MatrixXd& values,
                      double dt) {
  CsvWriter w({"t", "node", "x", "y", "u"});
  for (Eigen::Index k = 0; k < values.cols(); ++k)
    for (int i = 0; i < grid.size(); ++i)
      w.row({dt * static_cast<double>(k), static_cast<long long>(i), grid.node(i).x, grid.node(i).y, values(i, k)});
  ctx.file(name, w);
}

inline void run_eigen(RunContext& ctx) {
  const Problem& p = ctx.problem;
  auto inst = instantiate(p);
  auto r = principal_spectrum_point(inst.spec, p.eigen);
  ctx.results["nodes"] = inst.grid->size();
  ctx.results["eigen"] = eigen_json(r);
  std::ostringstream os;
  write_spectrum_csv(os, {spectrum_row(p.D, r)}, "D");
  ctx.files["spectrum.csv"] = os.str();
  ctx.tol("residual_tol", p.eigen.residual_tol);
  ctx.tol("eigen_tol", p.eigen.tol);
  ctx.check("converged", r.converged, r.iterations, "eigen_tol");
  ctx.check("residual", r.residual <= p.eigen.residual_tol, num(r.residual), "residual_tol");
}

inline void run_periodic(RunContext& ctx) {
  const Problem& p = ctx.problem;
  auto inst = instantiate(p);
  auto eig = principal_spectrum_point(inst.spec, p.eigen);
  NonlinearFlow flow(inst.f, inst.spec, p.evolution);
  SqueezeOptions so;
  so.M_factor = ctx.cfg.real("M_factor");
  auto sol = periodic_solution_squeeze(flow, eig, so);
  ctx.results["eigen"] = eigen_json(eig);
  ctx.results["solution"] = {{"exists", sol.exists},        {"critical", sol.critical},
                             {"converged", sol.converged},  {"status", sol.status},
                             {"periods", sol.periods},      {"residual", num(sol.residual)},
                             {"closure", num(sol.closure)}, {"sup", sol.exists ? num(sol.u_star.sup_norm()) : num(0.0)},
                             {"M", sol.M},                  {"epsilon", sol.epsilon},
                             {"diagnostic", sol.diagnostic}};
  CsvWriter hist({"period", "part_metric", "upper_sup"});
  for (std::size_t k = 0; k < sol.part_metric_history.size(); ++k)
    hist.row({static_cast<long long>(k + 1), sol.part_metric_history[k],
              k < sol.upper_history.size() ? sol.upper_history[k] : std::nan("")});
  ctx.file("squeeze_history.csv", hist);
  if (sol.exists) field_csv(ctx, "u_star.csv", *inst.grid, sol.u_star.values(), sol.u_star.dt());
  const double exist_tol = ctx.tol("exist_tol", p.evolution.exist_tol);
  ctx.tol("squeeze_tol", p.evolution.squeeze_tol);
  ctx.tol("residual_tol", so.residual_tol);
  ctx.check("eigen_converged", eig.converged, eig.iterations);
  ctx.check("resolved", sol.status != "unresolved", sol.status);
  ctx.check("existence_matches_sign", sol.exists == (eig.lambda1 < -exist_tol), num(eig.lambda1), "exist_tol");
  if (sol.exists) ctx.check("residual", sol.residual <= so.residual_tol, num(sol.residual), "residual_tol");
}

inline SweepOptions sweep_options(const RunContext& ctx) {
  SweepOptions so;
  so.threads = ctx.threads;
  so.seed = static_cast<std::uint64_t>(ctx.seed);
  so.solutions = ctx.cfg.boolean("solutions");
  return so;
}

inline nlohmann::ordered_json sweep_record_json(const SweepRecord& r) {
  return {{r.parameter, r.value},          {"lambda1", num(r.lambda1)},     {"lambda_star", num(r.lambda_star)},
          {"is_principal", r.is_principal}, {"converged", r.converged},      {"gap_small", num(r.gap_small)},
          {"gap_large", num(r.gap_large)},  {"large_D_margin", num(r.large_D_margin)},
          {"u_sup", num(r.u_sup)},          {"persists", r.persists},        {"nodes", r.nodes},
          {"spacing", r.spacing},           {"method", r.method}};
}

inline CsvWriter sweep_csv(const std::vector<SweepRecord>& recs, const std::string& param) {
  CsvWriter w({param, "lambda1", "lambda_star", "is_principal", "converged", "gap_small", "gap_large",
               "large_D_margin", "u_sup", "persists", "nodes", "spacing", "method"});
  for (const auto& r : recs)
    w.row({r.value, r.lambda1, r.lambda_star, r.is_principal, r.converged, r.gap_small, r.gap_large, r.large_D_margin,
           r.u_sup, r.persists, static_cast<long long>(r.nodes), r.spacing, r.method});
  return w;
}

inline void sweep_common(RunContext& ctx, const SweepResult& r, const std::string& param) {
  auto arr = nlohmann::ordered_json::array();
  bool all_converged = true;
  for (const auto& rec : r.records) {
    arr.push_back(sweep_record_json(rec));
    all_converged = all_converged && rec.converged;
  }
  ctx.results["records"] = arr;
  ctx.results["refinement"] = r.refinement;
  ctx.results["shift_check"] = {{"index", r.shift_index}, {"error", num(r.shift_error)}};
  ctx.file(param == "D" ? "sweep_D.csv" : "sweep_sigma.csv", sweep_csv(r.records, param));
  ctx.check("all_converged", all_converged);
  const double shift_tol = ctx.tol("shift_tol", 1e-8);
  ctx.check("shift_equivariance", r.shift_error <= shift_tol, num(r.shift_error), "shift_tol");
}

inline void run_sweep_D(RunContext& ctx) {
  auto Ds = ctx.cfg.list("D_values");
  auto r = sweep_dispersal_rate(ctx.problem, Ds, sweep_options(ctx));
  sweep_common(ctx, r, "D");
  bool increasing = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> gaps;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    if (i > 0 && !(r.records[i].lambda1 > r.records[i - 1].lambda1)) increasing = false;
    worst_margin = std::min(worst_margin, r.records[i].large_D_margin);
    gaps.push_back(r.records[i].gap_small);
  }
  const int tail = static_cast<int>(ctx.cfg.integer("tail"));
  std::vector<double> head(gaps.begin(), gaps.begin() + std::min<std::size_t>(gaps.size(), tail));
  const bool small_tail = tail_monotone(head, false, tail);
  ctx.results["verdicts"] = {{"strictly_increasing", increasing}, {"small_D_tail_monotone", small_tail}};
  const double margin_tol = ctx.tol("margin_tol", 1e-8);
  ctx.check("strictly_increasing", increasing);
  ctx.check("large_D_lower_bound", worst_margin >= -margin_tol, num(worst_margin), "margin_tol");
  ctx.check("small_D_tail_monotone", small_tail);
}

inline void run_sweep_sigma(RunContext& ctx) {
  const Problem& p = ctx.problem;
  auto sigmas = ctx.cfg.list("sigma_values");
  auto r = sweep_dispersal_range(p, p.m, sigmas, ctx.cfg.boolean("co_refine"), sweep_options(ctx));
  sweep_common(ctx, r, "sigma");
  const int tail = static_cast<int>(ctx.cfg.integer("tail"));
  std::vector<double> small, large;
  for (const auto& rec : r.records) {
    small.push_back(rec.gap_small);
    large.push_back(rec.gap_large);
  }
  std::vector<double> head(small.begin(), small.begin() + std::min<std::size_t>(small.size(), tail));
  const bool small_tail = tail_monotone(head, false, tail);
  const bool large_tail = tail_monotone(large, true, tail);
  ctx.results["verdicts"] = {{"small_sigma_tail_monotone", small_tail}, {"large_sigma_tail_monotone", large_tail}};
  const std::string which = ctx.cfg.text("assert_tails");
  if (which == "both" || which == "small") ctx.check("small_sigma_tail_monotone", small_tail);
  if (which == "both" || which == "large") ctx.check("large_sigma_tail_monotone", large_tail);
  if (ctx.cfg.boolean("monotone_check")) {
    if (p.m != 0.0) throw ConfigError("monotone_check needs m = 0");
    const double mono_tol = ctx.tol("mono_tol", ctx.cfg.real("mono_tol"));
    SweepOptions so = sweep_options(ctx);
    auto rep = check_sigma_monotonicity(p, sigmas, mono_tol, so);
    ctx.results["monotonicity"] = {{"holds", rep.holds},
                                   {"worst_drop", rep.worst_drop},
                                   {"symmetry_defect", rep.radial.symmetry_defect},
                                   {"monotonicity_defect", rep.radial.monotonicity_defect}};
    ctx.check("sigma_monotone", rep.holds, rep.worst_drop, "mono_tol");
  }
}

inline void run_critical_sigma(RunContext& ctx) {
  const Problem& p = ctx.problem;
  const double lambda_tol = ctx.tol("lambda_tol", ctx.cfg.real("lambda_tol"));
  auto c = critical_sigma(p, ctx.cfg.real("sigma_lo"), ctx.cfg.real("sigma_hi"), 0.0, lambda_tol);
  ctx.results["critical"] = {{"found", c.found},          {"sigma_star", num(c.sigma_star)}, {"lambda_at", num(c.lambda_at)},
                             {"lambda_lo", c.lambda_lo}, {"lambda_hi", c.lambda_hi},         {"nodes", c.nodes}};
  CsvWriter hist({"sigma", "lambda1"});
  for (const auto& [s, l] : c.history) hist.row({s, l});
  ctx.file("critical_history.csv", hist);
  ctx.check("critical_sigma_found", c.found, num(c.lambda_at), "lambda_tol");
  auto fr = ctx.cfg.list("probe_fractions");
  if (!fr.empty() && c.found) {
    auto pts = open_problem_probe(p, c, fr);
    CsvWriter w({"sigma", "lambda1", "exists", "u_sup", "periods"});
    for (const auto& pt : pts) w.row({pt.sigma, pt.lambda1, pt.exists, pt.u_sup, static_cast<long long>(pt.periods)});
    ctx.file("probe.csv", w);
  }
}

inline void run_maxprin(RunContext& ctx) {
  const Problem& p = ctx.problem;
  EquivalenceOptions opt;
  opt.band = ctx.tol("band", ctx.cfg.real("band"));
  opt.instances = static_cast<int>(ctx.cfg.integer("instances"));
  opt.max_attempts = 3 * opt.instances;
  opt.seed = static_cast<std::uint64_t>(ctx.seed);
  opt.threads = ctx.threads;
  opt.mp.slack = ctx.tol("mp_slack", ctx.cfg.real("mp_slack"));
  opt.mp.time_samples = ctx.cfg.has("time_samples") ? p.time_samples : 128;
  Problem q = p;
  q.time_samples = opt.mp.time_samples;
  auto base = instantiate(q).spec;
  EigenOptions eo = q.eigen;
  eo.time_samples = opt.mp.time_samples;
  eo.integrator.min_steps_per_period = opt.mp.min_steps_per_period;
  const double l0 = principal_spectrum_point(base, eo).lambda1;
  std::vector<double> shifts;
  for (double target : ctx.cfg.list("lambda_targets")) shifts.push_back(l0 - target);
  auto table = equivalence_experiment(base, shifts, opt);
  CsvWriter w({"shift", "lambda1", "regime", "witness_found", "witness_confirmed", "rho", "admissible", "positive",
               "attempts", "max_retries", "g_defect", "violations", "diagnostic"});
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    w.row({r.shift, r.lambda1, r.regime, r.witness_found, r.witness_confirmed, r.witness_rho,
           static_cast<long long>(r.admissible), static_cast<long long>(r.positive), static_cast<long long>(r.attempts),
           static_cast<long long>(r.max_retries_used), r.worst_g_defect, static_cast<long long>(r.violations),
           r.diagnostic});
    rows.push_back({{"shift", r.shift},
                    {"lambda1", r.lambda1},
                    {"regime", r.regime},
                    {"witness_found", r.witness_found},
                    {"witness_confirmed", r.witness_confirmed},
                    {"rho", r.witness_rho},
                    {"admissible", r.admissible},
                    {"positive", r.positive},
                    {"attempts", r.attempts},
                    {"violations", r.violations},
                    {"diagnostic", r.diagnostic}});
    auto dump = [&](const std::string& stem, const Candidate& u) {
      field_csv(ctx, stem + "_" + std::to_string(i) + ".csv", base.grid(), u.values, u.time(1));
    };
    if (r.offending) dump("offending", *r.offending);
    if (r.witness) dump("witness", *r.witness);
  }
  ctx.results["lambda1_base"] = l0;
  ctx.results["rows"] = rows;
  ctx.results["violations"] = table.violations;
  ctx.file("equivalence.csv", w);
  ctx.check("no_violations", table.passed, table.violations);
}

inline void run_consistency(RunContext& ctx) {
  const Problem& p = ctx.problem;
  ConsistencyOptions co;
  co.nodes_per_support = ctx.cfg.real("nodes_per_support");
  auto rep = laplacian_consistency(problem_grid(p), p.kernel, ctx.cfg.list("consistency_sigmas"),
                                   builtin_smooth_field(ctx.cfg.text("field")), co);
  CsvWriter w({"sigma", "h", "error"});
  for (std::size_t i = 0; i < rep.sigma.size(); ++i) w.row({rep.sigma[i], rep.spacing[i], rep.error[i]});
  ctx.file("consistency.csv", w);
  ctx.results["orders"] = rep.orders;
  ctx.results["min_order"] = rep.min_order;
  ctx.results["second_moment"] = rep.second_moment;
  const double order_min = ctx.tol("order_min", ctx.cfg.real("order_min"));
  ctx.check("order", rep.min_order >= order_min, rep.min_order, "order_min");
}

inline void run_hypotheses(RunContext& ctx) {
  auto inst = instantiate(ctx.problem);
  auto rep = check_hypotheses(ctx.problem.kernel, inst.f);
  auto arr = nlohmann::ordered_json::array();
  CsvWriter w({"check", "passed", "detail"});
  for (const auto& c : rep.checks) {
    nlohmann::ordered_json j{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
    if (c.witness) j["witness"] = {{"t", c.witness->t}, {"x", c.witness->x.x}, {"y", c.witness->x.y}, {"s", c.witness->s}};
    arr.push_back(std::move(j));
    w.row({c.name, c.passed, c.detail});
  }
  ctx.results["checks"] = arr;
  ctx.results["sup_bound"] = num(rep.sup_bound);
  ctx.file("hypotheses.csv", w);
  for (const auto& c : rep.checks) ctx.check(c.name, c.passed);
}

}  // namespace detail

/// Runs one experiment. Configuration problems propagate as ConfigError or
/// PreconditionError, numerical failures as SolverError; assertion failures
/// only set exit_code.
inline RunResult run(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  detail::RunContext ctx(cfg, problem_from_config(cfg));
  ctx.threads = std::max(1, opt.threads);
  ctx.seed = opt.seed ? *opt.seed : cfg.integer("seed");
  const std::string kind = cfg.kind();
  if (kind == "eigen") detail::run_eigen(ctx);
  else if (kind == "periodic-solution") detail::run_periodic(ctx);
  else if (kind == "sweep-D") detail::run_sweep_D(ctx);
  else if (kind == "sweep-sigma") detail::run_sweep_sigma(ctx);
  else if (kind == "critical-sigma") detail::run_critical_sigma(ctx);
  else if (kind == "maxprin") detail::run_maxprin(ctx);
  else if (kind == "consistency") detail::run_consistency(ctx);
  else if (kind == "hypotheses") detail::run_hypotheses(ctx);
  else throw ConfigError("unknown experiment kind '" + kind + "'");

  RunResult res;
  bool all = true;
  for (const auto& a : ctx.assertions) all = all && a["passed"].get<bool>();
  res.exit_code = all ? exit_ok : exit_assertion;
  std::string canonical = cfg.canonical() + "seed=" + std::to_string(ctx.seed) + "\n";
  nlohmann::ordered_json prov;
  prov["tool"] = "nlkpp";
  prov["version"] = kVersion;
  prov["config_hash"] = "fnv1a64:" + hex64(fnv1a(canonical));
  prov["seed"] = ctx.seed;
  prov["config"] = cfg.explicit_values();
  prov["tolerances"] = ctx.tolerances;
  res.summary["experiment"] = kind;
  res.summary["passed"] = all;
  res.summary["assertions"] = ctx.assertions;
  res.summary["results"] = ctx.results;
  res.summary["provenance"] = prov;
  res.files = std::move(ctx.files);
  return res;
}

/// Kernels, expression grammar, reaction families and experiment kinds.
inline void list_builtins(std::ostream& os) {
  os << "kernels:\n"
     << "  triangular  J(z) = c (1 - |z|), support radius 1\n"
     << "  uniform     J(z) = c on |z| <= 1\n"
     << "  cosine      J(z) = c (1 + cos(pi |z|)), support radius 1\n"
     << "  custom      kernel_expr in z, r = |z|; kernel_radius; normalized to unit mass\n"
     << "expressions:\n"
     << "  numbers, + - * / ^, parentheses; variables t, x, y (kernels: z, r)\n"
     << "  constants pi, e, T\n"
     << "  functions";
  for (const auto& f : Expression::function_names()) os << ' ' << f;
  os << "\n"
     << "nonlinearities:\n"
     << "  logistic    f = u (a(t,x) - b(t,x) u), keys a, b\n"
     << "  linear      f = a(t,x) u, key a\n"
     << "experiments:\n";
  for (const auto& k : experiment_kinds()) os << "  " << k << '\n';
  os << "config keys:\n";
  for (const auto& k : config_schema()) {
    os << "  " << k.name;
    if (!k.fallback.empty()) os << " [" << k.fallback << "]";
    os << "  " << k.help << '\n';
  }
}

}  // namespace nlkpp
