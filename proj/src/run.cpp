#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>

#include "qcurv/axisym_solver.hpp"
#include "qcurv/diagnostics.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/oracle2d.hpp"
#include "qcurv/radial_solver.hpp"
#include "qcurv/run.hpp"

namespace qcurv {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name);
    if (!os) throw std::ios_base::failure("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return os;
  }

  const fs::path& dir() const { return dir_; }
  std::vector<std::string>& files() { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_rows(std::ostream& os, const std::string& header, std::size_t rows,
                const std::function<void(std::size_t, std::vector<double>&)>& row) {
  os << header << '\n';
  std::vector<double> values;
  for (std::size_t i = 0; i < rows; ++i) {
    values.clear();
    row(i, values);
    for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << fmt(values[k]);
    os << '\n';
  }
}

void write_profile(std::ostream& os, const RadialSolution& s) {
  write_rows(os, "r,v,u,density", s.grid.size(), [&](std::size_t i, std::vector<double>& out) {
    out = {s.grid.nodes[i], s.v[i], s.u[i], s.density[i]};
  });
}

struct Context {
  const RunConfig& cfg;
  Artifacts files;
  std::ofstream trace;
  std::unique_ptr<KernelCache> cache;
  json result = json::object();
  bool success = false;
  std::string reason = "ok";

  explicit Context(const RunConfig& c) : cfg(c), files(c.out_dir) {
    trace = files.open("trace.log");
    trace << "# label iteration residual c_v w0 damping\n";
    cache = c.kernel_cache ? std::make_unique<KernelCache>(*c.kernel_cache) : std::make_unique<KernelCache>();
  }

  SolverConfig solver(const std::string& label) {
    SolverConfig s;
    s.damping = cfg.damping;
    s.tol = cfg.tol;
    s.max_iter = cfg.max_iter;
    s.trace = [this, label](const TraceRecord& r) {
      trace << label << ' ' << r.iteration << ' ' << fmt(r.residual) << ' ' << fmt(r.c_v) << ' ' << fmt(r.w0) << ' '
            << fmt(r.damping) << '\n';
    };
    return s;
  }

  RadialGrid radial_grid(const ProblemParams& p) const {
    return build_radial_grid(p, GridSpec{cfg.nodes, cfg.r_max, cfg.grading});
  }
};

json convergence_json(const RadialSolution& s) {
  return {{"converged", s.converged},         {"status", to_string(s.status)},
          {"iterations", s.iterations},       {"residual_sup", num(s.residual_sup)},
          {"update_sup", num(s.update_sup)},  {"damping", num(s.damping)},
          {"c_v", num(s.c_v)},                {"w0", num(s.w0())}};
}

json grid_json(const RadialGrid& g) {
  return {{"nodes", g.size()},
          {"r_max", g.r_max},
          {"grading_exponent", g.grading_exponent},
          {"panel_order", g.panel_order},
          {"resolution_radius", g.resolution_radius()}};
}

json diagnostics_json(const DiagnosticsReport& d) {
  return {{"lambda_measured", d.lambda_measured},
          {"beta_estimate", d.beta_estimate},
          {"beta_expected", d.beta_expected},
          {"fit_window", {d.fit_lo, d.fit_hi}},
          {"window_density_ratio", d.window_density_ratio},
          {"pohozaev_lhs", d.pohozaev_lhs},
          {"pohozaev_rhs", d.pohozaev_rhs},
          {"pohozaev_residual", d.pohozaev_residual},
          {"pohozaev_relative", d.pohozaev_relative},
          {"pohozaev_mu_term", d.pohozaev_mu_term},
          {"lower_bound_violations", d.lower_bound_violations}};
}

json pohozaev_json(const PohozaevResult& p) {
  return {{"lambda", p.lambda},     {"lhs", p.lhs},           {"rhs", p.rhs},
          {"mu_term", p.mu_term},   {"residual", p.residual}, {"relative_residual", p.relative_residual}};
}

// Solves the configured radial problem, writes profile.csv and the common report parts.
std::optional<RadialSolution> solve_radial_into(Context& ctx) {
  const ProblemParams p = ctx.cfg.params();
  const RadialGrid grid = ctx.radial_grid(p);
  RadialSolution s = solve_fixed_point(p, grid, ctx.solver("solve"), ctx.cache.get());
  auto os = ctx.files.open("profile.csv");
  write_profile(os, s);
  ctx.result["grid"] = grid_json(grid);
  ctx.result["convergence"] = convergence_json(s);
  ctx.success = s.converged;
  ctx.reason = to_string(s.status);
  if (s.converged) {
    try {
      ctx.result["diagnostics"] = diagnostics_json(diagnose_radial(s));
    } catch (const DiagnosticError& e) {
      ctx.result["diagnostics"] = {{"error", e.what()}};
    }
  }
  return s;
}

void run_solve_radial(Context& ctx) { solve_radial_into(ctx); }

void run_sweep(Context& ctx) {
  const ProblemParams base(ctx.cfg.n, ctx.cfg.alpha, 1.0, ctx.cfg.resolved_mu());
  const RadialGrid grid = ctx.radial_grid(base);
  const double crit = critical_lambda(base.n(), base.alpha());
  std::vector<double> lambdas;
  for (double f : ctx.cfg.fractions) lambdas.push_back(f * crit);

  std::vector<SweepStep> steps;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    // Run the sweep one step at a time so each step gets its own trace label.
    SolverConfig step_cfg = ctx.solver("step" + std::to_string(k));
    if (!steps.empty() && steps.back().converged()) step_cfg.initial_v = steps.back().solution->v;
    const double one[] = {lambdas[k]};
    auto out = continuation_sweep(base, one, grid, step_cfg, ctx.cache.get());
    steps.push_back(std::move(out.front()));
  }

  json rows = json::array();
  auto summary = ctx.files.open("sweep_summary.csv");
  summary << "lambda,w0,residual,converged\n";
  bool all = true;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const SweepStep& st = steps[k];
    char name[32];
    std::snprintf(name, sizeof name, "sweep_%03zu.csv", k);
    json row{{"lambda", st.lambda}, {"fraction", ctx.cfg.fractions[k]}, {"file", nullptr}};
    if (st.solution) {
      auto os = ctx.files.open(name);
      write_profile(os, *st.solution);
      row["file"] = name;
      row["convergence"] = convergence_json(*st.solution);
      summary << fmt(st.lambda) << ',' << fmt(st.solution->w0()) << ',' << fmt(st.solution->residual_sup) << ','
              << (st.converged() ? 1 : 0) << '\n';
    } else {
      summary << fmt(st.lambda) << ",nan,nan,0\n";
    }
    if (!st.error.empty()) row["error"] = st.error;
    all = all && st.converged();
    rows.push_back(row);
  }
  ctx.result["grid"] = grid_json(grid);
  ctx.result["steps"] = rows;
  try {
    const NormalProfile np = extract_normal_solution(steps);
    auto os = ctx.files.open("normal_profile.csv");
    write_rows(os, "x,eta", np.profile.grid.size() + 1, [&](std::size_t i, std::vector<double>& out) {
      out = i == 0 ? std::vector<double>{0.0, 0.0}
                   : std::vector<double>{np.profile.grid.nodes[i - 1], np.profile.eta[i - 1]};
    });
    ctx.result["normal_solution"] = {{"lambda_source", np.lambda_source},
                                     {"source_peak", np.profile.source_peak},
                                     {"r_k", np.profile.r_k},
                                     {"total_curvature", np.total_curvature},
                                     {"critical_lambda", crit},
                                     {"relative_deviation", np.total_curvature / crit - 1.0},
                                     {"c", np.c},
                                     {"normality_residual", np.normality_residual}};
  } catch (const DiagnosticError& e) {
    ctx.result["normal_solution"] = {{"error", e.what()}};
  }
  ctx.success = all;
  ctx.reason = all ? "ok" : "not_converged";
}

void run_solve_axisym(Context& ctx) {
  const ProblemParams p = ctx.cfg.params();
  AxisymConfig ac;
  ac.radial_nodes = ctx.cfg.nodes;
  ac.angular_nodes = ctx.cfg.angular_nodes;
  ac.r_max = ctx.cfg.r_max;
  ac.grading = ctx.cfg.grading;
  ac.damping = ctx.cfg.damping;
  ac.tol = ctx.cfg.tol;
  ac.max_iter = ctx.cfg.max_iter;
  ac.tilt = ctx.cfg.tilt;
  ac.trace = ctx.solver("axisym").trace;
  const AxisymField f = solve_axisym(p, ac);
  const AxisymGrid& g = f.grid;
  auto os = ctx.files.open("field.csv");
  write_rows(os, "x1,rho,v,u,density", g.size(), [&](std::size_t j, std::vector<double>& out) {
    const std::size_t i = j / g.angular_size();
    const std::size_t k = j % g.angular_size();
    out = {g.x1(i, k), g.rho(i, k), f.v[j], f.u[j], f.density[j]};
  });
  const TiltedPohozaev tp = tilted_pohozaev(f);
  ctx.result["grid"] = {{"radial", grid_json(g.radial)}, {"angular_nodes", g.angular_size()}};
  ctx.result["convergence"] = {{"converged", f.converged}, {"status", to_string(f.status)},
                               {"iterations", f.iterations}, {"residual_sup", num(f.residual_sup)},
                               {"damping", f.damping},       {"c_v", num(f.c_v)}};
  ctx.result["axisym"] = {{"lambda", p.lambda()},          {"lambda_over_lambda1", p.lambda() / lambda_1(p.n())},
                          {"supercritical", p.lambda() > critical_lambda(p.n(), p.alpha())},
                          {"v_star", num(f.v_star)},       {"c_v", num(f.c_v)},
                          {"residual", num(f.residual_sup)}, {"volume", num(f.volume)},
                          {"volume_error", num(std::abs(f.volume - p.lambda()) / p.lambda())},
                          {"asymmetry", num(f.asymmetry)}, {"norm", num(f.norm)},
                          {"tail_ratio", num(f.tail_ratio)}, {"tilt", f.tilt}};
  ctx.result["tilted_pohozaev"] = {{"lambda", num(tp.lambda)},         {"lhs", num(tp.lhs)},
                                   {"rhs", num(tp.rhs)},               {"alpha_term", num(tp.alpha_term)},
                                   {"gaussian_term", num(tp.gaussian_term)}, {"tilt_term", num(tp.tilt_term)},
                                   {"residual", num(tp.residual)},     {"relative_residual", num(tp.relative_residual)}};
  ctx.success = f.converged;
  ctx.reason = to_string(f.status);
}

// Explicit n = 2 radial member with the normal potential u - c as v.
void write_oracle_profile(Context& ctx, const OracleProfile& p, double c) {
  auto os = ctx.files.open("profile.csv");
  write_rows(os, "r,v,u,density", p.grid.size(), [&](std::size_t i, std::vector<double>& out) {
    out = {p.grid.nodes[i], p.u[i] - c, p.u[i], p.density[i]};
  });
}

ExplicitSolution2D oracle_of(const RunConfig& c) { return {c.alpha, c.lambda_scale, c.zeta}; }

void run_poho_check(Context& ctx) {
  if (ctx.cfg.n == 2 && ctx.cfg.resolved_mu() == 0.0) {
    const ExplicitSolution2D sol = oracle_of(ctx.cfg);
    const OracleProfile p = oracle_profile(sol, ctx.cfg.nodes);
    const NormalityFit fit = normality_fit(p.u, p.density, p.grid, 2, 5.0);
    write_oracle_profile(ctx, p, fit.c);
    ctx.result["pohozaev"] = pohozaev_json(pohozaev_residual(p.u, WeightSpec(sol.alpha, 0.0), 2, p.grid));
    ctx.result["profile_source"] = "explicit";
    ctx.success = true;
    return;
  }
  const auto s = solve_radial_into(ctx);
  ctx.result["profile_source"] = "solver";
  if (s && s->converged) {
    std::vector<double> eta(s->v.size());
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = s->v[i] + s->c_v;
    const PohozaevResult pr = pohozaev_residual(eta, WeightSpec(s->params.alpha(), s->params.mu()), s->params.n(), s->grid);
    json j = pohozaev_json(pr);
    j["strict"] = pr.mu_term > 0.0;
    ctx.result["pohozaev"] = j;
  }
}

void run_asymptotics(Context& ctx) {
  const RadialGrid* grid = nullptr;
  std::vector<double> v;
  double lambda = 0.0;
  OracleProfile op;
  std::optional<RadialSolution> s;
  int n = ctx.cfg.n;
  if (n == 2 && ctx.cfg.resolved_mu() == 0.0) {
    const ExplicitSolution2D sol = oracle_of(ctx.cfg);
    op = oracle_profile(sol, ctx.cfg.nodes);
    const NormalityFit fit = normality_fit(op.u, op.density, op.grid, 2, 5.0);
    write_oracle_profile(ctx, op, fit.c);
    grid = &op.grid;
    for (double u : op.u) v.push_back(u - fit.c);
    lambda = integrate_radial(op.density, op.grid, 2);
    ctx.result["profile_source"] = "explicit";
    ctx.success = true;
  } else {
    s = solve_radial_into(ctx);
    ctx.result["profile_source"] = "solver";
    if (!s || !s->converged) return;
    grid = &s->grid;
    v = shifted_potential(s->v, s->density, s->grid, n);
    lambda = integrate_radial(s->density, s->grid, n);
  }
  const double lo = ctx.cfg.fit_lo.value_or(n == 2 && !s ? 10.0 : 0.3 * grid->r_max);
  const double hi = ctx.cfg.fit_hi.value_or(n == 2 && !s ? 50.0 : 0.8 * grid->r_max);
  const double beta = log_slope(v, *grid, lo, hi);
  const double expected = lambda / gamma_n(n);
  ctx.result["asymptotics"] = {{"lambda_measured", lambda},
                               {"beta_estimate", beta},
                               {"beta_expected", expected},
                               {"relative_deviation", beta / expected - 1.0},
                               {"fit_window", {lo, hi}},
                               {"lower_bound_violations", lower_bound_check(v, *grid, expected)}};
}

void run_oracle2d(Context& ctx) {
  const ExplicitSolution2D sol = oracle_of(ctx.cfg);
  Oracle2DGridSpec spec;
  spec.radial_nodes = ctx.cfg.nodes;
  spec.angular_nodes = ctx.cfg.angular_nodes;
  const CurvatureResult tc = total_curvature(sol, spec);
  const double expected = 4.0 * std::numbers::pi * (1.0 + sol.alpha);
  json j{{"alpha", sol.alpha},
         {"lambda_scale", sol.lambda_scale},
         {"zeta", {sol.zeta.real(), sol.zeta.imag()}},
         {"lambda_measured", tc.value},
         {"lambda_expected", expected},
         {"abs_error", std::abs(tc.value - expected)},
         {"refinement_disagreement", tc.disagreement}};
  if (sol.radial()) {
    const OracleProfile p = oracle_profile(sol, ctx.cfg.nodes);
    const NormalityFit fit = normality_fit(p.u, p.density, p.grid, 2, 5.0);
    write_oracle_profile(ctx, p, fit.c);
    j["normality_residual"] = fit.residual;
    j["normality_constant"] = fit.c;
    j["pohozaev"] = pohozaev_json(pohozaev_residual(p.u, WeightSpec(sol.alpha, 0.0), 2, p.grid));
  }
  ctx.result["oracle"] = j;
  ctx.success = true;
}

void run_threshold_scan(Context& ctx) {
  const ProblemParams base(ctx.cfg.n, ctx.cfg.alpha, 1.0, ctx.cfg.resolved_mu());
  const RadialGrid grid = ctx.radial_grid(base);
  ThresholdScan scan;
  scan.threshold = critical_lambda(base.n(), base.alpha());
  scan.beyond_proposition = base.n() != 3 && base.n() != 4;
  for (std::size_t k = 0; k < ctx.cfg.fractions.size(); ++k) {
    const double one[] = {ctx.cfg.fractions[k]};
    ThresholdScan part = threshold_scan(base, one, grid, ctx.solver("scan" + std::to_string(k)), ctx.cache.get());
    scan.rows.push_back(part.rows.front());
  }
  // Recompute the bracket over all rows.
  scan.consistent = !scan.rows.empty();
  for (const auto& row : scan.rows) {
    if (row.lambda < scan.threshold) {
      if (row.converged) scan.last_converged = std::max(scan.last_converged.value_or(row.lambda), row.lambda);
      else scan.consistent = false;
    } else {
      if (!row.converged) scan.first_failed = std::min(scan.first_failed.value_or(row.lambda), row.lambda);
      else scan.consistent = false;
    }
  }
  auto os = ctx.files.open("scan.csv");
  os << "lambda,fraction,converged,w0,residual,iterations,status\n";
  json rows = json::array();
  for (const auto& r : scan.rows) {
    os << fmt(r.lambda) << ',' << fmt(r.fraction) << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.w0) << ','
       << fmt(r.residual) << ',' << r.iterations << ',' << r.status << '\n';
    rows.push_back({{"lambda", r.lambda}, {"fraction", r.fraction}, {"converged", r.converged},
                    {"w0", num(r.w0)},    {"residual", num(r.residual)}, {"iterations", r.iterations},
                    {"status", r.status}});
  }
  json bracket{{"threshold", scan.threshold},
               {"last_converged", scan.last_converged ? json(*scan.last_converged) : json(nullptr)},
               {"first_failed", scan.first_failed ? json(*scan.first_failed) : json(nullptr)},
               {"consistent", scan.consistent},
               {"beyond_proposition", scan.beyond_proposition}};
  if (scan.last_converged && scan.first_failed)
    bracket["width_fraction"] = (*scan.first_failed - *scan.last_converged) / scan.threshold;
  ctx.result["grid"] = grid_json(grid);
  ctx.result["scan"] = rows;
  ctx.result["bracket"] = bracket;
  ctx.success = true;
}

std::string reason_for(const std::exception& e) {
  if (dynamic_cast<const BlowupSignal*>(&e)) return "blowup";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric_error";
  if (dynamic_cast<const DiagnosticError*>(&e)) return "diagnostic_error";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  if (dynamic_cast<const UsageError*>(&e)) return "usage_error";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition_error";
  if (dynamic_cast<const std::ios_base::failure*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
    return "io_error";
  return "internal_error";
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  Context ctx(cfg);
  json j;
  j["schema_version"] = 1;
  j["program"] = "qcurv";
  j["command"] = to_string(cfg.command);
  j["config"] = cfg.echo();
  j["constants"] = {{"n", cfg.n},
                    {"gamma_n", gamma_n(cfg.n)},
                    {"lambda_1", lambda_1(cfg.n)},
                    {"critical_lambda", critical_lambda(cfg.n, cfg.alpha)}};
  std::string message;
  try {
    switch (cfg.command) {
      case Command::solve_radial: run_solve_radial(ctx); break;
      case Command::sweep: run_sweep(ctx); break;
      case Command::solve_axisym: run_solve_axisym(ctx); break;
      case Command::poho_check: run_poho_check(ctx); break;
      case Command::asymptotics: run_asymptotics(ctx); break;
      case Command::oracle2d: run_oracle2d(ctx); break;
      case Command::threshold_scan: run_threshold_scan(ctx); break;
    }
  } catch (const std::exception& e) {
    ctx.success = false;
    ctx.reason = reason_for(e);
    message = e.what();
  }
  ctx.trace.close();
  if (ctx.cache && cfg.kernel_cache)
    ctx.result["kernel_cache"] = {{"assembled", ctx.cache->assembled()}, {"hits", ctx.cache->hits()}};

  j["status"] = ctx.success ? "ok" : "failed";
  j["reason"] = ctx.success ? "ok" : ctx.reason;
  if (!message.empty()) j["message"] = message;
  j["result"] = ctx.result;
  j["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  ctx.files.files().push_back("report.json");
  j["artifacts"] = ctx.files.files();
  {
    std::ofstream os(ctx.files.dir() / "report.json");
    os << j.dump(2) << '\n';
  }
  report.json = std::move(j);
  report.exit_code = ctx.success ? 0 : 1;
  report.reason = report.json["reason"];
  report.artifacts = ctx.files.files();
  return report;
}

int cli_main(int argc, char** argv) {
  RunConfig cfg;
  try {
    cfg = parse_and_validate(std::vector<std::string>(argv, argv + argc));
  } catch (const HelpRequested& h) {
    std::cout << h.text;
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "qcurv: " << e.what() << "\nusage: qcurv <command> [options], see --help\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qcurv: " << e.what() << '\n';
    return 2;
  }
  try {
    const RunReport r = run(cfg);
    std::cout << to_string(cfg.command) << ": " << r.reason << " (" << (cfg.out_dir / "report.json").string() << ")\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "qcurv: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qcurv
