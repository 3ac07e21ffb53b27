#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcurv/errors.hpp"
#include "qcurv/run.hpp"

namespace qcurv {

namespace {

using nlohmann::json;

const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> table{
      {"solve-radial", Command::solve_radial}, {"sweep", Command::sweep},
      {"solve-axisym", Command::solve_axisym}, {"poho-check", Command::poho_check},
      {"asymptotics", Command::asymptotics},   {"oracle2d", Command::oracle2d},
      {"threshold-scan", Command::threshold_scan},
  };
  return table;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

std::complex<double> parse_zeta(const std::string& text) {
  const std::vector<double> parts = parse_list(text);
  if (parts.size() > 2) throw UsageError("--zeta takes 're' or 're,im'");
  return {parts[0], parts.size() == 2 ? parts[1] : 0.0};
}

template <class T>
T take(const json& section, const char* key, const std::string& where) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: " + where + "." + key + " has the wrong type");
  }
}

bool needs_lambda(Command c) {
  return c == Command::solve_radial || c == Command::solve_axisym || c == Command::poho_check ||
         c == Command::asymptotics;
}

// poho-check and asymptotics on the explicit n = 2 family instead of a solve.
bool oracle_backed(const RunConfig& c) { return c.n == 2 && c.mu && *c.mu == 0.0; }

void validate(RunConfig& c) {
  if (c.command == Command::oracle2d) {
    if (c.provenance.count("n") && c.provenance["n"] != Source::fallback && c.n != 2)
      throw UsageError("oracle2d works in dimension n = 2");
    c.n = 2;
    c.provenance["n"] = Source::derived;
  }
  if (c.n < 2) throw UsageError("n must be at least 2");
  if (!(c.alpha > -1.0) || !std::isfinite(c.alpha)) throw UsageError("alpha must exceed -1");
  const int given = (c.lambda ? 1 : 0) + (c.lambda_frac ? 1 : 0) + (c.lambda_frac_l1 ? 1 : 0);
  if (given > 1) throw UsageError("give at most one of --lambda, --lambda-frac, --lambda-frac-l1");
  if (needs_lambda(c.command) && !oracle_backed(c) && given == 0)
    throw UsageError(std::string(to_string(c.command)) + " needs --lambda, --lambda-frac or --lambda-frac-l1");
  if (given == 1 && !(c.resolved_lambda() > 0.0)) throw UsageError("Lambda must be positive");
  if (c.mu && !(*c.mu >= 0.0)) throw UsageError("mu must be >= 0");
  if (c.mu && *c.mu == 0.0 && c.command != Command::oracle2d && !oracle_backed(c))
    throw UsageError("mu = 0 is only available for the n = 2 explicit family");
  if (c.nodes == 0 || c.angular_nodes == 0) throw UsageError("node counts must be positive");
  if (c.r_max && !(*c.r_max > 1.0)) throw UsageError("r_max must exceed 1");
  if (c.grading && !(*c.grading >= 1.0)) throw UsageError("grading must be >= 1");
  if (!(c.damping > 0.0 && c.damping <= 1.0)) throw UsageError("damping must lie in (0, 1]");
  if (!(c.tol > 0.0)) throw UsageError("tol must be positive");
  if (c.max_iter == 0) throw UsageError("max_iter must be positive");
  if (!(c.lambda_scale > 0.0)) throw UsageError("lambda_scale must be positive");
  if (c.zeta != std::complex<double>{} && !(c.alpha >= 0.0 && std::floor(c.alpha) == c.alpha))
    throw UsageError("a nonzero zeta needs alpha to be a nonnegative integer");
  for (double f : c.fractions)
    if (!(f > 0.0)) throw UsageError("fractions must be positive");
  if (c.command == Command::sweep) {
    for (std::size_t i = 0; i < c.fractions.size(); ++i) {
      if (!(c.fractions[i] < 1.0)) throw UsageError("sweep fractions must stay below 1");
      if (i > 0 && !(c.fractions[i] > c.fractions[i - 1])) throw UsageError("sweep fractions must increase");
    }
  }
  if (c.command == Command::solve_axisym) {
    if (c.n < 3) throw UsageError("solve-axisym needs n >= 3");
    if (!(c.resolved_lambda() < lambda_1(c.n))) throw UsageError("solve-axisym needs Lambda < Lambda_1");
    if (c.resolved_mu() != c.n) throw UsageError("solve-axisym uses mu = n");
  }
  if (c.fit_lo && c.fit_hi && !(*c.fit_hi > *c.fit_lo)) throw UsageError("fit window must have fit_hi > fit_lo");
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& [name, cmd] : command_table())
    if (cmd == c) return name.c_str();
  return "unknown";
}

Command parse_command(const std::string& name) {
  const auto it = command_table().find(name);
  if (it == command_table().end()) throw UsageError("unknown command '" + name + "'");
  return it->second;
}

const char* to_string(Source s) {
  switch (s) {
    case Source::fallback: return "default";
    case Source::config: return "config";
    case Source::flag: return "flag";
    case Source::derived: return "derived";
  }
  return "unknown";
}

double RunConfig::resolved_lambda() const {
  if (lambda) return *lambda;
  if (lambda_frac) return *lambda_frac * critical_lambda(n, alpha);
  if (lambda_frac_l1) return *lambda_frac_l1 * lambda_1(n);
  return 0.0;
}

ProblemParams RunConfig::params() const { return {n, alpha, resolved_lambda(), resolved_mu()}; }

json RunConfig::echo() const {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  json values{
      {"command", to_string(command)},
      {"n", n},
      {"alpha", alpha},
      {"lambda", opt(lambda)},
      {"lambda_frac", opt(lambda_frac)},
      {"lambda_frac_l1", opt(lambda_frac_l1)},
      {"mu", resolved_mu()},
      {"fractions", fractions},
      {"lambda_scale", lambda_scale},
      {"zeta", json::array({zeta.real(), zeta.imag()})},
      {"tilt", tilt},
      {"nodes", nodes},
      {"r_max", opt(r_max)},
      {"grading", opt(grading)},
      {"angular_nodes", angular_nodes},
      {"damping", damping},
      {"tol", tol},
      {"max_iter", max_iter},
      {"fit_lo", opt(fit_lo)},
      {"fit_hi", opt(fit_hi)},
      {"dir", out_dir.string()},
      {"kernel_cache", kernel_cache ? json(kernel_cache->string()) : json(nullptr)},
  };
  json out = json::object();
  for (auto& [key, value] : values.items()) {
    const auto it = provenance.find(key);
    out[key] = {{"value", value}, {"source", to_string(it == provenance.end() ? Source::fallback : it->second)}};
  }
  const double lam = resolved_lambda();
  out["lambda_resolved"] = {{"value", lam > 0.0 ? json(lam) : json(nullptr)}, {"source", "derived"}};
  return out;
}

void apply_config_json(const json& doc, RunConfig& c) {
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  auto mark = [&](const char* key) { c.provenance[key] = Source::config; };
  for (const auto& [section, body] : doc.items()) {
    if (section == "command") {
      if (!body.is_string()) throw UsageError("config: command must be a string");
      c.command = parse_command(body.get<std::string>());
      mark("command");
      continue;
    }
    if (section != "problem" && section != "grid" && section != "solver" && section != "output")
      throw UsageError("config: unknown section '" + section + "'");
    if (!body.is_object()) throw UsageError("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const char* k = key.c_str();
      const std::string& s = section;
      if (s == "problem" && key == "n") c.n = take<int>(body, k, s);
      else if (s == "problem" && key == "alpha") c.alpha = take<double>(body, k, s);
      else if (s == "problem" && key == "lambda") c.lambda = take<double>(body, k, s);
      else if (s == "problem" && key == "lambda_frac") c.lambda_frac = take<double>(body, k, s);
      else if (s == "problem" && key == "lambda_frac_l1") c.lambda_frac_l1 = take<double>(body, k, s);
      else if (s == "problem" && key == "mu") c.mu = take<double>(body, k, s);
      else if (s == "problem" && key == "fractions") c.fractions = take<std::vector<double>>(body, k, s);
      else if (s == "problem" && key == "lambda_scale") c.lambda_scale = take<double>(body, k, s);
      else if (s == "problem" && key == "tilt") c.tilt = take<bool>(body, k, s);
      else if (s == "problem" && key == "zeta") {
        const auto z = take<std::vector<double>>(body, k, s);
        if (z.empty() || z.size() > 2) throw UsageError("config: problem.zeta must be [re] or [re, im]");
        c.zeta = {z[0], z.size() == 2 ? z[1] : 0.0};
      } else if (s == "grid" && key == "nodes") c.nodes = take<std::size_t>(body, k, s);
      else if (s == "grid" && key == "r_max") c.r_max = take<double>(body, k, s);
      else if (s == "grid" && key == "grading") c.grading = take<double>(body, k, s);
      else if (s == "grid" && key == "angular_nodes") c.angular_nodes = take<std::size_t>(body, k, s);
      else if (s == "solver" && key == "damping") c.damping = take<double>(body, k, s);
      else if (s == "solver" && key == "tol") c.tol = take<double>(body, k, s);
      else if (s == "solver" && key == "max_iter") c.max_iter = take<std::size_t>(body, k, s);
      else if (s == "solver" && key == "fit_lo") c.fit_lo = take<double>(body, k, s);
      else if (s == "solver" && key == "fit_hi") c.fit_hi = take<double>(body, k, s);
      else if (s == "output" && key == "dir") c.out_dir = take<std::string>(body, k, s);
      else if (s == "output" && key == "kernel_cache") c.kernel_cache = take<std::string>(body, k, s);
      else throw UsageError("config: unknown key '" + s + "." + key + "'");
      mark(key == "dir" ? "dir" : k);
    }
  }
}

RunConfig parse_and_validate(const std::vector<std::string>& argv) {
  CLI::App app{"Radial and axisymmetric solutions of (-Delta)^{n/2} u = |x|^{n alpha} e^{n u}", "qcurv"};
  std::string command;
  int n = 0;
  double alpha = 0, lambda = 0, lambda_frac = 0, lambda_frac_l1 = 0, mu = 0, lambda_scale = 0;
  double r_max = 0, grading = 0, damping = 0, tol = 0, fit_lo = 0, fit_hi = 0;
  std::size_t nodes = 0, angular = 0, max_iter = 0;
  std::string fractions, zeta, out, cache, config;
  bool no_tilt = false;

  app.add_option("command", command, "one of solve-radial, sweep, solve-axisym, poho-check, asymptotics, "
                                     "oracle2d, threshold-scan")
      ->required();
  std::map<std::string, CLI::Option*> opts;
  opts["n"] = app.add_option("--n", n, "dimension");
  opts["alpha"] = app.add_option("--alpha", alpha, "cone exponent, > -1");
  opts["lambda"] = app.add_option("--lambda", lambda, "total curvature");
  opts["lambda_frac"] = app.add_option("--lambda-frac", lambda_frac, "total curvature as a fraction of Lambda_1 (1+alpha)");
  opts["lambda_frac_l1"] = app.add_option("--lambda-frac-l1", lambda_frac_l1, "total curvature as a fraction of Lambda_1");
  opts["mu"] = app.add_option("--mu", mu, "Gaussian exponent of the weight (default n)");
  opts["fractions"] = app.add_option("--fractions", fractions, "comma-separated fractions of Lambda_1 (1+alpha)");
  opts["lambda_scale"] = app.add_option("--lambda-scale", lambda_scale, "lambda of the explicit n = 2 family");
  opts["zeta"] = app.add_option("--zeta", zeta, "offset of the explicit family, 're' or 're,im'");
  opts["tilt"] = app.add_flag("--no-tilt", no_tilt, "drop the v* x_1 term in solve-axisym");
  opts["nodes"] = app.add_option("--nodes", nodes, "radial nodes");
  opts["r_max"] = app.add_option("--r-max", r_max, "truncation radius");
  opts["grading"] = app.add_option("--grading", grading, "power grading exponent on (0, 1]");
  opts["angular_nodes"] = app.add_option("--angular-nodes", angular, "angular nodes for solve-axisym and oracle2d");
  opts["damping"] = app.add_option("--damping", damping, "initial damping in (0, 1]");
  opts["tol"] = app.add_option("--tol", tol, "residual tolerance");
  opts["max_iter"] = app.add_option("--max-iter", max_iter, "iteration cap");
  opts["fit_lo"] = app.add_option("--fit-lo", fit_lo, "inner radius of the slope fit window");
  opts["fit_hi"] = app.add_option("--fit-hi", fit_hi, "outer radius of the slope fit window");
  opts["dir"] = app.add_option("--out", out, "output directory");
  opts["kernel_cache"] = app.add_option("--kernel-cache", cache, "directory for persisted kernel matrices");
  app.add_option("--config", config, "JSON config file");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig c;
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw UsageError("cannot read config file '" + config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    apply_config_json(doc, c);
    c.config_file = config;
  }
  const Command from_file = c.command;
  const bool file_named_command = c.provenance.count("command") > 0;
  c.command = parse_command(command);
  if (file_named_command && from_file != c.command)
    c.provenance["command"] = Source::flag;
  else if (!file_named_command)
    c.provenance["command"] = Source::flag;

  auto given = [&](const char* key) {
    if (opts[key]->count() == 0) return false;
    c.provenance[key] = Source::flag;
    return true;
  };
  if (given("n")) c.n = n;
  if (given("alpha")) c.alpha = alpha;
  if (given("lambda") || given("lambda_frac") || given("lambda_frac_l1")) {
    // A flag-given Lambda replaces whichever form the config file used.
    c.lambda.reset();
    c.lambda_frac.reset();
    c.lambda_frac_l1.reset();
    if (opts["lambda"]->count()) c.lambda = lambda;
    if (opts["lambda_frac"]->count()) {
      c.lambda_frac = lambda_frac;
      c.provenance["lambda_frac"] = Source::flag;
    }
    if (opts["lambda_frac_l1"]->count()) {
      c.lambda_frac_l1 = lambda_frac_l1;
      c.provenance["lambda_frac_l1"] = Source::flag;
    }
    for (const char* k : {"lambda", "lambda_frac", "lambda_frac_l1"})
      if (opts[k]->count() == 0) c.provenance.erase(k);
  }
  if (given("mu")) c.mu = mu;
  if (given("fractions")) c.fractions = parse_list(fractions);
  if (given("lambda_scale")) c.lambda_scale = lambda_scale;
  if (given("zeta")) c.zeta = parse_zeta(zeta);
  if (given("tilt")) c.tilt = !no_tilt;
  if (given("nodes")) c.nodes = nodes;
  if (given("r_max")) c.r_max = r_max;
  if (given("grading")) c.grading = grading;
  if (given("angular_nodes")) c.angular_nodes = angular;
  if (given("damping")) c.damping = damping;
  if (given("tol")) c.tol = tol;
  if (given("max_iter")) c.max_iter = max_iter;
  if (given("fit_lo")) c.fit_lo = fit_lo;
  if (given("fit_hi")) c.fit_hi = fit_hi;
  if (given("dir")) c.out_dir = out;
  if (given("kernel_cache")) c.kernel_cache = cache;

  if (c.command == Command::solve_axisym && !c.provenance.count("nodes")) {
    c.nodes = 128;
    c.provenance["nodes"] = Source::derived;
  }
  if (c.command == Command::oracle2d && !c.provenance.count("angular_nodes")) {
    c.angular_nodes = 256;
    c.provenance["angular_nodes"] = Source::derived;
  }
  if (c.fractions.empty() && (c.command == Command::sweep || c.command == Command::threshold_scan)) {
    c.fractions = c.command == Command::sweep
                      ? std::vector<double>{0.5, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999}
                      : std::vector<double>{0.90, 0.94, 0.97, 0.99, 1.01, 1.03, 1.06, 1.10};
    c.provenance["fractions"] = Source::derived;
  }
  validate(c);
  return c;
}

}  // namespace qcurv
