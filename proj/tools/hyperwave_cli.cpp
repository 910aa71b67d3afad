#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperwave/hyperwave.hpp"

namespace {

using json = nlohmann::json;
using namespace hyperwave;

enum Exit { kOk = 0, kInvalid = 2, kInconclusive = 3, kNumerical = 4 };

struct Options {
  std::string model_path;
  double tol = 1e-8;
  std::uint64_t seed = 42;
  double samples = 1e6;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;

  double t = 1.0;
  std::vector<double> x;
  int n = 1;
  double p = 0.0;
  bool dalang = false;
  std::string route = "all";
  double alpha = 0.5;
  double alpha0 = 0.5;
  std::vector<double> times{0.5, 2.0};
  int n_max = 3;
  double w_sup = 1.0;
  std::vector<double> grid_alpha0;
  std::vector<double> grid_alpha;
  std::vector<int> grid_dims;
};

struct Outcome {
  json result;
  std::string csv;
  int code = kOk;
};

std::uint64_t sample_count(double s) {
  require(s >= 1.0 && std::isfinite(s) && s < 1.8e19, "--samples must be a positive count");
  return static_cast<std::uint64_t>(std::llround(s));
}

rng::McConfig mc_config(const Options& o) {
  rng::McConfig cfg;
  cfg.seed = o.seed;
  cfg.samples = sample_count(o.samples);
  cfg.threads = o.threads;
  return cfg;
}

io::ModelDoc need_model(const Options& o) {
  if (o.model_path.empty()) throw io::ParseError("--model is required for this command");
  return io::read_model(o.model_path);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// key,value rows for the scalar leaves of a result
void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else {
    os << prefix << ',' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

std::string key_value_csv(const json& result) {
  std::ostringstream os;
  os << "key,value\n";
  flatten(result, "", os);
  return os.str();
}

json verdict_json(const condition::ConvergenceVerdict& v) { return io::to_json(v); }

Outcome check_condition(const Options& o) {
  const auto doc = need_model(o);
  Outcome out;
  const auto v = condition::condition_integral(doc.model, o.tol);
  out.result = verdict_json(v);
  out.result["alpha0"] = doc.model.alpha0;
  bool inconclusive = v.status == condition::Status::inconclusive;
  if (o.dalang) {
    const auto dv = condition::dalang_integral(doc.model, o.tol);
    out.result["dalang"] = verdict_json(dv);
    inconclusive = inconclusive || dv.status == condition::Status::inconclusive;
  }
  if (doc.model.alpha0 == 0.0) out.result["first_chaos_integral"] = verdict_json(condition::first_chaos_integral(doc.model, o.tol));
  if (inconclusive) out.code = kInconclusive;
  return out;
}

Outcome w_eval(const Options& o) {
  const auto doc = need_model(o);
  if (!doc.initial_data) throw io::ParseError("model has no initial_data");
  const int d = doc.model.measure.dimension();
  std::vector<double> x = o.x.empty() ? std::vector<double>(d, 0.0) : o.x;
  require(static_cast<int>(x.size()) == d, "--x has the wrong dimension");
  Outcome out;
  out.result = {{"t", o.t}, {"x", x}, {"value", wave::w_eval(*doc.initial_data, d, o.t, x, o.tol)}};
  return out;
}

Outcome first_chaos(const Options& o) {
  const auto doc = need_model(o);
  const chaos::ChaosKernelSpec spec(1, o.t, doc.model);
  const bool all = o.route == "all";
  Outcome out;
  out.result["t"] = o.t;
  out.result["alpha0"] = doc.model.alpha0;
  json routes = json::object();
  auto attempt = [&](const char* name, auto&& fn) {
    if (!all && o.route != name) return;
    try {
      routes[name] = io::to_json(fn());
    } catch (const Unsupported& e) {
      if (!all) throw;
      routes[name] = {{"unsupported", e.what()}};
    } catch (const InvalidParameter& e) {
      if (!all) throw;
      routes[name] = {{"unsupported", e.what()}};
    }
  };
  attempt("time", [&] { return chaos::first_chaos_norm_time(spec, o.tol); });
  attempt("fourier", [&] { return chaos::first_chaos_norm_fourier(spec, o.tol); });
  attempt("closed", [&] { return chaos::first_chaos_norm_closed_alpha0(spec, o.tol); });
  attempt("lower_bound", [&] { return chaos::first_chaos_lower_bound(spec, o.tol); });
  if (routes.empty()) throw InvalidParameter("unknown route '" + o.route + "'");
  out.result["routes"] = routes;
  if (routes.contains("time") && routes.contains("fourier") && routes["time"].contains("value") &&
      routes["fourier"].contains("value")) {
    const double a = routes["time"]["value"], b = routes["fourier"]["value"];
    out.result["route_relative_difference"] = std::abs(a - b) / std::abs(a);
  }
  std::ostringstream csv;
  csv << "route,value,error,method\n";
  for (auto it = routes.begin(); it != routes.end(); ++it)
    if (it.value().contains("value"))
      csv << it.key() << ',' << fmt(it.value()["value"]) << ',' << fmt(it.value()["error"]) << ','
          << it.value()["method"].get<std::string>() << '\n';
  out.csv = csv.str();
  return out;
}

Outcome laplace_bound(const Options& o) {
  const auto doc = need_model(o);
  const auto rep = chaos::laplace_monotonicity_check(doc.model, o.n, o.t, o.p, o.tol);
  Outcome out;
  json grid = json::array();
  std::ostringstream csv;
  csv << "s,norm,error\n";
  for (const auto& [s, e] : rep.grid) {
    grid.push_back({{"s", s}, {"norm", io::to_json(e)}});
    csv << fmt(s) << ',' << fmt(e.value) << ',' << fmt(e.error) << '\n';
  }
  out.result = {{"n", o.n},
                {"t", o.t},
                {"p", o.p == 0.0 ? static_cast<double>(o.n) : o.p},
                {"inequality", chaos::to_string(rep.inequality)},
                {"monotone", chaos::to_string(rep.monotone)},
                {"lhs", rep.lhs},
                {"lhs_error", rep.lhs_error},
                {"rhs", rep.rhs},
                {"rhs_error", rep.rhs_error},
                {"grid", grid}};
  out.csv = csv.str();
  if (!rep.ok()) out.code = kInconclusive;
  return out;
}

Outcome scaling_test(const Options& o) {
  const auto rep = chaos::scaling_check(o.n, o.alpha0, o.alpha, o.times, mc_config(o));
  Outcome out;
  json rows = json::array();
  std::ostringstream csv;
  csv << "t,ratio,ratio_stderr,expected,z\n";
  for (const auto& r : rep.rows) {
    rows.push_back({{"t", r.t},
                    {"ratio", r.ratio},
                    {"ratio_stderr", r.ratio_stderr},
                    {"expected", r.expected},
                    {"z", r.z},
                    {"norm", io::to_json(r.at_t)}});
    csv << fmt(r.t) << ',' << fmt(r.ratio) << ',' << fmt(r.ratio_stderr) << ',' << fmt(r.expected) << ','
        << fmt(r.z) << '\n';
  }
  out.result = {{"n", rep.n},
                {"alpha", rep.alpha},
                {"alpha0", rep.alpha0},
                {"exponent", (4.0 - rep.alpha - rep.alpha0) * rep.n},
                {"norm_at_one", io::to_json(rep.at_one)},
                {"rows", rows},
                {"status", chaos::to_string(rep.status)}};
  if (rep.recommended_samples) out.result["recommended_samples"] = rep.recommended_samples;
  out.csv = csv.str();
  if (rep.status != chaos::Check::holds) out.code = kInconclusive;
  return out;
}

Outcome series_diag(const Options& o) {
  const auto doc = need_model(o);
  if (!doc.covariance) throw Unsupported("series diagnostic needs a catalog covariance");
  const auto rep = chaos::series_diagnostic(*doc.covariance, doc.model.alpha0, o.t, o.n_max, o.w_sup, mc_config(o), o.tol);
  Outcome out;
  json terms = json::array();
  std::ostringstream csv;
  csv << "n,norm,error,weighted,partial_sum\n";
  for (const auto& term : rep.terms) {
    json j = {{"n", term.n}, {"weighted", term.weighted}, {"partial_sum", term.partial_sum}};
    j["norm"] = term.norm ? io::to_json(*term.norm) : json(nullptr);
    terms.push_back(j);
    csv << term.n << ',' << (term.norm ? fmt(term.norm->value) : "") << ','
        << (term.norm ? fmt(term.norm->error) : "") << ',' << fmt(term.weighted) << ',' << fmt(term.partial_sum)
        << '\n';
  }
  out.result = {{"t", rep.t},
                {"w_sup", rep.w_sup},
                {"terms", terms},
                {"ratios", rep.ratios},
                {"ratios_decreasing", rep.ratios_decreasing},
                {"label", rep.label}};
  out.csv = csv.str();
  return out;
}

Outcome simulate_noise(const Options& o) {
  const auto doc = need_model(o);
  const auto rep = noise::first_chaos_variance_check(doc.model, o.t, sample_count(o.samples), o.seed, o.x,
                                                     o.threads, 3.0);
  Outcome out;
  out.result = {{"t", o.t},
                {"norm_quadrature", rep.norm_quadrature},
                {"norm_quadrature_error", rep.norm_error},
                {"norm_empirical", rep.norm_empirical},
                {"stderr", rep.standard_error},
                {"z", rep.z},
                {"samples", rep.samples},
                {"components", rep.components},
                {"clipped", rep.clipped},
                {"passed", rep.passed}};
  if (!rep.passed) out.code = kInconclusive;
  return out;
}

Outcome sweep_cmd(const Options& o) {
  auto grid = sweep::Grid::phase_diagram();
  if (!o.grid_alpha0.empty()) grid.alpha0 = o.grid_alpha0;
  if (!o.grid_alpha.empty()) grid.alpha = o.grid_alpha;
  if (!o.grid_dims.empty()) grid.dims = o.grid_dims;
  grid.tol = o.tol;
  const auto rep = sweep::run(grid);
  Outcome out;
  json points = json::array();
  for (const auto& p : rep.points) {
    json j = {{"d", p.d},
              {"alpha0", p.alpha0},
              {"alpha", p.alpha},
              {"verdict", p.verdict},
              {"expected", p.expected_finite ? "finite" : "divergent"}};
    j["value"] = p.value ? json(*p.value) : json(nullptr);
    j["fitted_tail_exponent"] = p.fitted_tail_exponent ? json(*p.fitted_tail_exponent) : json(nullptr);
    if (!p.message.empty()) j["message"] = p.message;
    points.push_back(j);
  }
  json boundary = json::array();
  for (const auto& b : rep.boundary) {
    json j = {{"d", b.d}, {"alpha0", b.alpha0}};
    j["first_divergent_alpha"] = b.first_divergent_alpha ? json(*b.first_divergent_alpha) : json(nullptr);
    j["last_finite_alpha"] = b.last_finite_alpha ? json(*b.last_finite_alpha) : json(nullptr);
    boundary.push_back(j);
  }
  out.result = {{"points", points},
                {"summary",
                 {{"boundary", boundary},
                  {"boundary_consistent", rep.boundary_consistent},
                  {"invalid", rep.invalid},
                  {"failed", rep.failed},
                  {"total", rep.points.size()}}}};
  out.csv = sweep::to_csv(rep);
  if (!rep.all_verdicts()) out.code = kInconclusive;
  return out;
}

json config_json(const Options& o, const std::string& command) {
  json c = {{"tol", o.tol},
            {"seed", o.seed},
            {"samples", sample_count(o.samples)},
            {"format", o.format},
            {"threads", o.threads}};
  if (!o.model_path.empty()) {
    c["model_path"] = o.model_path;
    try {
      c["model"] = io::read_json_file(o.model_path);
    } catch (const Error&) {
    }
  }
  if (command == "check-condition") c["dalang"] = o.dalang;
  if (command == "w-eval" || command == "first-chaos" || command == "laplace-bound" || command == "series-diag" ||
      command == "simulate-noise")
    c["t"] = o.t;
  if (command == "w-eval" || command == "simulate-noise") c["x"] = o.x;
  if (command == "first-chaos") c["route"] = o.route;
  if (command == "laplace-bound") c["p"] = o.p;
  if (command == "laplace-bound" || command == "scaling-test") c["n"] = o.n;
  if (command == "scaling-test") {
    c["alpha"] = o.alpha;
    c["alpha0"] = o.alpha0;
    c["times"] = o.times;
  }
  if (command == "series-diag") {
    c["n_max"] = o.n_max;
    c["w_sup"] = o.w_sup;
  }
  if (command == "sweep") {
    c["alpha0_grid"] = o.grid_alpha0;
    c["alpha_grid"] = o.grid_alpha;
    c["dims"] = o.grid_dims;
  }
  return c;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw io::ParseError("cannot write " + path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-posedness and chaos diagnostics for the hyperbolic Anderson model", "hyperwave"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--model", o.model_path, "model JSON document");
  app.add_option("--tol", o.tol, "relative tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "64-bit seed");
  app.add_option("--samples", o.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output path (default stdout)");
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", o.threads, "worker threads (default HYPERWAVE_THREADS or 1)");

  auto* cc = app.add_subcommand("check-condition", "decide the well-posedness integral");
  cc->add_flag("--dalang", o.dalang, "also evaluate the white-in-time integral");

  auto* we = app.add_subcommand("w-eval", "evaluate the deterministic solution w(t, x)");
  we->add_option("--t", o.t)->required();
  we->add_option("--x", o.x, "point, one value per dimension");

  auto* fc = app.add_subcommand("first-chaos", "first-chaos kernel norm by each available route");
  fc->add_option("--t", o.t)->required();
  fc->add_option("--route", o.route)->check(CLI::IsMember({"all", "time", "fourier", "closed", "lower_bound"}));

  auto* lb = app.add_subcommand("laplace-bound", "Laplace lower bound and monotonicity in time");
  lb->add_option("--t", o.t)->required();
  lb->add_option("--n", o.n);
  lb->add_option("--p", o.p, "Laplace variable (default n)");

  auto* st = app.add_subcommand("scaling-test", "Monte Carlo time scaling of chaos norms, riesz kernel in d = 1");
  st->add_option("--n", o.n);
  st->add_option("--alpha", o.alpha);
  st->add_option("--alpha0", o.alpha0);
  st->add_option("--times", o.times);

  auto* sd = app.add_subcommand("series-diag", "partial sums of the chaos series bound");
  sd->add_option("--t", o.t)->required();
  sd->add_option("--n-max", o.n_max);
  sd->add_option("--w-sup", o.w_sup);

  auto* sn = app.add_subcommand("simulate-noise", "sample the first chaos of an atomic model");
  sn->add_option("--t", o.t)->required();
  sn->add_option("--x", o.x);

  auto* sw = app.add_subcommand("sweep", "condition verdicts over homogeneous models");
  sw->add_option("--alpha0-grid", o.grid_alpha0);
  sw->add_option("--alpha-grid", o.grid_alpha);
  sw->add_option("--dims", o.grid_dims);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }
  if (o.threads == 0) o.threads = rng::default_threads();

  const std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    Outcome out;
    if (command == "check-condition") out = check_condition(o);
    else if (command == "w-eval") out = w_eval(o);
    else if (command == "first-chaos") out = first_chaos(o);
    else if (command == "laplace-bound") out = laplace_bound(o);
    else if (command == "scaling-test") out = scaling_test(o);
    else if (command == "series-diag") out = series_diag(o);
    else if (command == "simulate-noise") out = simulate_noise(o);
    else out = sweep_cmd(o);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (o.format == "csv") {
      emit(out.csv.empty() ? key_value_csv(out.result) : out.csv, o.out);
    } else {
      json report = {{"tool", "hyperwave"},
                     {"command", command},
                     {"constants_table_version", constants::table_version},
                     {"config", config_json(o, command)},
                     {"result", out.result},
                     {"timing", {{"wall_seconds", wall}}}};
      emit(report.dump(2) + "\n", o.out);
    }
    return out.code;
  } catch (const QuadratureError& e) {
    std::cerr << "hyperwave: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const McDiagnosticError& e) {
    std::cerr << "hyperwave: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const InvalidGram& e) {
    std::cerr << "hyperwave: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "hyperwave: invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "hyperwave: invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "hyperwave: internal error: " << e.what() << '\n';
    return kNumerical;
  }
}
