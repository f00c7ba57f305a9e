// Command-line front end: validation suites, exact evaluations, Monte Carlo
// runs, moment sweeps and plots.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weldbench/exact.hpp"
#include "weldbench/fieldsim.hpp"
#include "weldbench/loewner.hpp"
#include "weldbench/plot.hpp"
#include "weldbench/report.hpp"
#include "weldbench/suites.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace weldbench;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Settings shared by all subcommands. Precedence: command-line flag, then the
// config file, then the built-in default.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> samples;
  double tolerance_scale = 1.0;
  unsigned workers = 0;
  bool verbose = false;
  json config = json::object();
};

bool given(const CLI::App* cmd, const char* flag) {
  if (!cmd || !flag) return false;
  const CLI::Option* opt = cmd->get_option_no_throw(flag);
  return opt != nullptr && opt->count() > 0;
}

// Fills `value` from `section[key]` unless the flag was given on the command line.
template <typename T>
void from_config(const CLI::App* cmd, const char* flag, const json& section, const char* key, T& value) {
  if (given(cmd, flag)) return;
  if (!section.is_object() || !section.contains(key)) return;
  try {
    value = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void from_config(const CLI::App* cmd, const char* flag, const json& section, const char* key,
                 std::optional<T>& value) {
  if (given(cmd, flag)) return;
  if (!section.is_object() || !section.contains(key)) return;
  try {
    value = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

json section(const json& cfg, const char* name) {
  if (!cfg.contains(name)) return json::object();
  const json& s = cfg.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return s;
}

void load_common(Common& c, const CLI::App& app) {
  if (!c.config_path.empty()) {
    std::ifstream f(c.config_path);
    if (!f) throw ConfigError("cannot read config file " + c.config_path);
    try {
      c.config = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!c.config.is_object()) throw ConfigError("config must be a JSON object");
  }
  from_config(&app, "--seed", c.config, "seed", c.seed);
  from_config(&app, "--out", c.config, "out", c.out);
  from_config(&app, "--samples", c.config, "samples", c.samples);
  from_config(&app, "--tolerance-scale", c.config, "tolerance_scale", c.tolerance_scale);
  from_config(&app, "--workers", c.config, "workers", c.workers);
  if (c.samples && *c.samples < 2) throw ConfigError("samples must be at least 2");
  if (!(c.tolerance_scale > 0.0)) throw ConfigError("tolerance-scale must be positive");
}

// Seeds drawn from entropy are announced so the run can be replayed.
std::uint64_t resolve_seed(Common& c) {
  if (!c.seed) {
    std::random_device rd;
    c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::fprintf(stderr, "seed %llu (drawn from entropy)\n", static_cast<unsigned long long>(*c.seed));
  }
  return *c.seed;
}

// Writes named outputs into the --out directory, or to stdout without one.
class Sink {
 public:
  explicit Sink(std::string dir) : dir_(std::move(dir)) {}
  void emit(const std::string& name, const std::string& text) const {
    if (dir_.empty()) {
      std::cout << text;
      return;
    }
    fs::create_directories(dir_);
    report::write_text((fs::path(dir_) / name).string(), text);
  }
  bool to_files() const { return !dir_.empty(); }

 private:
  std::string dir_;
};

std::string row(std::initializer_list<double> v) {
  std::string out;
  for (double x : v) {
    if (!out.empty()) out += ',';
    out += report::fmt(x);
  }
  return out + "\n";
}

void check_sle(const exact::SleParams& p) {
  try {
    exact::validate(p);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string suite = "all";
  bool acceptance_sizes = false;
};

int run_validate(Common& c, const CLI::App* cmd, ValidateArgs a) {
  const json s = section(c.config, "validate");
  from_config(cmd, "suite", s, "suite", a.suite);
  from_config(cmd, "--acceptance-sizes", s, "acceptance_sizes", a.acceptance_sizes);
  const auto& names = suites::suite_names();
  if (std::find(names.begin(), names.end(), a.suite) == names.end()) {
    throw ConfigError("unknown suite '" + a.suite + "'");
  }
  suites::SuiteConfig cfg;
  cfg.seed = resolve_seed(c);
  cfg.tolerance_scale = c.tolerance_scale;
  cfg.workers = c.workers;
  cfg.verbose = c.verbose;
  cfg.sizes = a.acceptance_sizes ? suites::Sizes::acceptance() : suites::Sizes::standard();
  if (c.samples) {
    cfg.sizes.sle_n = cfg.sizes.tail_n = cfg.sizes.ks_n = cfg.sizes.gmc_n = *c.samples;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = suites::run_suite(a.suite, cfg);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t failed = 0;
  for (const auto& r : recs) {
    if (!r.pass) {
      ++failed;
      std::fprintf(stderr, "FAIL %s: observed %s expected %s (%s)\n", r.id.c_str(), report::fmt(r.observed).c_str(),
                   report::fmt(r.expected).c_str(), r.note.c_str());
    }
  }
  const Sink sink(c.out);
  if (sink.to_files()) {
    sink.emit(a.suite + ".csv", report::records_csv(recs));
    sink.emit(a.suite + ".json", report::records_json(a.suite, cfg.seed, recs).dump(2) + "\n");
  } else {
    std::cout << report::records_csv(recs);
  }
  std::fprintf(stderr, "%s: %zu passed, %zu failed in %.1f s\n", a.suite.c_str(), recs.size() - failed, failed, sec);
  return failed == 0 ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------

struct SleArgs {
  double kappa = 2.0, rho_minus = 0.0, rho_plus = 0.0;
  std::vector<double> lambda{-1.0};
  double dt = loewner::SimConfig{}.dt;
  double T = loewner::SimConfig{}.T;
};

void read_sle(const CLI::App* cmd, const json& s, SleArgs& a) {
  from_config(cmd, "--kappa", s, "kappa", a.kappa);
  from_config(cmd, "--rho-minus", s, "rho_minus", a.rho_minus);
  from_config(cmd, "--rho-plus", s, "rho_plus", a.rho_plus);
  from_config(cmd, "--lambda", s, "lambda", a.lambda);
  from_config(cmd, "--dt", s, "dt", a.dt);
  from_config(cmd, "--capacity", s, "T", a.T);
  check_sle({a.kappa, a.rho_minus, a.rho_plus});
  if (a.lambda.empty()) throw ConfigError("at least one lambda is required");
  if (!(a.dt > 0.0) || !(a.T > 0.0)) throw ConfigError("dt and capacity must be positive");
}

void add_sle_options(CLI::App* cmd, SleArgs& a, bool with_sim) {
  cmd->add_option("--kappa", a.kappa, "SLE parameter kappa");
  cmd->add_option("--rho-minus", a.rho_minus, "force-point weight at 0-");
  cmd->add_option("--rho-plus", a.rho_plus, "force-point weight at 0+");
  cmd->add_option("--lambda", a.lambda, "moment exponents")->expected(1, -1);
  if (with_sim) {
    cmd->add_option("--dt", a.dt, "base step in units of the local scale");
    cmd->add_option("--capacity", a.T, "capacity time T");
  }
}

int run_exact_moment(Common& c, const CLI::App* cmd, SleArgs a) {
  read_sle(cmd, section(c.config, "moment"), a);
  std::vector<suites::SweepPoint> grid;
  for (double l : a.lambda) grid.push_back({{a.kappa, a.rho_minus, a.rho_plus}, l});
  const auto rows = suites::sweep_moment(grid, suites::SweepMode::Exact, 0, {}, 0);
  Sink(c.out).emit("moment.csv", suites::sweep_csv(rows));
  for (const auto& r : rows) {
    if (!r.error.empty()) return kExitFail;
  }
  return kExitPass;
}

struct ReflectionArgs {
  double gamma = 1.0;
  std::vector<double> beta{1.5};
  double mu1 = 1.0, mu2 = 0.0;
  double alpha = 1.0;
  double length = 1.0;
  double weight = 2.0;
};

void read_lqg(const CLI::App* cmd, const json& s, ReflectionArgs& a) {
  from_config(cmd, "--gamma", s, "gamma", a.gamma);
  from_config(cmd, "--beta", s, "beta", a.beta);
  from_config(cmd, "--mu1", s, "mu1", a.mu1);
  from_config(cmd, "--mu2", s, "mu2", a.mu2);
  from_config(cmd, "--alpha", s, "alpha", a.alpha);
  from_config(cmd, "--length", s, "length", a.length);
  from_config(cmd, "--weight", s, "weight", a.weight);
  if (!(a.gamma > 0.0 && a.gamma < 2.0)) throw ConfigError("gamma must lie in (0, 2)");
  if (!(a.mu1 >= 0.0 && a.mu2 >= 0.0) || (a.mu1 == 0.0 && a.mu2 == 0.0)) {
    throw ConfigError("mu1, mu2 must be nonnegative and not both zero");
  }
}

// Evaluates one output column; a domain error leaves the cell empty and is
// appended to the row's error field.
struct Cells {
  std::string line, errors;
  template <class F>
  void add(F&& f) {
    try {
      line += "," + report::fmt(f());
    } catch (const std::exception& e) {
      line += ",";
      errors += (errors.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  std::string finish(int& code) const {
    if (!errors.empty()) code = kExitFail;
    return line + "," + report::csv_field(errors) + "\n";
  }
};

int run_exact_reflection(Common& c, const CLI::App* cmd, ReflectionArgs a) {
  read_lqg(cmd, section(c.config, "reflection"), a);
  std::string out = "gamma,beta,mu1,mu2,reflection_bar,reflection,error\n";
  int code = kExitPass;
  const exact::BoundaryCosmology cos{a.mu1, a.mu2};
  for (double beta : a.beta) {
    Cells row{report::fmt(a.gamma) + "," + report::fmt(beta) + "," + report::fmt(a.mu1) + "," +
                  report::fmt(a.mu2),
              {}};
    row.add([&] { return exact::reflection_bar(beta, cos, a.gamma); });
    row.add([&] { return exact::reflection(beta, cos, a.gamma); });
    out += row.finish(code);
  }
  Sink(c.out).emit("reflection.csv", out);
  return code;
}

int run_exact_hbar(Common& c, const CLI::App* cmd, ReflectionArgs a) {
  read_lqg(cmd, section(c.config, "hbar"), a);
  std::string out = "gamma,beta,alpha,h_bar,h,error\n";
  int code = kExitPass;
  for (double beta : a.beta) {
    Cells row{report::fmt(a.gamma) + "," + report::fmt(beta) + "," + report::fmt(a.alpha), {}};
    row.add([&] { return exact::h_bar(beta, a.alpha, a.gamma); });
    row.add([&] { return exact::h_coefficient(beta, a.alpha, a.gamma); });
    out += row.finish(code);
  }
  Sink(c.out).emit("hbar.csv", out);
  return code;
}

int run_exact_density(Common& c, const CLI::App* cmd, ReflectionArgs a) {
  read_lqg(cmd, section(c.config, "density"), a);
  std::string out = "gamma,weight,mu1,mu2,length,density,laplace,error\n";
  int code = kExitPass;
  const exact::BoundaryCosmology cos{a.mu1, a.mu2};
  Cells row{report::fmt(a.gamma) + "," + report::fmt(a.weight) + "," + report::fmt(a.mu1) + "," +
                report::fmt(a.mu2) + "," + report::fmt(a.length),
            {}};
  row.add([&] { return exact::disk_length_marginal_density(a.weight, cos, a.length, a.gamma); });
  row.add([&] { return exact::disk_laplace(a.weight, cos, a.gamma); });
  out += row.finish(code);
  Sink(c.out).emit("density.csv", out);
  return code;
}

// ---------------------------------------------------------------------------

int run_mc_sle(Common& c, const CLI::App* cmd, SleArgs a) {
  read_sle(cmd, section(c.config, "sle"), a);
  const std::size_t n = c.samples.value_or(10000);
  const std::uint64_t seed = resolve_seed(c);
  const exact::SleParams p{a.kappa, a.rho_minus, a.rho_plus};
  loewner::SimConfig sim;
  sim.dt = a.dt;
  sim.T = a.T;
  const auto batch = loewner::sample_psi_primes(p, n, sim, seed, c.workers);
  std::vector<suites::SweepRow> rows;
  for (double l : a.lambda) {
    suites::SweepRow r;
    r.point = {p, l};
    r.lambda0 = exact::lambda0(p);
    r.seed = seed;
    r.exact_value = exact::sle_derivative_moment(l, p);
    if (l < r.lambda0) {
      const auto m = loewner::moment_from_batch(batch, l, seed);
      r.mc_mean = m.mean;
      r.mc_stderr = m.stderr_;
      r.n = m.n;
      r.z_score = m.stderr_ > 0.0 ? (m.mean - *r.exact_value) / m.stderr_ : 0.0;
      if (m.flagged) r.error = "flagged: acceptance below 95% or lambda > 0";
    }
    rows.push_back(r);
  }
  const Sink sink(c.out);
  sink.emit("sle.csv", suites::sweep_csv(rows));
  std::string tail = "y,survival,slope,slope_stderr,lambda0\n";
  try {
    const auto fit = loewner::fit_tail(batch.accepted_values(), 10.0, 1000.0);
    for (std::size_t i = 0; i < fit.ys.size(); ++i) {
      tail += row({fit.ys[i], fit.survival[i], fit.slope, fit.slope_stderr, exact::lambda0(p)});
    }
  } catch (const ConvergenceError&) {
    // too few large values for a fit; the table stays empty
  }
  if (sink.to_files()) sink.emit("tail.csv", tail);
  std::fprintf(stderr, "accepted %zu of %zu (swallowed %zu, not converged %zu, step underflow %zu)\n", batch.accepted,
               n, batch.swallowed, batch.not_converged, batch.underflow);
  return kExitPass;
}

struct GmcArgs {
  std::string kind = "reflection";
  double gamma = 1.0, beta = 1.5, alpha = 2.5, mu1 = 1.0, mu2 = 0.0, L = 24.0;
  std::size_t cells = 2048;
  double order = fieldsim::kDefaultRichardsonOrder;
};

int run_mc_gmc(Common& c, const CLI::App* cmd, GmcArgs a) {
  const json s = section(c.config, "gmc");
  from_config(cmd, "--kind", s, "kind", a.kind);
  from_config(cmd, "--gamma", s, "gamma", a.gamma);
  from_config(cmd, "--beta", s, "beta", a.beta);
  from_config(cmd, "--alpha", s, "alpha", a.alpha);
  from_config(cmd, "--mu1", s, "mu1", a.mu1);
  from_config(cmd, "--mu2", s, "mu2", a.mu2);
  from_config(cmd, "--window", s, "L", a.L);
  from_config(cmd, "--cells", s, "cells", a.cells);
  from_config(cmd, "--order", s, "order", a.order);
  if (a.kind != "reflection" && a.kind != "interval") throw ConfigError("gmc kind must be reflection or interval");
  if (!(a.gamma > 0.0 && a.gamma < 2.0)) throw ConfigError("gamma must lie in (0, 2)");
  if (a.cells < 4 || a.cells % 2 != 0) throw ConfigError("cells must be an even count >= 4");
  try {
    if (a.kind == "reflection") {
      exact::validate(exact::BoundaryCosmology{a.mu1, a.mu2});
      const double Q = exact::q_of_gamma(a.gamma);
      if (!(a.beta > 0.5 * a.gamma && a.beta < Q)) throw ConfigError("reflection moment needs gamma/2 < beta < Q");
      if ((2.0 / a.gamma) * (Q - a.beta) > 1.2) throw ConfigError("moment exponent above 1.2");
      if (!(a.L > 0.0)) throw ConfigError("window must be positive");
    } else {
      fieldsim::check_interval_params(a.beta, a.alpha, a.gamma);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  const std::size_t n = c.samples.value_or(1000);
  const std::uint64_t seed = resolve_seed(c);
  fieldsim::GmcMomentEstimate est;
  double expected = 0.0;
  if (a.kind == "reflection") {
    const exact::BoundaryCosmology cos{a.mu1, a.mu2};
    est = fieldsim::mc_reflection_moment(a.beta, cos, a.gamma, n, {a.L, a.cells, false}, seed, a.order, c.workers);
    expected = exact::reflection_bar(a.beta, cos, a.gamma);
  } else {
    est = fieldsim::mc_interval_moment(a.beta, a.alpha, a.gamma, n, {a.cells, false}, seed, a.order, c.workers);
    expected = exact::h_bar(a.beta, a.alpha, a.gamma);
  }
  std::string out = "kind,gamma,beta,alpha,mu1,mu2,cells,n,seed,exponent,fine_mean,fine_stderr,coarse_mean,"
                    "coarse_stderr,extrapolated_mean,extrapolated_stderr,exact_value,relative_error,flagged\n";
  out += a.kind + "," + report::fmt(a.gamma) + "," + report::fmt(a.beta) + "," +
         (a.kind == "interval" ? report::fmt(a.alpha) : std::string()) + "," + report::fmt(a.mu1) + "," +
         report::fmt(a.mu2) + "," + std::to_string(a.cells) + "," + std::to_string(n) + "," + std::to_string(seed) +
         "," + report::fmt(est.exponent) + "," + report::fmt(est.fine.mean) + "," + report::fmt(est.fine.stderr_) +
         "," + report::fmt(est.coarse.mean) + "," + report::fmt(est.coarse.stderr_) + "," +
         report::fmt(est.extrapolated.mean) + "," + report::fmt(est.extrapolated.stderr_) + "," +
         report::fmt(expected) + "," + report::fmt(est.extrapolated.mean / expected - 1.0) + "," +
         (est.flagged ? "1" : "0") + "\n";
  Sink(c.out).emit("gmc.csv", out);
  return kExitPass;
}

struct BmArgs {
  double a = 0.5, M = 1.0, dt = 0.01;
};

int run_mc_bm(Common& c, const CLI::App* cmd, BmArgs b) {
  const json s = section(c.config, "bm");
  from_config(cmd, "--drift", s, "a", b.a);
  from_config(cmd, "--level", s, "M", b.M);
  from_config(cmd, "--dt", s, "dt", b.dt);
  if (!(b.a > 0.0)) throw ConfigError("drift a must be positive");
  if (!(b.dt > 0.0)) throw ConfigError("dt must be positive");
  const std::size_t n = c.samples.value_or(5000);
  const std::uint64_t seed = resolve_seed(c);
  const auto rep = fieldsim::equivalence_test_prop24(b.a, b.M, n, seed, b.dt, c.workers);
  std::string ks = "a,M,n,seed,functional,statistic,p_value\n";
  for (int f = 0; f < 4; ++f) {
    ks += report::fmt(b.a) + "," + report::fmt(b.M) + "," + std::to_string(n) + "," + std::to_string(seed) + "," +
          fieldsim::kFunctionalNames[f] + "," + report::fmt(rep.ks[f].statistic) + "," +
          report::fmt(rep.ks[f].p_value) + "\n";
  }
  const Sink sink(c.out);
  sink.emit("ks.csv", ks);
  if (sink.to_files()) {
    std::string samples = "construction,functional,value\n";
    for (int f = 0; f < 4; ++f) {
      for (double v : rep.two_sided[f]) samples += std::string("two_sided,") + fieldsim::kFunctionalNames[f] + "," + report::fmt(v) + "\n";
      for (double v : rep.shifted_maximum[f]) {
        samples += std::string("shifted_maximum,") + fieldsim::kFunctionalNames[f] + "," + report::fmt(v) + "\n";
      }
    }
    sink.emit("bm.csv", samples);
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::vector<double> kappa{2.0}, rho_minus{0.0}, rho_plus{0.0}, lambda{-1.0, -0.5, 0.0};
  std::string mode = "exact";
  double dt = loewner::SimConfig{}.dt;
};

int run_sweep(Common& c, const CLI::App* cmd, SweepArgs a) {
  const json s = section(c.config, "sweep");
  from_config(cmd, "--kappa", s, "kappa", a.kappa);
  from_config(cmd, "--rho-minus", s, "rho_minus", a.rho_minus);
  from_config(cmd, "--rho-plus", s, "rho_plus", a.rho_plus);
  from_config(cmd, "--lambda", s, "lambda", a.lambda);
  from_config(cmd, "--mode", s, "mode", a.mode);
  from_config(cmd, "--dt", s, "dt", a.dt);
  suites::SweepMode mode;
  if (a.mode == "exact") mode = suites::SweepMode::Exact;
  else if (a.mode == "mc") mode = suites::SweepMode::Mc;
  else if (a.mode == "both") mode = suites::SweepMode::Both;
  else throw ConfigError("sweep mode must be exact, mc or both");
  if (!(a.dt > 0.0)) throw ConfigError("dt must be positive");
  std::vector<suites::SweepPoint> grid;
  // An explicit list of points replaces the Cartesian product.
  if (s.contains("grid") && !given(cmd, "--kappa")) {
    if (!s.at("grid").is_array()) throw ConfigError("sweep.grid must be an array");
    for (const auto& g : s.at("grid")) {
      try {
        grid.push_back({{g.at("kappa").get<double>(), g.at("rho_minus").get<double>(), g.at("rho_plus").get<double>()},
                        g.at("lambda").get<double>()});
      } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep.grid entry: ") + e.what());
      }
    }
  } else {
    for (double k : a.kappa)
      for (double rm : a.rho_minus)
        for (double rp : a.rho_plus)
          for (double l : a.lambda) grid.push_back({{k, rm, rp}, l});
  }
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  const std::uint64_t seed = mode == suites::SweepMode::Exact ? 0 : resolve_seed(c);
  loewner::SimConfig sim;
  sim.dt = a.dt;
  const auto rows = suites::sweep_moment(grid, mode, c.samples.value_or(10000), sim, seed, c.workers);
  Sink(c.out).emit("sweep.csv", suites::sweep_csv(rows));
  std::size_t errors = 0;
  for (const auto& r : rows) errors += r.error.empty() ? 0 : 1;
  if (errors) std::fprintf(stderr, "%zu of %zu rows carry errors\n", errors, rows.size());
  return errors == 0 ? kExitPass : kExitFail;
}

struct PlotArgs {
  std::string kind = "moment-vs-lambda";
  std::string table;
  std::string functional = "maximum";
};

int run_plot(Common& c, const CLI::App* cmd, PlotArgs a) {
  const json s = section(c.config, "plot");
  from_config(cmd, "--kind", s, "kind", a.kind);
  from_config(cmd, "--table", s, "table", a.table);
  from_config(cmd, "--functional", s, "functional", a.functional);
  if (a.kind != "moment-vs-lambda" && a.kind != "tail-law" && a.kind != "ks-overlay") {
    throw ConfigError("plot kind must be moment-vs-lambda, tail-law or ks-overlay");
  }
  if (a.table.empty()) throw ConfigError("plot needs --table");
  report::Table t;
  try {
    t = report::read_csv(a.table);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const std::vector<std::string> need =
      a.kind == "moment-vs-lambda" ? std::vector<std::string>{"kappa", "rho_minus", "rho_plus", "lambda", "exact_value"}
      : a.kind == "tail-law"       ? std::vector<std::string>{"y", "survival"}
                                   : std::vector<std::string>{"construction", "functional", "value"};
  if (t.header.size() == 1 && t.header[0].empty()) t.header.clear();
  if (!t.header.empty()) {
    for (const auto& col : need) {
      if (t.column(col) < 0) throw ConfigError("table lacks column '" + col + "' for " + a.kind);
    }
  }
  plot::Figure f = a.kind == "moment-vs-lambda" ? plot::moment_vs_lambda(t)
                   : a.kind == "tail-law"       ? plot::tail_law(t)
                                                : plot::ks_overlay(t, a.functional);
  Sink(c.out).emit(a.kind + ".svg", plot::render(f));
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact integrability formulas for SLE derivative moments and boundary Liouville theory, "
               "with Monte Carlo cross-checks."};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON config; command-line flags take precedence");
  app.add_option("--seed", common.seed, "base seed (drawn from entropy and reported when absent)");
  app.add_option("--out", common.out, "output directory (stdout when absent)");
  app.add_option("--samples", common.samples, "Monte Carlo sample count");
  app.add_option("--tolerance-scale", common.tolerance_scale, "multiplier on check tolerances");
  app.add_option("--workers", common.workers, "worker threads (0: WELDBENCH_THREADS or all cores)");
  app.add_flag("--verbose", common.verbose, "print one line per check");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "run a validation suite");
  validate->add_option("suite", va.suite, "specfun, exact, loewner, fieldsim or all");
  validate->add_flag("--acceptance-sizes", va.acceptance_sizes, "use the full acceptance sample sizes");

  auto* exact_cmd = app.add_subcommand("exact", "evaluate closed-form quantities");
  exact_cmd->require_subcommand(1);
  SleArgs moment_args;
  auto* moment = exact_cmd->add_subcommand("moment", "E[psi'(1)^lambda]");
  add_sle_options(moment, moment_args, false);
  ReflectionArgs refl_args, hbar_args, dens_args;
  auto* refl = exact_cmd->add_subcommand("reflection", "boundary reflection coefficient");
  refl->add_option("--gamma", refl_args.gamma);
  refl->add_option("--beta", refl_args.beta)->expected(1, -1);
  refl->add_option("--mu1", refl_args.mu1);
  refl->add_option("--mu2", refl_args.mu2);
  auto* hbar = exact_cmd->add_subcommand("hbar", "boundary three-point constant");
  hbar->add_option("--gamma", hbar_args.gamma);
  hbar->add_option("--beta", hbar_args.beta)->expected(1, -1);
  hbar->add_option("--alpha", hbar_args.alpha);
  auto* dens = exact_cmd->add_subcommand("density", "quantum disk boundary-length density");
  dens->add_option("--gamma", dens_args.gamma);
  dens->add_option("--weight", dens_args.weight);
  dens->add_option("--mu1", dens_args.mu1);
  dens->add_option("--mu2", dens_args.mu2);
  dens->add_option("--length", dens_args.length);

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimators");
  mc->require_subcommand(1);
  SleArgs sle_args;
  auto* sle = mc->add_subcommand("sle", "moments and tail of psi'(1)");
  add_sle_options(sle, sle_args, true);
  GmcArgs gmc_args;
  auto* gmc = mc->add_subcommand("gmc", "boundary chaos moments");
  gmc->add_option("--kind", gmc_args.kind, "reflection or interval");
  gmc->add_option("--gamma", gmc_args.gamma);
  gmc->add_option("--beta", gmc_args.beta);
  gmc->add_option("--alpha", gmc_args.alpha);
  gmc->add_option("--mu1", gmc_args.mu1);
  gmc->add_option("--mu2", gmc_args.mu2);
  gmc->add_option("--window", gmc_args.L, "strip window half-width L");
  gmc->add_option("--cells", gmc_args.cells, "cells per line (fine resolution)");
  gmc->add_option("--order", gmc_args.order, "Richardson order");
  BmArgs bm_args;
  auto* bm = mc->add_subcommand("bm", "conditioned drifted Brownian motion equivalence test");
  bm->add_option("--drift", bm_args.a, "drift a");
  bm->add_option("--level", bm_args.M, "level M");
  bm->add_option("--dt", bm_args.dt, "path grid step");

  SweepArgs sw_args;
  auto* sweep = app.add_subcommand("sweep", "moment table over a parameter grid");
  sweep->add_option("--kappa", sw_args.kappa)->expected(1, -1);
  sweep->add_option("--rho-minus", sw_args.rho_minus)->expected(1, -1);
  sweep->add_option("--rho-plus", sw_args.rho_plus)->expected(1, -1);
  sweep->add_option("--lambda", sw_args.lambda)->expected(1, -1);
  sweep->add_option("--mode", sw_args.mode, "exact, mc or both");
  sweep->add_option("--dt", sw_args.dt);

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plot", "SVG plot of a table");
  plot_cmd->add_option("--kind", plot_args.kind, "moment-vs-lambda, tail-law or ks-overlay");
  plot_cmd->add_option("--table", plot_args.table, "input CSV");
  plot_cmd->add_option("--functional", plot_args.functional, "functional for ks-overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    load_common(common, app);
    if (*validate) return run_validate(common, validate, va);
    if (*moment) return run_exact_moment(common, moment, moment_args);
    if (*refl) return run_exact_reflection(common, refl, refl_args);
    if (*hbar) return run_exact_hbar(common, hbar, hbar_args);
    if (*dens) return run_exact_density(common, dens, dens_args);
    if (*sle) return run_mc_sle(common, sle, sle_args);
    if (*gmc) return run_mc_gmc(common, gmc, gmc_args);
    if (*bm) return run_mc_bm(common, bm, bm_args);
    if (*sweep) return run_sweep(common, sweep, sw_args);
    if (*plot_cmd) return run_plot(common, plot_cmd, plot_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return kExitUsage;
}
