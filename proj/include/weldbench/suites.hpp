#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "weldbench/exact.hpp"
#include "weldbench/fieldsim.hpp"
#include "weldbench/loewner.hpp"
#include "weldbench/quadrature.hpp"
#include "weldbench/report.hpp"
#include "weldbench/rng.hpp"
#include "weldbench/specfun.hpp"
#include "weldbench/stats.hpp"

namespace weldbench::suites {

using report::ToleranceKind;
using report::ValidationRecord;
using cplx = std::complex<double>;

// Monte Carlo sizes. `standard` keeps `validate all` to a few minutes on one
// core; `acceptance` uses the sizes of the acceptance criteria.
struct Sizes {
  std::size_t sle_n = 10000;
  std::size_t tail_n = 20000;
  std::size_t ks_n = 5000;
  std::size_t gmc_n = 1000;
  std::size_t strip_cells = 2048;
  std::size_t interval_cells = 2048;
  std::size_t aux_n = 10000;  // driving-process and refinement checks

  static Sizes standard() { return {}; }
  static Sizes acceptance() { return {100000, 100000, 5000, 4000, 8192, 8192, 10000}; }
};

struct SuiteConfig {
  std::uint64_t seed = 7;
  double tolerance_scale = 1.0;
  unsigned workers = 0;
  Sizes sizes;
  bool verbose = false;  // one console line per record
};

// A seed for check `k` that differs across checks and base seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (k + 1));
}

// Short rendering for check ids and notes.
inline std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string kv(const char* name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.10g", name, v);
  return buf;
}

inline std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

// Collects records; runs each check, turning exceptions into failed records.
class Runner {
 public:
  explicit Runner(const SuiteConfig& cfg) : cfg_(cfg) {}

  const SuiteConfig& cfg() const { return cfg_; }

  void add(ValidationRecord r, double seconds = 0.0) {
    if (r.kind == ToleranceKind::Absolute || r.kind == ToleranceKind::Relative ||
        r.kind == ToleranceKind::Sigma) {
      r.tolerance *= cfg_.tolerance_scale;
      r.pass = report::within(r);
    }
    r.runtime_s = seconds;
    if (cfg_.verbose) {
      std::fprintf(stderr, "  %-4s %-44s observed %-12.6g expected %-12.6g (%.1fs)\n",
                   r.pass ? "ok" : "FAIL", r.id.c_str(), r.observed, r.expected, seconds);
    }
    records_.push_back(std::move(r));
  }

  // `body` returns one or more records.
  void check(const std::string& id, const std::string& anchor, const std::string& inputs,
             const std::function<std::vector<ValidationRecord>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ValidationRecord> out;
    try {
      out = body();
    } catch (const std::exception& e) {
      out = {report::failed_record(id, anchor, inputs, e.what())};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : out) add(std::move(r), sec / static_cast<double>(out.size()));
  }

  std::vector<ValidationRecord> take() { return std::move(records_); }

 private:
  SuiteConfig cfg_;
  std::vector<ValidationRecord> records_;
};

// Largest value of `f` over a set, with the argument that produced it.
struct Worst {
  double value = 0.0;
  std::string where;
  void update(double v, const std::string& w) {
    if (!(v <= value)) {  // NaN wins
      value = v;
      where = w;
    }
  }
};

inline ValidationRecord max_residual_record(const std::string& id, const std::string& anchor,
                                            const std::string& inputs, const Worst& w, double tol) {
  auto r = report::make_record(id, anchor, inputs, 0.0, w.value, tol, ToleranceKind::Absolute);
  r.note = "worst at " + w.where;
  return r;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }
inline double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ---------------------------------------------------------------------------
// specfun

inline constexpr std::array<double, 3> kShiftGridB = {0.5, 0.9, 1.3};

// The 40 points of the shift grid: Re z in [0.5, 3], four imaginary parts.
inline std::vector<cplx> shift_grid_points() {
  std::vector<cplx> z;
  for (int i = 0; i < 10; ++i) {
    for (double im : {0.0, 0.4, -1.1, 2.5}) z.emplace_back(0.5 + 2.5 * i / 9.0, im);
  }
  return z;
}

// |Gamma_b(z + s) Gamma(s z) s^{1/2 - s z} / (sqrt(2 pi) Gamma_b(z)) - 1| with
// every double gamma value taken from the integral representation.
inline double shift_residual(double b, cplx z, double s) {
  using namespace specfun;
  const cplx lhs = log_double_gamma(b, z + s) + log_gamma(s * z) + (0.5 - s * z) * std::log(s) -
                   kHalfLog2Pi;
  return std::abs(std::exp(lhs - log_double_gamma(b, z)) - 1.0);
}

inline void specfun_suite(Runner& run) {
  for (double b : kShiftGridB) {
    for (int dual = 0; dual < 2; ++dual) {
      const double s = dual ? 1.0 / b : b;
      const std::string id = std::string("specfun.shift.") + (dual ? "inverse_b" : "b") + "." + tag(b);
      run.check(id, "double-gamma shift equations", kv("b", b), [&] {
        Worst w;
        for (cplx z : shift_grid_points()) {
          w.update(shift_residual(b, z, s), tag(z.real()) + "+" + tag(z.imag()) + "i");
        }
        return std::vector{max_residual_record(id, "double-gamma shift equations",
                                               join({kv("b", b), kv("shift", s), "points=40"}), w, 1e-9)};
      });
    }
  }

  // Points left of the integral's domain go through the continuation, so the
  // shift identity there compares two continuations with different shifts.
  run.check("specfun.shift.continued", "double-gamma shift equations", "b=0.5,0.9,1.3", [&] {
    Worst w;
    for (double b : kShiftGridB) {
      for (cplx z : {cplx(-0.37, 0.0), cplx(-1.21, 0.3), cplx(0.2, -0.7), cplx(-2.45, 1.0), cplx(0.05, 0.0)}) {
        using specfun::log_double_gamma_continued;
        const cplx a = log_double_gamma_continued(b, z, b);
        const cplx c = log_double_gamma_continued(b, z, 1.0 / b);
        const double r = std::abs(std::exp(a - c) - 1.0);
        w.update(r, kv("b", b) + " z=" + tag(z.real()) + "+" + tag(z.imag()) + "i");
      }
    }
    return std::vector{max_residual_record("specfun.shift.continued", "double-gamma shift equations",
                                           "15 points with Re z < 0.5", w, 1e-9)};
  });

  run.check("specfun.normalization", "double-gamma normalization Gamma_b(Q/2) = 1", "20 values of b", [&] {
    Worst w;
    for (int i = 0; i < 20; ++i) {
      const double b = 0.3 + 2.2 * i / 19.0;
      const double q = b + 1.0 / b;
      // Through the shift equation so the integrand is evaluated at a point
      // where it does not vanish identically.
      for (double s : {b, 1.0 / b}) {
        using namespace specfun;
        const cplx z(0.5 * q, 0.0);
        const cplx lg = log_double_gamma(b, z + s) + log_gamma(s * z) + (0.5 - s * z) * std::log(s) -
                        kHalfLog2Pi;
        w.update(std::abs(std::exp(lg) - 1.0), kv("b", b) + " " + kv("shift", s));
      }
    }
    return std::vector{max_residual_record("specfun.normalization",
                                           "double-gamma normalization Gamma_b(Q/2) = 1",
                                           "b in [0.3, 2.5], both shifts", w, 1e-11)};
  });

  struct Frozen {
    const char* id;
    cplx expected;
    std::function<cplx()> value;
  };
  // Independent high-precision evaluations of the integral representation.
  const std::vector<Frozen> frozen = {
      {"log_gamma(3.7+2.1i)", {0.78534695807382238876, 2.5830129251152622486},
       [] { return specfun::log_gamma(cplx(3.7, 2.1)); }},
      {"log_double_gamma(b=1,z=2)", {0.91893853320467274178, 0.0},
       [] { return specfun::log_double_gamma(1.0, cplx(2.0, 0.0)); }},
      {"log_double_gamma(b=0.7,z=0.3)", {0.41734085387933235091, 0.0},
       [] { return specfun::log_double_gamma(0.7, cplx(0.3, 0.0)); }},
      {"double_gamma(b=0.9,z=-0.4)", {-1.4886482389495549444, 0.0},
       [] { return specfun::double_gamma(0.9, cplx(-0.4, 0.0)); }},
      {"double_sine(b=0.8,z=0.6+0.4i)", {0.53012418520279532041, 0.15065125852336913156},
       [] { return specfun::double_sine(0.8, cplx(0.6, 0.4)); }},
      {"log_double_gamma(b=1.3,z=1+2i)", {-1.4768797248162468386, 3.2704311403167019975},
       [] { return specfun::log_double_gamma(1.3, cplx(1.0, 2.0)); }},
      {"2F1(0.3,0.2;1.1;1)", {1.13874354226133046, 0.0},
       [] { return specfun::gauss_2f1_at_one(0.3, 0.2, 1.1); }},
  };
  for (const auto& f : frozen) {
    const std::string id = std::string("specfun.frozen.") + f.id;
    run.check(id, "double-gamma integral representation", f.id, [&] {
      const cplx v = f.value();
      auto r = report::make_record(id, "double-gamma integral representation", f.id, 0.0,
                                   rel_diff(v, f.expected), 1e-11, ToleranceKind::Absolute);
      r.note = "relative error against a 40-digit evaluation";
      return std::vector{r};
    });
  }
}

// ---------------------------------------------------------------------------
// exact

inline constexpr std::uint64_t kExactSeed = 0x5eedf00dULL;

// Uniform draw in (lo, hi) from a fixed stream.
struct TupleDraw {
  SampleStream rng;
  explicit TupleDraw(std::uint64_t salt) : rng(kExactSeed, 0, salt) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
};

// Valid (kappa, rho_-, rho_+) with kappa in (0, 4] and lambda below lambda0.
inline std::pair<exact::SleParams, double> draw_sle_tuple(TupleDraw& u) {
  const double kappa = u(0.3, 4.0);
  const double rm = u(-1.8, 4.0);
  const double lo = std::max(-2.0, 0.5 * kappa - 4.0) + 0.1;
  const double rp = u(lo, 4.0);
  const exact::SleParams p{kappa, rm, rp};
  const double l0 = exact::lambda0(p);
  const double lambda = u(-3.0, std::min(l0 - 0.05, 2.0));
  return {p, lambda};
}

inline std::string sle_inputs(const exact::SleParams& p, double lambda) {
  return join({kv("kappa", p.kappa), kv("rho_minus", p.rho_minus), kv("rho_plus", p.rho_plus),
               kv("lambda", lambda)});
}

inline void exact_suite(Runner& run) {
  const char* thm = "derivative moment formula E[psi'(1)^lambda] = F(alpha)/F(sqrt kappa)";

  run.check("exact.moment.lambda_zero", thm, "200 random tuples", [&] {
    TupleDraw u(1);
    Worst w;
    for (int i = 0; i < 200; ++i) {
      const auto [p, lambda] = draw_sle_tuple(u);
      // At lambda = 0 the roots are sqrt(kappa) and 4/sqrt(kappa); the second
      // must also give 1.
      const cplx v = exact::moment_from_root(cplx(4.0 / std::sqrt(p.kappa), 0.0), p);
      w.update(std::abs(v - 1.0), sle_inputs(p, 0.0));
    }
    return std::vector{max_residual_record("exact.moment.lambda_zero", thm,
                                           "200 random tuples, second root at lambda=0", w, 1e-12)};
  });

  run.check("exact.moment.root_swap", thm, "200 random tuples", [&] {
    TupleDraw u(2);
    Worst w;
    for (int i = 0; i < 200; ++i) {
      const auto [p, lambda] = draw_sle_tuple(u);
      const double qk = exact::q_kappa(p.kappa);
      const cplx alpha(u(0.2, 2.0 * qk - 0.2), u(-1.5, 1.5));
      const cplx a = exact::log_F(alpha, p), b = exact::log_F(2.0 * qk - alpha, p);
      w.update(std::abs(std::exp(a - b) - 1.0), sle_inputs(p, lambda) + " " + kv("alpha_re", alpha.real()) +
                                                    " " + kv("alpha_im", alpha.imag()));
    }
    return std::vector{max_residual_record("exact.moment.root_swap", thm,
                                           "200 random tuples, F(alpha) = F(2 Q_kappa - alpha)", w, 1e-10)};
  });

  run.check("exact.moment.both_roots", thm, "200 random tuples", [&] {
    TupleDraw u(3);
    Worst w;
    for (int i = 0; i < 200; ++i) {
      const auto [p, lambda] = draw_sle_tuple(u);
      const auto [r1, r2] = exact::alpha_roots(lambda, p.kappa);
      const cplx v1 = exact::moment_from_root(r1, p), v2 = exact::moment_from_root(r2, p);
      w.update(rel_diff(v1, v2), sle_inputs(p, lambda));
    }
    return std::vector{max_residual_record("exact.moment.both_roots", thm,
                                           "200 random tuples with lambda < lambda0", w, 1e-10)};
  });

  run.check("exact.moment.above_lambda0", thm, "lambda >= lambda0", [&] {
    const exact::SleParams p{2.0, 0.0, 0.0};
    const double v = exact::sle_derivative_moment(exact::lambda0(p) + 0.25, p);
    auto r = report::make_record("exact.moment.above_lambda0", thm, sle_inputs(p, exact::lambda0(p) + 0.25),
                                 exact::kInfinity, v, 0.0, ToleranceKind::AtLeast);
    r.tolerance = exact::kInfinity;
    r.pass = report::within(r);
    return std::vector{r};
  });

  const char* refl = "reflection identity R(beta) R(2Q - beta) = 1";
  run.check("exact.reflection.product", refl, "100 tuples", [&] {
    TupleDraw u(4);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.5, 1.8);
      const double Q = exact::q_of_gamma(gamma);
      const double x = u(0.02, 0.45 * gamma);
      // Half of the tuples use two-sided cosmologies, whose sigma_j are complex.
      exact::BoundaryCosmology c{u(0.2, 3.0), i % 2 == 0 ? 0.0 : u(0.2, 3.0)};
      if (i % 4 == 3) std::swap(c.mu1, c.mu2);
      const double beta = Q - x;
      const double v = exact::reflection(beta, c, gamma) * exact::reflection(2.0 * Q - beta, c, gamma);
      w.update(std::abs(v - 1.0), join({kv("gamma", gamma), kv("beta", beta), kv("mu1", c.mu1), kv("mu2", c.mu2)}));
    }
    return std::vector{max_residual_record("exact.reflection.product", refl,
                                           "100 tuples, half with complex sigma", w, 1e-8)};
  });

  run.check("exact.reflection.at_Q", refl, "R(Q) over cosmologies", [&] {
    Worst w;
    for (double gamma : {0.6, 1.0, 1.5, 1.9}) {
      for (exact::BoundaryCosmology c : {exact::BoundaryCosmology{1.0, 0.0}, exact::BoundaryCosmology{0.0, 2.5},
                                         exact::BoundaryCosmology{0.7, 1.9}, exact::BoundaryCosmology{3.0, 0.4}}) {
        const double v = exact::reflection_bar(exact::q_of_gamma(gamma), c, gamma);
        w.update(std::abs(v - 1.0), join({kv("gamma", gamma), kv("mu1", c.mu1), kv("mu2", c.mu2)}));
      }
    }
    return std::vector{max_residual_record("exact.reflection.at_Q", "normalized reflection at beta = Q equals 1",
                                           "16 (gamma, mu) pairs", w, 1e-8)};
  });

  const char* href = "three-point reflection H(beta) = R(beta)^2 H(2Q - beta)";
  run.check("exact.hbar.reflection", href, "100 tuples", [&] {
    TupleDraw u(5);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.6, 1.6);
      const double Q = exact::q_of_gamma(gamma);
      const double x = u(0.02, 0.45 * gamma);
      const double alpha = u(2.0 * x + 0.1, 2.0 * x + 2.5);
      const double beta = Q - x;
      const double lhs = exact::h_coefficient(beta, alpha, gamma);
      const double r = exact::reflection(beta, {1.0, 0.0}, gamma);
      const double rhs = r * r * exact::h_coefficient(2.0 * Q - beta, alpha, gamma);
      w.update(rel_diff(lhs, rhs), join({kv("gamma", gamma), kv("beta", beta), kv("alpha", alpha)}));
    }
    return std::vector{max_residual_record("exact.hbar.reflection", href, "100 (beta, alpha, gamma) tuples", w, 1e-8)};
  });

  const char* dens = "disk boundary-length densities";
  for (double gamma : {0.8, 1.0, 1.4}) {
    run.check("exact.disk.weight_two." + tag(gamma), dens, kv("gamma", gamma), [&, gamma] {
      quad::Options opt;
      opt.abs_tol = 1e-16;
      opt.rel_tol = 1e-13;
      auto f2 = [&](double r) { return exact::disk_length_joint_density(exact::DiskWeight::Two, 1.0, r, gamma); };
      auto fh = [&](double r) {
        return exact::disk_length_joint_density(exact::DiskWeight::HalfGammaSquared, 1.0, r, gamma);
      };
      const double i2 = quad::integrate_panels_to_infinity(f2, 0.0, 1.0, 1e-18, opt, 400).value;
      const double ih = quad::integrate_panels_to_infinity(fh, 0.0, 1.0, 1e-18, opt, 400).value;
      const double rb = exact::reflection_bar(gamma, {1.0, 0.0}, gamma);
      return std::vector{
          report::make_record("exact.disk.weight_two." + tag(gamma), dens,
                              join({kv("gamma", gamma), "W=2", "l=1"}), rb, i2, 1e-8, ToleranceKind::Relative),
          report::make_record("exact.disk.weight_half_gamma_sq." + tag(gamma), dens,
                              join({kv("gamma", gamma), "W=gamma^2/2", "l=1"}), 1.0, ih, 1e-8,
                              ToleranceKind::Relative)};
    });
  }

  const char* cross = "derivative moment: ratio, product and hypergeometric forms agree";
  run.check("exact.cross.ratio_vs_product", cross, "100 tuples", [&] {
    TupleDraw u(6);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.5, 1.9);
      const double Q = exact::q_of_gamma(gamma);
      const double top = Q + 0.5 * gamma;
      const double bm = u(top - 2.5, top - 0.05), bp = u(top - 2.5, top - 0.05);
      const auto g = exact::LqgParams::from_betas(gamma, bm, bp);
      const auto p = exact::to_sle(g);
      const double lambda = u(-3.0, std::min(exact::lambda0(p) - 0.05, 2.0));
      const double a = exact::sle_derivative_moment(lambda, p);
      const double b = exact::m_general(lambda, bm, bp, gamma);
      w.update(rel_diff(a, b), sle_inputs(p, lambda));
    }
    return std::vector{max_residual_record("exact.cross.ratio_vs_product", cross, "100 tuples", w, 1e-9)};
  });

  run.check("exact.cross.hypergeometric", cross, "100 tuples", [&] {
    TupleDraw u(7);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.5, 1.9);
      const double Q = exact::q_of_gamma(gamma);
      const double top = Q + 0.5 * gamma;
      const double bp = u(top - 2.5, top - 0.05);
      const auto which = i % 2 == 0 ? exact::Insertion::Gamma : exact::Insertion::Q;
      const double bm = which == exact::Insertion::Gamma ? gamma : Q;
      const auto p = exact::to_sle(exact::LqgParams::from_betas(gamma, bm, bp));
      const double lambda = u(-3.0, std::min(exact::lambda0(p) - 0.05, 2.0));
      const double a = exact::m_special(which, lambda, bp, gamma);
      const double b = exact::m_special_hypergeometric(which, lambda, bp, gamma);
      const double c = exact::m_general(lambda, bm, bp, gamma);
      w.update(std::max(rel_diff(a, b), rel_diff(a, c)), sle_inputs(p, lambda));
    }
    return std::vector{max_residual_record("exact.cross.hypergeometric", cross,
                                           "100 tuples with beta_- in {gamma, Q}", w, 1e-9)};
  });

  const char* shift = "derivative moment shift relations in beta_-";
  run.check("exact.shift_relations", shift, "100 tuples", [&] {
    TupleDraw u(8);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.6, 1.8);
      const double Q = exact::q_of_gamma(gamma);
      const double top = Q + 0.5 * gamma;
      const double bm = u(top - 1.5, top - 0.05), bp = u(top - 1.5, top - 0.05);
      const auto which = i % 2 == 0 ? exact::Insertion::Gamma : exact::Insertion::Q;
      const double step = which == exact::Insertion::Gamma ? 2.0 / gamma : 0.5 * gamma;
      const auto p = exact::to_sle(exact::LqgParams::from_betas(gamma, bm, bp));
      const auto ps = exact::to_sle(exact::LqgParams::from_betas(gamma, bm - step, bp));
      const double l0 = std::min(exact::lambda0(p), exact::lambda0(ps));
      const double lambda = u(-2.0, std::min(l0 - 0.05, 1.0));
      const double lhs = exact::m_general(lambda, bm - step, bp, gamma) / exact::m_general(lambda, bm, bp, gamma);
      const double rhs = exact::m_shift_ratio(which, lambda, bm, bp, gamma);
      w.update(rel_diff(lhs, rhs), join({kv("gamma", gamma), kv("beta_minus", bm), kv("beta_plus", bp),
                                         kv("lambda", lambda), kv("shift", step)}));
    }
    return std::vector{max_residual_record("exact.shift_relations", shift, "100 tuples, both shifts", w, 1e-8)};
  });

  const char* comp = "derivative moment composition relation";
  run.check("exact.composition", comp, "100 tuples", [&] {
    TupleDraw u(9);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double gamma = u(0.6, 1.8);
      const double Q = exact::q_of_gamma(gamma);
      const double top = Q + 0.5 * gamma;
      const double be = u(top - 1.2, top - 0.05), bm = u(top - 1.2, top - 0.05), bp = u(top - 1.2, top - 0.05);
      const double joined_left = be + bm - Q - 0.5 * gamma;
      const double joined_right = bm + bp - Q - 0.5 * gamma;
      double l0 = 1e300;
      for (auto [x, y] : {std::pair{joined_left, bp}, std::pair{be, joined_right}, std::pair{bm, bp}}) {
        l0 = std::min(l0, exact::lambda0(exact::to_sle(exact::LqgParams::from_betas(gamma, x, y))));
      }
      const double lambda = u(-2.0, std::min(l0 - 0.05, 1.0));
      const double lhs = exact::m_general(lambda, joined_left, bp, gamma);
      const double rhs = exact::m_general(lambda, be, joined_right, gamma) * exact::m_general(lambda, bm, bp, gamma);
      w.update(rel_diff(lhs, rhs), join({kv("gamma", gamma), kv("beta_e", be), kv("beta_minus", bm),
                                         kv("beta_plus", bp), kv("lambda", lambda)}));
    }
    return std::vector{max_residual_record("exact.composition", comp, "100 tuples", w, 1e-8)};
  });

  const char* dual = "derivative moment invariance under kappa -> 16/kappa duality";
  run.check("exact.duality", dual, "100 tuples with kappa in (4, 16]", [&] {
    TupleDraw u(10);
    Worst w;
    for (int i = 0; i < 100; ++i) {
      const double kappa = u(4.05, 16.0);
      const double rm = u(-1.8, 4.0);
      const double rp = u(std::max(-2.0, 0.5 * kappa - 4.0) + 0.1, 0.5 * kappa + 2.0);
      const exact::SleParams p{kappa, rm, rp};
      const auto d = exact::duality_map(p);
      const double l0 = std::min(exact::lambda0(p), exact::lambda0(d));
      const double lambda = u(-3.0, std::min(l0 - 0.05, 2.0));
      w.update(rel_diff(exact::sle_derivative_moment(lambda, p), exact::sle_derivative_moment(lambda, d)),
               sle_inputs(p, lambda));
    }
    return std::vector{max_residual_record("exact.duality", dual, "100 tuples with kappa in (4, 16]", w, 1e-10)};
  });
}

// ---------------------------------------------------------------------------
// loewner

inline constexpr double kTailKappa = 2.0, kTailRhoMinus = 0.0, kTailRhoPlus = -0.9;

// The eight driving tuples of the headline comparison.
inline std::vector<exact::SleParams> headline_tuples() {
  std::vector<exact::SleParams> out;
  for (double kappa : {2.0, 3.0}) {
    for (double rm : {0.0, 1.0}) {
      for (double rp : {0.5 * kappa - 2.0 + 0.5, 2.0}) out.push_back({kappa, rm, rp});
    }
  }
  return out;
}

inline std::vector<ValidationRecord> moment_records(const std::string& id, const std::string& anchor,
                                                    const exact::SleParams& p,
                                                    const loewner::PsiBatch& batch,
                                                    const std::vector<double>& lambdas,
                                                    std::uint64_t seed, bool stderr_check) {
  std::vector<ValidationRecord> out;
  for (double lambda : lambdas) {
    const auto m = loewner::moment_from_batch(batch, lambda, seed);
    const double ex = exact::sle_derivative_moment(lambda, p);
    const std::string in = sle_inputs(p, lambda) + " " + kv("n", static_cast<double>(batch.samples.size()));
    auto r = report::make_record(id + ".lambda" + tag(lambda), anchor, in, ex, m.mean, 3.0,
                                 ToleranceKind::Sigma, m.stderr_);
    char note[160];
    std::snprintf(note, sizeof note, "z=%.3f accepted=%zu swallowed=%zu not_converged=%zu", (m.mean - ex) / m.stderr_,
                  batch.accepted, batch.swallowed, batch.not_converged);
    r.note = note;
    out.push_back(r);
    if (stderr_check) {
      out.push_back(report::make_record(id + ".lambda" + tag(lambda) + ".stderr_ratio", anchor, in, 0.0,
                                        m.stderr_ / ex, 0.02, ToleranceKind::AtMost));
    }
  }
  return out;
}

inline void loewner_headline(Runner& run, std::size_t n) {
  const char* anchor = "derivative moment formula E[psi'(1)^lambda] = F(alpha)/F(sqrt kappa)";
  const auto tuples = headline_tuples();
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    const auto p = tuples[k];
    const std::string id = "loewner.moment." + tag(p.kappa) + "_" + tag(p.rho_minus) + "_" +
                           tag(p.rho_plus);
    run.check(id, anchor, sle_inputs(p, -1.0), [&] {
      const std::uint64_t seed = derive_seed(run.cfg().seed, 100 + k);
      const auto batch = loewner::sample_psi_primes(p, n, loewner::SimConfig{}, seed, run.cfg().workers);
      auto out = moment_records(id, anchor, p, batch, {-1.0, -0.5}, seed, true);
      double lo = exact::kInfinity;
      for (double v : batch.accepted_values()) lo = std::min(lo, v);
      auto r = report::make_record(id + ".psi_prime_above_one", "psi'(1) > 1 almost surely", sle_inputs(p, 0.0),
                                   1.0, lo, 1.0, ToleranceKind::AtLeast);
      r.pass = lo > 1.0;
      r.note = "minimum accepted value";
      out.push_back(r);
      out.push_back(report::make_record(id + ".acceptance", "estimator acceptance fraction", sle_inputs(p, 0.0),
                                        0.95, batch.acceptance(), 0.95, ToleranceKind::AtLeast));
      return out;
    });
  }
}

inline void loewner_tail(Runner& run, std::size_t n) {
  const exact::SleParams p{kTailKappa, kTailRhoMinus, kTailRhoPlus};
  const char* anchor = "tail law P[psi'(1) > y] = y^(-lambda0 + o(1))";
  run.check("loewner.tail_slope", anchor, sle_inputs(p, 0.0), [&] {
    const std::uint64_t seed = derive_seed(run.cfg().seed, 200);
    const auto batch = loewner::sample_psi_primes(p, n, loewner::SimConfig{}, seed, run.cfg().workers);
    const auto fit = loewner::fit_tail(batch.accepted_values(), 10.0, 1000.0);
    auto r = report::make_record("loewner.tail_slope", anchor,
                                 sle_inputs(p, 0.0) + " y=(10,1000) " + kv("n", static_cast<double>(n)),
                                 -exact::lambda0(p), fit.slope, 0.15, ToleranceKind::Relative);
    char note[160];
    std::snprintf(note, sizeof note, "slope stderr %.4f; accepted=%zu swallowed=%zu not_converged=%zu",
                  fit.slope_stderr, batch.accepted, batch.swallowed, batch.not_converged);
    r.note = note;
    return std::vector{r};
  });
}

// Empirical variance against kappa T with its large-sample standard error.
inline void loewner_driving_checks(Runner& run, std::size_t n) {
  const auto cfg = run.cfg();
  run.check("loewner.driving.brownian_variance", "driving function W = sqrt(kappa) B without force points",
            "kappa=2 T=1", [&] {
              const exact::SleParams p{2.0, 0.0, 0.0};
              const double T = 1.0;
              const std::uint64_t seed = derive_seed(cfg.seed, 300);
              std::vector<double> w(n);
              parallel_for(
                  n,
                  [&](std::size_t i) {
                    w[i] = loewner::sample_driving(p, loewner::SimConfig{}, T, seed, i).W.back();
                  },
                  cfg.workers);
              std::vector<double> sq(n);
              for (std::size_t i = 0; i < n; ++i) sq[i] = w[i] * w[i];
              const auto est = stats::mean_stderr(sq);
              return std::vector{report::make_record("loewner.driving.brownian_variance",
                                                     "driving function W = sqrt(kappa) B without force points",
                                                     join({"kappa=2 T=1", kv("n", static_cast<double>(n))}),
                                                     p.kappa * T, est.mean, 3.0, ToleranceKind::Sigma, est.stderr_)};
            });

  run.check("loewner.driving.bessel_marginal", "force-point gap is a Bessel process", "kappa=2 rho_plus=2", [&] {
    const exact::SleParams p{2.0, 0.0, 2.0};
    const double T = 1.0;
    const double dim = 1.0 + 2.0 * (p.rho_plus + 2.0) / p.kappa;
    const std::uint64_t seed = derive_seed(cfg.seed, 301);
    std::vector<double> x(n);
    parallel_for(
        n,
        [&](std::size_t i) {
          const auto d = loewner::sample_driving(p, loewner::SimConfig{}, T, seed, i);
          x[i] = (d.V_plus.back() - d.W.back()) / std::sqrt(p.kappa * d.times.back());
        },
        cfg.workers);
    const auto ks = stats::ks_one_sample(x, [dim](double v) {
      return v <= 0.0 ? 0.0 : boost::math::gamma_p(0.5 * dim, 0.5 * v * v);
    });
    auto r = report::make_record("loewner.driving.bessel_marginal", "force-point gap is a Bessel process",
                                 join({"kappa=2 rho_minus=0 rho_plus=2 T=1", kv("dimension", dim),
                                       kv("n", static_cast<double>(n))}),
                                 0.01, ks.p_value, 0.01, ToleranceKind::AtLeast);
    r.note = "KS p-value against the chi marginal";
    return std::vector{r};
  });

  run.check("loewner.driving.scaling", "Brownian scaling of the driving process", "kappa=3 rho=(1,0.5)", [&] {
    const exact::SleParams p{3.0, 1.0, 0.5};
    loewner::SimConfig c1, c4;
    c4.dt = 4.0 * c1.dt;
    const std::uint64_t s1 = derive_seed(cfg.seed, 302), s4 = derive_seed(cfg.seed, 303);
    std::vector<double> a(n), b(n);
    parallel_for(
        n,
        [&](std::size_t i) {
          const auto d1 = loewner::sample_driving(p, c1, 1.0, s1, i);
          const auto d4 = loewner::sample_driving(p, c4, 4.0, s4, i);
          a[i] = d1.W.back() / std::sqrt(d1.times.back());
          b[i] = d4.W.back() / std::sqrt(d4.times.back());
        },
        cfg.workers);
    const auto ks = stats::ks_two_sample(a, b);
    auto r = report::make_record("loewner.driving.scaling", "Brownian scaling of the driving process",
                                 join({"kappa=3 rho_minus=1 rho_plus=0.5", "(T,dt)=(1,0.02) vs (4,0.08)",
                                       kv("n", static_cast<double>(n))}),
                                 0.01, ks.p_value, 0.01, ToleranceKind::AtLeast);
    r.note = "KS p-value of W_T/sqrt(T)";
    return std::vector{r};
  });
}

// Two independent estimates agree within a combined 3 sigma.
inline ValidationRecord agreement_record(const std::string& id, const std::string& anchor, const std::string& inputs,
                                         const loewner::MomentEstimate& a, const loewner::MomentEstimate& b) {
  const double sigma = std::hypot(a.stderr_, b.stderr_);
  auto r = report::make_record(id, anchor, inputs, a.mean, b.mean, 3.0, ToleranceKind::Sigma, sigma);
  char note[96];
  std::snprintf(note, sizeof note, "shift %.3g = %.2f combined sigma", b.mean - a.mean, (b.mean - a.mean) / sigma);
  r.note = note;
  return r;
}

inline void loewner_refinement_checks(Runner& run, std::size_t n) {
  const auto cfg = run.cfg();
  const exact::SleParams p{3.0, 0.0, 0.0};
  run.check("loewner.refinement.dt_halving", "step-size refinement", sle_inputs(p, -1.0), [&] {
    loewner::SimConfig fine;
    fine.dt = 0.5 * loewner::SimConfig{}.dt;
    const auto a = loewner::estimate_moment(p, -1.0, n, loewner::SimConfig{}, derive_seed(cfg.seed, 400), cfg.workers);
    const auto b = loewner::estimate_moment(p, -1.0, n, fine, derive_seed(cfg.seed, 401), cfg.workers);
    return std::vector{agreement_record("loewner.refinement.dt_halving", "step-size refinement",
                                        sle_inputs(p, -1.0) + " dt=0.02 vs 0.01", a, b)};
  });
  run.check("loewner.refinement.start_eps", "start from separated force points", sle_inputs(p, -1.0), [&] {
    loewner::SimConfig wide;
    wide.eps_scale = 10.0 * loewner::SimConfig{}.eps_scale;
    const auto a = loewner::estimate_moment(p, -1.0, n, loewner::SimConfig{}, derive_seed(cfg.seed, 402), cfg.workers);
    const auto b = loewner::estimate_moment(p, -1.0, n, wide, derive_seed(cfg.seed, 403), cfg.workers);
    return std::vector{agreement_record("loewner.refinement.start_eps", "start from separated force points",
                                        sle_inputs(p, -1.0) + " eps x10", a, b)};
  });

  // With kappa = 2 (rho = gamma^2 - gamma beta) the composition relation reads
  // m(rho_e + rho_m + 2, rho_p) = m(rho_e, rho_m + rho_p + 2) m(rho_m, rho_p).
  run.check("loewner.composition", "derivative moment composition relation", "kappa=2 lambda=-0.5", [&] {
    const double lambda = -0.5;
    const exact::SleParams joined{2.0, 2.0, 0.0}, left{2.0, 0.0, 2.0}, right{2.0, 0.0, 0.0};
    const auto a = loewner::estimate_moment(joined, lambda, n, {}, derive_seed(cfg.seed, 404), cfg.workers);
    const auto b = loewner::estimate_moment(left, lambda, n, {}, derive_seed(cfg.seed, 405), cfg.workers);
    const auto c = loewner::estimate_moment(right, lambda, n, {}, derive_seed(cfg.seed, 406), cfg.workers);
    loewner::MomentEstimate prod;
    prod.mean = b.mean * c.mean;
    prod.stderr_ = std::hypot(b.stderr_ * c.mean, c.stderr_ * b.mean);
    return std::vector{agreement_record("loewner.composition", "derivative moment composition relation",
                                        "kappa=2 lambda=-0.5: (2;2,0) vs (2;0,2)*(2;0,0)", a, prod)};
  });

  run.check("loewner.swallowing.boundary_touching", "boundary-touching regime rho_+ < kappa/2 - 2",
            "kappa=3 rho_plus=-1", [&] {
              const exact::SleParams q{3.0, 0.0, -1.0};
              const std::size_t m = std::min<std::size_t>(n, 400);
              const auto batch = loewner::sample_psi_primes(q, m, {}, derive_seed(cfg.seed, 407), cfg.workers);
              auto r = report::make_record("loewner.swallowing.boundary_touching",
                                           "boundary-touching regime rho_+ < kappa/2 - 2",
                                           join({"kappa=3 rho_minus=0 rho_plus=-1", kv("n", static_cast<double>(m))}),
                                           0.0, static_cast<double>(batch.swallowed) / m, 0.0,
                                           ToleranceKind::AtLeast);
              r.pass = batch.swallowed > 0;
              r.note = "fraction of paths that swallow 1";
              return std::vector{r};
            });

  run.check("loewner.determinism", "reproducible per-sample streams", "kappa=3 rho=(1,0.5)", [&] {
    const exact::SleParams q{3.0, 1.0, 0.5};
    const std::size_t m = std::min<std::size_t>(n, 500);
    const auto a = loewner::estimate_moment(q, -0.5, m, {}, derive_seed(cfg.seed, 408), 1);
    const auto b = loewner::estimate_moment(q, -0.5, m, {}, derive_seed(cfg.seed, 408), 0);
    auto r = report::make_record("loewner.determinism", "reproducible per-sample streams",
                                 sle_inputs(q, -0.5) + " one worker vs default", a.mean, b.mean, 0.0,
                                 ToleranceKind::Absolute);
    r.pass = a.mean == b.mean && a.stderr_ == b.stderr_;
    return std::vector{r};
  });

  // For W = 0 the map is g_t(z) = sqrt(z^2 + 4t) and psi'(1) = 2.
  run.check("loewner.small_kappa", "deterministic slit limit", "kappa=0.01", [&] {
    const exact::SleParams q{0.01, 0.0, 0.0};
    const std::size_t m = std::min<std::size_t>(n, 500);
    const auto batch = loewner::sample_psi_primes(q, m, {}, derive_seed(cfg.seed, 409), cfg.workers);
    const auto est = stats::mean_stderr(batch.accepted_values());
    return std::vector{
        report::make_record("loewner.small_kappa.mc", "deterministic slit limit", "kappa=0.01 rho=0 mean psi'(1)",
                            2.0, est.mean, 0.01, ToleranceKind::Relative),
        report::make_record("loewner.small_kappa.exact", "deterministic slit limit",
                            "kappa=0.01 rho=0 lambda=-1", 0.5, exact::sle_derivative_moment(-1.0, q), 0.01,
                            ToleranceKind::Relative)};
  });
}

inline void loewner_suite(Runner& run) {
  const auto& s = run.cfg().sizes;
  loewner_headline(run, s.sle_n);
  loewner_tail(run, s.tail_n);
  loewner_driving_checks(run, std::min<std::size_t>(s.aux_n, 5000));
  loewner_refinement_checks(run, s.aux_n);
}

// ---------------------------------------------------------------------------
// fieldsim

inline constexpr std::array<std::pair<double, double>, 3> kEquivalencePairs = {{{0.5, 1.0}, {1.0, 0.5}, {2.0, 2.0}}};

struct GmcPoint {
  double gamma, beta, mu1, mu2, L;
};

// Moment exponents 1.17 and 1.13: the estimator keeps a finite variance.
inline std::vector<GmcPoint> reflection_points() {
  const double q12 = exact::q_of_gamma(1.2), q08 = exact::q_of_gamma(0.8);
  return {{1.2, q12 - 0.7, 1.0, 0.0, 24.0}, {0.8, q08 - 0.45, 1.0, 0.5, 50.0}};
}

struct IntervalPoint {
  double gamma, beta, alpha;
};

inline std::vector<IntervalPoint> interval_points() { return {{1.0, 0.5, 2.9}, {1.2, 1.0, 2.0}}; }

inline void fieldsim_equivalence(Runner& run, std::size_t n) {
  const char* anchor = "conditioned drifted Brownian motions agree in law";
  for (std::size_t k = 0; k < kEquivalencePairs.size(); ++k) {
    const auto [a, M] = kEquivalencePairs[k];
    const std::string id = "fieldsim.equivalence.a" + tag(a) + "_M" + tag(M);
    run.check(id, anchor, join({kv("a", a), kv("M", M)}), [&, a = a, M = M, k] {
      const auto rep = fieldsim::equivalence_test_prop24(a, M, n, derive_seed(run.cfg().seed, 500 + k), 0.01,
                                                         run.cfg().workers);
      std::vector<ValidationRecord> out;
      for (int f = 0; f < 4; ++f) {
        auto r = report::make_record(id + "." + fieldsim::kFunctionalNames[f], anchor,
                                     join({kv("a", a), kv("M", M), kv("n", static_cast<double>(n))}), 0.01,
                                     rep.ks[f].p_value, 0.01, ToleranceKind::AtLeast);
        r.note = "two-sample KS p-value, D=" + tag(rep.ks[f].statistic);
        out.push_back(r);
      }
      return out;
    });
  }
}

inline void fieldsim_quadrature(Runner& run) {
  run.check("fieldsim.tail_time_integral", "time integral of Gaussian tail = 1/(2a^2)", "a in {0.25..4}", [&] {
    Worst w;
    for (double a : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      w.update(std::abs(fieldsim::gaussian_tail_time_integral(a) * 2.0 * a * a - 1.0), kv("a", a));
    }
    return std::vector{max_residual_record("fieldsim.tail_time_integral", "time integral of Gaussian tail = 1/(2a^2)",
                                           "a in {0.25, 0.5, 1, 2, 4}", w, 1e-10)};
  });
  run.check("fieldsim.level_mass", "mass of {X_1(0) > -M} = exp(2aM)/(4a^3)", "a,M grid", [&] {
    Worst w;
    for (double a : {0.5, 1.0, 2.0}) {
      for (double M : {0.5, 1.0, 2.0}) {
        const double ex = std::exp(2.0 * a * M) / (4.0 * a * a * a);
        w.update(rel_diff(fieldsim::x1_mass_above(a, M), ex), kv("a", a) + " " + kv("M", M));
      }
    }
    return std::vector{max_residual_record("fieldsim.level_mass", "mass of {X_1(0) > -M} = exp(2aM)/(4a^3)",
                                           "a, M in {0.5, 1, 2}", w, 1e-10)};
  });
}

inline void fieldsim_conditioned_mean(Runner& run, std::size_t n) {
  const char* anchor = "drifted Brownian motion conditioned to stay negative";
  run.check("fieldsim.conditioned_mean", anchor, "a=0.5 t=1", [&] {
    const double a = 0.5, t = 1.0;
    quad::Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-12;
    const double ex = quad::integrate_to_infinity(
                          [&](double y) { return -y * fieldsim::conditioned_drift_density(a, t, -y); }, 0.0, opt)
                          .value;
    const std::uint64_t seed = derive_seed(run.cfg().seed, 600);
    std::vector<double> v(n);
    parallel_for(
        n, [&](std::size_t i) { v[i] = fieldsim::sample_conditioned_drift_bm(a, t, 0.25, seed, i).values.back(); },
        run.cfg().workers);
    const auto est = stats::mean_stderr(v);
    return std::vector{report::make_record("fieldsim.conditioned_mean", anchor,
                                           join({"a=0.5 t=1", kv("n", static_cast<double>(n))}), ex, est.mean, 3.0,
                                           ToleranceKind::Sigma, est.stderr_)};
  });
}

inline void fieldsim_first_moment(Runner& run, std::size_t n) {
  const char* anchor = "boundary chaos mean mass";
  run.check("fieldsim.first_moment.line", anchor, "beta=2/gamma", [&] {
    std::vector<ValidationRecord> out;
    for (double gamma : {0.8, 1.0, 1.4}) {
      const double beta = 2.0 / gamma;
      out.push_back(report::make_record("fieldsim.first_moment.line." + tag(gamma), anchor,
                                        join({kv("gamma", gamma), "beta=2/gamma"}),
                                        exact::reflection_bar(beta, {1.0, 0.0}, gamma),
                                        fieldsim::expected_line_mass(beta, gamma), 1e-6, ToleranceKind::Relative));
    }
    return out;
  });
  run.check("fieldsim.first_moment.window", anchor, "gamma=1 beta=Q-1 L=8", [&] {
    const double gamma = 1.0, beta = exact::q_of_gamma(gamma) - 1.0;
    const fieldsim::StripGridSpec spec{8.0, 1024, false};
    const fieldsim::StripLateralSampler lat(spec);
    const std::uint64_t seed = derive_seed(run.cfg().seed, 700);
    std::vector<double> mass(n);
    parallel_for(
        n,
        [&](std::size_t i) {
          mass[i] = fieldsim::gmc_boundary_measure(fieldsim::sample_strip_boundary_field(beta, lat, gamma, seed, i),
                                                   gamma)
                        .lower_mass();
        },
        run.cfg().workers, 8);
    const auto est = stats::mean_stderr(mass);
    const double ex = fieldsim::expected_window_mass(beta, spec, gamma);
    auto r = report::make_record("fieldsim.first_moment.window", anchor,
                                 join({"gamma=1 beta=Q-1 L=8 cells=1024", kv("n", static_cast<double>(n))}), ex,
                                 est.mean, 0.05, ToleranceKind::Relative);
    r.sigma = est.stderr_;
    return std::vector{r};
  });
}

inline ValidationRecord gmc_record(const std::string& id, const std::string& anchor, const std::string& inputs,
                                   double expected, const fieldsim::GmcMomentEstimate& est) {
  auto r = report::make_record(id, anchor, inputs, expected, est.extrapolated.mean, 0.10, ToleranceKind::Relative);
  r.sigma = est.extrapolated.stderr_;
  char note[200];
  std::snprintf(note, sizeof note, "fine %.6g coarse %.6g stderr %.3g exponent %.4f%s", est.fine.mean,
                est.coarse.mean, est.extrapolated.stderr_, est.exponent, est.flagged ? " flagged" : "");
  r.note = note;
  return r;
}

inline void fieldsim_gmc(Runner& run, std::size_t n, std::size_t strip_cells, std::size_t interval_cells) {
  const char* refl = "reflection coefficient as a boundary chaos moment";
  const auto rp = reflection_points();
  for (std::size_t k = 0; k < rp.size(); ++k) {
    const auto pt = rp[k];
    const std::string id = "fieldsim.gmc.reflection." + std::to_string(k + 1);
    const std::string in = join({kv("gamma", pt.gamma), kv("beta", pt.beta), kv("mu1", pt.mu1), kv("mu2", pt.mu2),
                                 kv("L", pt.L), kv("cells", static_cast<double>(strip_cells)),
                                 kv("n", static_cast<double>(n))});
    run.check(id, refl, in, [&, pt, k] {
      const exact::BoundaryCosmology c{pt.mu1, pt.mu2};
      const auto est = fieldsim::mc_reflection_moment(pt.beta, c, pt.gamma, n, {pt.L, strip_cells, false},
                                                      derive_seed(run.cfg().seed, 800 + k),
                                                      fieldsim::kDefaultRichardsonOrder, run.cfg().workers);
      return std::vector{gmc_record(id, refl, in, exact::reflection_bar(pt.beta, c, pt.gamma), est)};
    });
  }
  const char* hb = "three-point constant as an interval chaos moment";
  const auto ip = interval_points();
  for (std::size_t k = 0; k < ip.size(); ++k) {
    const auto pt = ip[k];
    const std::string id = "fieldsim.gmc.interval." + std::to_string(k + 1);
    const std::string in = join({kv("gamma", pt.gamma), kv("beta", pt.beta), kv("alpha", pt.alpha),
                                 kv("cells", static_cast<double>(interval_cells)), kv("n", static_cast<double>(n))});
    run.check(id, hb, in, [&, pt, k] {
      const auto est = fieldsim::mc_interval_moment(pt.beta, pt.alpha, pt.gamma, n, {interval_cells, false},
                                                    derive_seed(run.cfg().seed, 900 + k),
                                                    fieldsim::kDefaultRichardsonOrder, run.cfg().workers);
      return std::vector{gmc_record(id, hb, in, exact::h_bar(pt.beta, pt.alpha, pt.gamma), est)};
    });
  }
}

inline void fieldsim_zeroth_moment(Runner& run) {
  run.check("fieldsim.gmc.zeroth_moment", "zeroth moment equals 1", "beta=Q-1e-3", [&] {
    const double gamma = 1.0, beta = exact::q_of_gamma(gamma) - 1e-3;
    const auto est = fieldsim::mc_reflection_moment(beta, {1.0, 0.0}, gamma, 50, {24.0, 1024, false},
                                                    derive_seed(run.cfg().seed, 950), 1.0, run.cfg().workers);
    std::vector<ValidationRecord> out;
    out.push_back(report::make_record("fieldsim.gmc.zeroth_moment.mc", "zeroth moment equals 1",
                                      "gamma=1 beta=Q-1e-3 n=50", 1.0, est.extrapolated.mean, 0.02,
                                      ToleranceKind::Relative));
    out.push_back(report::make_record("fieldsim.gmc.zeroth_moment.exact", "zeroth moment equals 1",
                                      "gamma=1 beta=Q-1e-3", 1.0, exact::reflection_bar(beta, {1.0, 0.0}, gamma), 0.02,
                                      ToleranceKind::Relative));
    const auto ie = fieldsim::mc_interval_moment(1.0, 2.0 * (exact::q_of_gamma(gamma) - 1.0), gamma, 20, {512, false},
                                                 derive_seed(run.cfg().seed, 951), 1.0, run.cfg().workers);
    out.push_back(report::make_record("fieldsim.gmc.zeroth_moment.interval", "zeroth moment equals 1",
                                      "gamma=1 beta=1 alpha=2(Q-beta)", 1.0, ie.extrapolated.mean, 1e-12,
                                      ToleranceKind::Absolute));
    return out;
  });
}

inline void fieldsim_suite(Runner& run) {
  const auto& s = run.cfg().sizes;
  fieldsim_quadrature(run);
  fieldsim_equivalence(run, s.ks_n);
  fieldsim_conditioned_mean(run, 20000);
  fieldsim_first_moment(run, 400);
  fieldsim_zeroth_moment(run);
  fieldsim_gmc(run, s.gmc_n, s.strip_cells, s.interval_cells);
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"specfun", "exact", "loewner", "fieldsim", "all"};
  return names;
}

inline std::vector<ValidationRecord> run_suite(const std::string& name, const SuiteConfig& cfg) {
  Runner run(cfg);
  const bool all = name == "all";
  if (all || name == "specfun") specfun_suite(run);
  if (all || name == "exact") exact_suite(run);
  if (all || name == "loewner") loewner_suite(run);
  if (all || name == "fieldsim") fieldsim_suite(run);
  if (!all && std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end()) {
    throw PreconditionError("unknown suite '" + name + "'");
  }
  return run.take();
}

// ---------------------------------------------------------------------------
// Moment sweep

struct SweepPoint {
  exact::SleParams params;
  double lambda = 0.0;
};

enum class SweepMode { Exact, Mc, Both };

struct SweepRow {
  SweepPoint point;
  double lambda0 = 0.0;
  std::optional<double> exact_value;
  std::optional<double> mc_mean, mc_stderr, z_score;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string error;
};

inline const char* kSweepHeader =
    "kappa,rho_minus,rho_plus,lambda,lambda0,exact_value,mc_mean,mc_stderr,n,z_score,seed,error";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? report::fmt(*v) : std::string(); };
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += report::fmt(r.point.params.kappa) + "," + report::fmt(r.point.params.rho_minus) + "," +
           report::fmt(r.point.params.rho_plus) + "," + report::fmt(r.point.lambda) + "," + report::fmt(r.lambda0) +
           "," + opt(r.exact_value) + "," + opt(r.mc_mean) + "," + opt(r.mc_stderr) + "," +
           (r.n ? std::to_string(r.n) : std::string()) + "," + opt(r.z_score) + "," +
           (r.seed ? std::to_string(r.seed) : std::string()) + "," + report::csv_field(r.error) + "\n";
  }
  return out;
}

// One row per point; rows sharing (kappa, rho_-, rho_+) share one batch of
// paths. Errors are recorded on the row and the sweep continues.
inline std::vector<SweepRow> sweep_moment(const std::vector<SweepPoint>& grid, SweepMode mode, std::size_t n,
                                          const loewner::SimConfig& sim, std::uint64_t seed, unsigned workers = 0) {
  std::vector<SweepRow> rows(grid.size());
  std::vector<std::optional<loewner::PsiBatch>> batches(grid.size());
  std::vector<std::size_t> owner(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    owner[i] = i;
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = grid[i].params;
      const auto& b = grid[j].params;
      if (a.kappa == b.kappa && a.rho_minus == b.rho_minus && a.rho_plus == b.rho_plus) {
        owner[i] = owner[j];
        break;
      }
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepRow& row = rows[i];
    row.point = grid[i];
    const auto& p = grid[i].params;
    try {
      exact::validate(p);
      row.lambda0 = exact::lambda0(p);
      if (mode != SweepMode::Mc || grid[i].lambda >= row.lambda0) {
        row.exact_value = exact::sle_derivative_moment(grid[i].lambda, p);
      }
      if (mode == SweepMode::Exact || grid[i].lambda >= row.lambda0) continue;
      row.seed = derive_seed(seed, owner[i]);
      if (grid[i].lambda == 0.0) {
        row.mc_mean = 1.0;
        row.mc_stderr = 0.0;
        row.n = n;
      } else {
        auto& b = batches[owner[i]];
        if (!b) b = loewner::sample_psi_primes(p, n, sim, row.seed, workers);
        const auto m = loewner::moment_from_batch(*b, grid[i].lambda, row.seed);
        row.mc_mean = m.mean;
        row.mc_stderr = m.stderr_;
        row.n = m.n;
        if (m.flagged) row.error = "flagged: acceptance below 95% or lambda > 0";
      }
      if (row.exact_value) {
        row.z_score = *row.mc_stderr > 0.0 ? (*row.mc_mean - *row.exact_value) / *row.mc_stderr : 0.0;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

}  // namespace weldbench::suites
