#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "weldbench/errors.hpp"
#include "weldbench/exact.hpp"
#include "weldbench/parallel.hpp"
#include "weldbench/rng.hpp"
#include "weldbench/stats.hpp"

namespace weldbench::loewner {

using exact::SleParams;

struct SimConfig {
  // Step factor: each step has length dt * min(X_-, X_+)^2 / kappa, where X_-
  // and X_+ are the distances from the driving point to the force points.
  // The length is relative to the local scale, not capped in absolute terms.
  double dt = 0.02;
  // Capacity time at which the first convergence check is made.
  double T = 1e4;
  // Largest capacity time reached by extending T a decade at a time.
  double T_max = 1e7;
  // Accepted when psi' changed by less than this over the last decade.
  double tail_tol = 1e-3;
  // Force points start at -+eps with eps = eps_scale * sqrt(dt).
  double eps_scale = 1e-3;
  // g_t(1) - V_t^+ below swallow_eps * g_t'(1) (a normalized derivative above
  // 1/swallow_eps) counts as swallowing of the point 1.
  double swallow_eps = 1e-12;
  // Hard cap on the number of steps of one path.
  std::uint64_t max_steps = 50'000'000;
};

inline void validate(const SimConfig& c) {
  if (!(c.dt > 0.0 && c.dt <= 1.0)) throw PreconditionError("dt must lie in (0, 1]");
  if (!(c.T > 0.0) || !(c.T_max >= c.T)) throw PreconditionError("need 0 < T <= T_max");
  if (!(c.tail_tol > 0.0)) throw PreconditionError("tail_tol must be positive");
  if (!(c.eps_scale > 0.0)) throw PreconditionError("eps_scale must be positive");
}

inline double start_eps(const SimConfig& c) { return c.eps_scale * std::sqrt(c.dt); }

// Distances from the driving point to both force points and the tracked point
// 1, plus log g_t'(1).
struct FlowState {
  double t = 0.0;
  double w = 0.0;
  double x_minus = 0.0;  // W - V^-
  double x_plus = 0.0;   // V^+ - W
  double y = 1.0;        // g(1) - V^+
  double log_gprime = 0.0;
  std::uint64_t reflections = 0;
  bool swallowed = false;

  double g() const { return w + x_plus + y; }
  double v_plus() const { return w + x_plus; }
  double v_minus() const { return w - x_minus; }
  double psi_estimate() const { return std::exp(log_gprime) / y; }
};

inline FlowState initial_state(const SimConfig& c) {
  FlowState s;
  const double eps = start_eps(c);
  s.x_minus = eps;
  s.x_plus = eps;
  s.y = 1.0 - eps;
  return s;
}

// Loewner flow for time h with the driving point frozen; exact.
inline void frozen_flow(FlowState& s, double h) {
  const double u = s.x_plus + s.y;
  const double xp = std::sqrt(s.x_plus * s.x_plus + 4.0 * h);
  const double un = std::sqrt(u * u + 4.0 * h);
  s.y = s.y * (u + s.x_plus) / (un + xp);
  s.log_gprime -= 0.5 * std::log1p(4.0 * h / (u * u));
  s.x_plus = xp;
  s.x_minus = std::sqrt(s.x_minus * s.x_minus + 4.0 * h);
}

// Driving increment; force points reflect if overshot, and an overshoot of
// V^+ eats into g(1) - V^+.
inline void apply_increment(FlowState& s, double dw, double swallow_eps) {
  s.w += dw;
  s.x_minus += dw;
  s.x_plus -= dw;
  if (s.x_minus < 0.0) {
    s.x_minus = -s.x_minus;
    ++s.reflections;
  }
  if (s.x_plus < 0.0) {
    s.x_plus = -s.x_plus;
    s.y -= 2.0 * s.x_plus;
    ++s.reflections;
  }
  if (s.y <= swallow_eps * std::exp(s.log_gprime)) s.swallowed = true;
}

// With rho_- = 0 the left force point does not feed back into W or into the
// tracked point, so only X_+ sets the local scale.
inline double step_length(const FlowState& s, const SleParams& p, const SimConfig& c) {
  const double m = p.rho_minus == 0.0 ? s.x_plus : std::min(s.x_minus, s.x_plus);
  return c.dt * m * m / p.kappa;
}

// Force-point drift over time tau, integrating dX = rho/X dt exactly on each
// side and moving W by the combined displacement.
inline void drift_move(FlowState& s, const SleParams& p, double tau, double swallow_eps) {
  const double pull_minus =
      p.rho_minus == 0.0
          ? 0.0
          : std::sqrt(std::max(0.0, s.x_minus * s.x_minus + 2.0 * p.rho_minus * tau)) - s.x_minus;
  const double pull_plus =
      p.rho_plus == 0.0
          ? 0.0
          : std::sqrt(std::max(0.0, s.x_plus * s.x_plus + 2.0 * p.rho_plus * tau)) - s.x_plus;
  apply_increment(s, pull_minus - pull_plus, swallow_eps);
}

// One step of length h as a symmetric splitting: half Loewner flow, half
// drift, Brownian increment, half drift, half Loewner flow.
inline void advance(FlowState& s, const SleParams& p, const SimConfig& c, double h, double z) {
  frozen_flow(s, 0.5 * h);
  drift_move(s, p, 0.5 * h, c.swallow_eps);
  apply_increment(s, std::sqrt(p.kappa * h) * z, c.swallow_eps);
  drift_move(s, p, 0.5 * h, c.swallow_eps);
  if (!s.swallowed) frozen_flow(s, 0.5 * h);
  s.t += h;
}

struct DrivingProcess {
  std::vector<double> times;
  std::vector<double> W;
  std::vector<double> V_minus;
  std::vector<double> V_plus;
  SleParams params{};
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint64_t reflections = 0;
  bool rejected = false;
};

// Driving triple (W, V^-, V^+) on the adaptive step grid up to capacity T.
inline DrivingProcess sample_driving(const SleParams& p, const SimConfig& c, double T,
                                     std::uint64_t seed, std::uint64_t index = 0) {
  exact::validate(p);
  validate(c);
  DrivingProcess d;
  d.params = p;
  d.seed = seed;
  d.index = index;
  SampleStream rng(seed, index);
  FlowState s = initial_state(c);
  auto record = [&] {
    d.times.push_back(s.t);
    d.W.push_back(s.w);
    d.V_minus.push_back(s.v_minus());
    d.V_plus.push_back(s.v_plus());
  };
  record();
  std::uint64_t steps = 0;
  while (s.t < T) {
    double h = step_length(s, p, c);
    if (!(h > 0.0) || ++steps > c.max_steps) {
      d.rejected = true;
      break;
    }
    h = std::min(h, T - s.t);
    advance(s, p, c, h, rng.normal());
    s.swallowed = false;  // the tracked point is handled by track_point
    record();
  }
  d.reflections = s.reflections;
  return d;
}

struct TrackedPoint {
  std::vector<double> g;
  std::vector<double> gprime;
  std::optional<double> swallowed;
};

// g_t(1) and g_t'(1) along a recorded driving path, with the same splitting
// as the simulator: half flow at the old driving value, half at the new one.
inline TrackedPoint track_point(const DrivingProcess& d, double swallow_eps = 1e-12) {
  TrackedPoint tp;
  const std::size_t n = d.times.size();
  tp.g.reserve(n);
  tp.gprime.reserve(n);
  double g = 1.0;
  double log_gp = 0.0;
  tp.g.push_back(g);
  tp.gprime.push_back(1.0);
  auto flow = [&](double w, double h) {
    const double u = g - w;
    const double un = std::sqrt(u * u + 4.0 * h);
    log_gp -= 0.5 * std::log1p(4.0 * h / (u * u));
    g = w + un;
  };
  for (std::size_t i = 1; i < n; ++i) {
    const double h = d.times[i] - d.times[i - 1];
    if (!tp.swallowed) {
      flow(d.W[i - 1], 0.5 * h);
      flow(d.W[i], 0.5 * h);
      if (g - d.V_plus[i] <= swallow_eps * std::exp(log_gp)) tp.swallowed = d.times[i];
    }
    tp.g.push_back(g);
    tp.gprime.push_back(std::exp(log_gp));
  }
  return tp;
}

struct PsiPrime {
  double value = std::numeric_limits<double>::quiet_NaN();
  double tail_change = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// g_T'(1) / (g_T(1) - V_T^+) at the last recorded time, with its relative
// change since T/10.
inline PsiPrime psi_prime(const DrivingProcess& d, const TrackedPoint& tp, double tail_tol) {
  PsiPrime out;
  if (d.times.size() < 2 || tp.swallowed) return out;
  const std::size_t last = d.times.size() - 1;
  const double T = d.times[last];
  auto ratio = [&](std::size_t i) { return tp.gprime[i] / (tp.g[i] - d.V_plus[i]); };
  out.value = ratio(last);
  const auto it = std::lower_bound(d.times.begin(), d.times.end(), 0.1 * T);
  const std::size_t k = static_cast<std::size_t>(it - d.times.begin());
  out.tail_change = std::abs(out.value - ratio(k)) / out.value;
  out.converged = out.tail_change < tail_tol;
  return out;
}

enum class SampleStatus : std::uint8_t { Accepted, NotConverged, Swallowed, StepUnderflow };

struct PsiSample {
  double value = std::numeric_limits<double>::quiet_NaN();
  double tail_change = std::numeric_limits<double>::infinity();
  double final_time = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t reflections = 0;
  SampleStatus status = SampleStatus::NotConverged;
};

// Simulates one path without recording it and returns the psi'(1) estimate.
inline PsiSample simulate_psi_prime(const SleParams& p, const SimConfig& c, std::uint64_t seed,
                                    std::uint64_t index) {
  SampleStream rng(seed, index);
  FlowState s = initial_state(c);
  PsiSample out;
  double checkpoint = 0.1 * c.T;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (;;) {
    double h = step_length(s, p, c);
    if (!(h > 0.0) || out.steps >= c.max_steps) {
      out.status = SampleStatus::StepUnderflow;
      break;
    }
    bool at_checkpoint = false;
    if (s.t + h >= checkpoint) {
      h = checkpoint - s.t;
      at_checkpoint = true;
    }
    advance(s, p, c, h, rng.normal());
    ++out.steps;
    if (s.swallowed) {
      out.status = SampleStatus::Swallowed;
      break;
    }
    if (!at_checkpoint) continue;
    s.t = checkpoint;
    const double r = s.psi_estimate();
    if (checkpoint >= c.T) {
      out.value = r;
      out.tail_change = std::abs(r - previous) / r;
      if (out.tail_change < c.tail_tol) {
        out.status = SampleStatus::Accepted;
        break;
      }
      if (checkpoint * 10.0 > c.T_max * (1.0 + 1e-12)) {
        out.status = SampleStatus::NotConverged;
        break;
      }
    }
    previous = r;
    checkpoint *= 10.0;
  }
  out.final_time = s.t;
  out.reflections = s.reflections;
  return out;
}

struct PsiBatch {
  std::vector<PsiSample> samples;
  std::size_t accepted = 0;
  std::size_t not_converged = 0;
  std::size_t swallowed = 0;
  std::size_t underflow = 0;
  double max_tail_change = 0.0;
  std::uint64_t total_steps = 0;

  double acceptance() const {
    return samples.empty() ? 0.0 : static_cast<double>(accepted) / samples.size();
  }
  std::vector<double> accepted_values() const {
    std::vector<double> v;
    v.reserve(accepted);
    for (const auto& s : samples) {
      if (s.status == SampleStatus::Accepted) v.push_back(s.value);
    }
    return v;
  }
};

inline PsiBatch sample_psi_primes(const SleParams& p, std::size_t n, const SimConfig& c,
                                  std::uint64_t seed, unsigned workers = 0) {
  exact::validate(p);
  validate(c);
  PsiBatch batch;
  batch.samples.resize(n);
  parallel_for(
      n, [&](std::size_t i) { batch.samples[i] = simulate_psi_prime(p, c, seed, i); }, workers);
  for (const auto& s : batch.samples) {
    batch.total_steps += s.steps;
    switch (s.status) {
      case SampleStatus::Accepted:
        ++batch.accepted;
        batch.max_tail_change = std::max(batch.max_tail_change, s.tail_change);
        break;
      case SampleStatus::NotConverged: ++batch.not_converged; break;
      case SampleStatus::Swallowed: ++batch.swallowed; break;
      case SampleStatus::StepUnderflow: ++batch.underflow; break;
    }
  }
  return batch;
}

struct MomentEstimate {
  double lambda = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::size_t rejected = 0;
  double truncation_diag = 0.0;
  std::uint64_t seed = 0;
  bool flagged = false;  // acceptance below 95%, or lambda > 0
};

inline MomentEstimate moment_from_batch(const PsiBatch& batch, double lambda, std::uint64_t seed) {
  MomentEstimate m;
  m.lambda = lambda;
  m.seed = seed;
  m.rejected = batch.samples.size() - batch.accepted;
  m.truncation_diag = batch.max_tail_change;
  m.flagged = batch.acceptance() < 0.95 || lambda > 0.0;
  if (lambda == 0.0) {
    m.mean = 1.0;
    m.n = batch.accepted;
    return m;
  }
  std::vector<double> v = batch.accepted_values();
  for (double& x : v) x = std::pow(x, lambda);
  const auto est = stats::mean_stderr(v);
  m.mean = est.mean;
  m.stderr_ = est.stderr_;
  m.n = est.n;
  return m;
}

inline MomentEstimate estimate_moment(const SleParams& p, double lambda, std::size_t n,
                                      const SimConfig& c, std::uint64_t seed,
                                      unsigned workers = 0) {
  if (lambda == 0.0) {
    MomentEstimate m;
    m.mean = 1.0;
    m.n = n;
    m.seed = seed;
    return m;
  }
  return moment_from_batch(sample_psi_primes(p, n, c, seed, workers), lambda, seed);
}

// Empirical survival function P[psi' > y] at the given thresholds.
inline std::vector<double> survival(std::vector<double> values, const std::vector<double>& ys) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(ys.size());
  for (double y : ys) {
    const auto it = std::upper_bound(values.begin(), values.end(), y);
    out.push_back(static_cast<double>(values.end() - it) / values.size());
  }
  return out;
}

struct TailFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> ys;
  std::vector<double> survival;
};

// Log-log slope of the survival function on [y_lo, y_hi], weighted by counts.
inline TailFit fit_tail(const std::vector<double>& values, double y_lo, double y_hi,
                        int points = 9) {
  TailFit fit;
  for (int i = 0; i < points; ++i) {
    fit.ys.push_back(y_lo * std::pow(y_hi / y_lo, static_cast<double>(i) / (points - 1)));
  }
  fit.survival = survival(values, fit.ys);
  std::vector<double> lx, ly, w;
  for (std::size_t i = 0; i < fit.ys.size(); ++i) {
    if (fit.survival[i] <= 0.0) continue;
    lx.push_back(std::log(fit.ys[i]));
    ly.push_back(std::log(fit.survival[i]));
    w.push_back(fit.survival[i] * values.size());
  }
  if (lx.size() < 2) throw ConvergenceError("tail fit has fewer than two nonempty bins", 0.0);
  const auto line = stats::fit_line(lx, ly, w);
  fit.slope = line.slope;
  fit.slope_stderr = line.slope_stderr;
  return fit;
}

}  // namespace weldbench::loewner
