#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "weldbench/errors.hpp"
#include "weldbench/exact.hpp"
#include "weldbench/parallel.hpp"
#include "weldbench/quadrature.hpp"
#include "weldbench/rng.hpp"
#include "weldbench/stats.hpp"

namespace weldbench::fieldsim {

enum class Construction : std::uint8_t { Conditioned, ShiftedMaximum, TwoSidedDrift, AboveLevel };

struct ProcessSample {
  std::vector<double> times;
  std::vector<double> values;
  Construction meta = Construction::Conditioned;
};

// B_{v s} - a s conditioned to stay negative for all s > 0, evaluated at the
// increasing times s_k >= 0. The conditioned process is minus sqrt(v) times
// the norm of a three-dimensional Brownian motion with drift a / sqrt(v), so
// the values are exact at any times.
inline void conditioned_drift_values(double a, double v, std::span<const double> times,
                                     SampleStream& rng, std::span<double> out) {
  if (!(a > 0.0)) throw PreconditionError("conditioned drift needs a > 0");
  const double mu = a / std::sqrt(v);
  double gx = 0.0, gy = 0.0, gz = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double ds = times[k] - prev;
    if (ds < 0.0) throw PreconditionError("conditioned drift times must be increasing");
    if (ds > 0.0) {
      const double sd = std::sqrt(ds);
      gx += mu * ds + sd * rng.normal();
      gy += sd * rng.normal();
      gz += sd * rng.normal();
    }
    prev = times[k];
    out[k] = -std::sqrt(v) * std::sqrt(gx * gx + gy * gy + gz * gz);
  }
}

// Path on the uniform grid {0, dt, ..., horizon}.
inline ProcessSample sample_conditioned_drift_bm(double a, double horizon, double dt,
                                                 std::uint64_t seed, std::uint64_t index = 0,
                                                 double variance_scale = 1.0) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw PreconditionError("need horizon > 0 and dt > 0");
  ProcessSample out;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  out.times.resize(steps + 1);
  out.values.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) out.times[k] = k * dt;
  SampleStream rng(seed, index, 11);
  conditioned_drift_values(a, variance_scale, out.times, rng, out.values);
  return out;
}

// Density at x < 0 of the conditioned process at time t (unit variance
// scale), as the limit from 0 of the killed drifted-BM transition density
// reweighted by the harmonic function 1 - exp(-2 a y).
inline double conditioned_drift_density(double a, double t, double x) {
  if (x >= 0.0) return 0.0;
  const double y = -x;
  auto phi = [t](double u) { return std::exp(-0.5 * u * u / t) / std::sqrt(2.0 * std::numbers::pi * t); };
  return y / (a * t) * (phi(y - a * t) - phi(y + a * t));
}

// Integral over t > 0 of P[Z > a sqrt(t)], Z standard normal.
inline double gaussian_tail_time_integral(double a) {
  if (!(a > 0.0)) throw PreconditionError("gaussian_tail_time_integral needs a > 0");
  auto f = [a](double t) { return 0.5 * std::erfc(a * std::sqrt(t) / std::numbers::sqrt2); };
  quad::Options opt;
  opt.abs_tol = 1e-15 / (a * a);
  opt.rel_tol = 1e-13;
  return quad::integrate_panels_to_infinity(f, 0.0, 1.0 / (a * a), 1e-17 / (a * a), opt).value;
}

// Mass of {X_1(0) > -M} for the shifted-maximum construction: the measure of
// {c > -M} times the expected time the level-M process spends above -M.
inline double x1_mass_above(double a, double M) {
  return std::exp(2.0 * a * M) / (2.0 * a) * gaussian_tail_time_integral(a);
}

struct PathGrid {
  double dt = 0.01;
  std::size_t half = 0;  // times k dt for k = -half..half
  std::size_t size() const { return 2 * half + 1; }
};

inline PathGrid default_grid(double a, double dt = 0.01) {
  const double horizon = std::max(5.0, 10.0 / (a * a));
  return {dt, static_cast<std::size_t>(std::ceil(horizon / dt))};
}

// X_2 given X_2(0) > -M: start -M + Exp(2a), drifted BM on both sides.
inline ProcessSample sample_two_sided_drift(double a, double M, const PathGrid& g,
                                            SampleStream& rng) {
  ProcessSample s;
  s.meta = Construction::TwoSidedDrift;
  s.values.resize(g.size());
  s.times.resize(g.size());
  const double sd = std::sqrt(g.dt);
  const double c = -M + rng.exponential(2.0 * a);
  s.values[g.half] = c;
  for (std::size_t k = 1; k <= g.half; ++k) {
    s.values[g.half + k] = s.values[g.half + k - 1] + sd * rng.normal() - a * g.dt;
  }
  for (std::size_t k = 1; k <= g.half; ++k) {
    s.values[g.half - k] = s.values[g.half - k + 1] + sd * rng.normal() - a * g.dt;
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    s.times[k] = (static_cast<double>(k) - static_cast<double>(g.half)) * g.dt;
  }
  return s;
}

// X_1 given X_1(0) > -M, realized as A^M recentred at a time tau drawn from
// Lebesgue measure restricted to {A^M > -M}. The pair (tau, W_tau) is drawn
// first from its joint law, which is proportional to the Gaussian density of
// W_tau on {W_tau > a tau} times dtau: tau = (chi_3 sqrt(U) / a)^2 and
// W_tau = chi_3 sqrt(tau). The path then is a Brownian bridge on (0, tau), a
// conditioned drifted BM before 0, and a free drifted BM after tau.
inline ProcessSample sample_shifted_maximum(double a, double M, const PathGrid& g,
                                            SampleStream& rng) {
  ProcessSample s;
  s.meta = Construction::ShiftedMaximum;
  s.values.resize(g.size());
  s.times.resize(g.size());
  const double n1 = rng.normal(), n2 = rng.normal(), n3 = rng.normal();
  const double chi3 = std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
  const double u = chi3 * std::sqrt(rng.uniform_open());
  const double tau = u * u / (a * a);
  const double w_tau = chi3 * std::sqrt(tau);
  const double sd = std::sqrt(g.dt);
  s.values[g.half] = w_tau - a * tau - M;
  for (std::size_t k = 1; k <= g.half; ++k) {
    s.values[g.half + k] = s.values[g.half + k - 1] + sd * rng.normal() - a * g.dt;
  }
  double s_prev = tau, w_prev = w_tau;
  std::size_t k = 1;
  for (; k <= g.half; ++k) {
    const double sk = tau - k * g.dt;
    if (sk <= 0.0) break;
    const double mean = w_prev * sk / s_prev;
    const double var = sk * (s_prev - sk) / s_prev;
    const double w = mean + std::sqrt(var) * rng.normal();
    s.values[g.half - k] = w - a * sk - M;
    s_prev = sk;
    w_prev = w;
  }
  if (k <= g.half) {
    std::vector<double> sigma(g.half - k + 1), vals(g.half - k + 1);
    for (std::size_t j = 0; j < sigma.size(); ++j) sigma[j] = (k + j) * g.dt - tau;
    conditioned_drift_values(a, 1.0, sigma, rng, vals);
    for (std::size_t j = 0; j < sigma.size(); ++j) s.values[g.half - k - j] = vals[j] - M;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.times[i] = (static_cast<double>(i) - static_cast<double>(g.half)) * g.dt;
  }
  return s;
}

inline constexpr std::array<const char*, 4> kFunctionalNames = {
    "value_at_zero", "maximum", "max_minus_value_at_zero", "time_above_level"};

inline std::array<double, 4> path_functionals(const ProcessSample& s, double M, double dt) {
  const std::size_t mid = s.values.size() / 2;
  const double v0 = s.values[mid];
  const double mx = *std::max_element(s.values.begin(), s.values.end());
  std::size_t above = 0;
  for (double v : s.values) above += v > -M ? 1 : 0;
  return {v0, mx, mx - v0, dt * static_cast<double>(above)};
}

struct EquivalenceReport {
  double a = 0.0;
  double M = 0.0;
  std::size_t n = 0;
  std::array<stats::KsResult, 4> ks{};
  std::array<std::vector<double>, 4> two_sided;
  std::array<std::vector<double>, 4> shifted_maximum;
  double min_p_value() const {
    double p = 1.0;
    for (const auto& r : ks) p = std::min(p, r.p_value);
    return p;
  }
};

// Draws n paths from each construction on a common grid and compares the
// four path functionals with two-sample KS tests.
inline EquivalenceReport equivalence_test_prop24(double a, double M, std::size_t n,
                                                 std::uint64_t seed, double dt = 0.01,
                                                 unsigned workers = 0) {
  if (!(a > 0.0)) throw PreconditionError("equivalence test needs a > 0");
  if (n < 2) throw PreconditionError("equivalence test needs n >= 2");
  const PathGrid g = default_grid(a, dt);
  EquivalenceReport rep;
  rep.a = a;
  rep.M = M;
  rep.n = n;
  std::vector<std::array<double, 4>> fa(n), fb(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        SampleStream ra(seed, i, 21);
        fa[i] = path_functionals(sample_two_sided_drift(a, M, g, ra), M, g.dt);
        SampleStream rb(seed, i, 22);
        fb[i] = path_functionals(sample_shifted_maximum(a, M, g, rb), M, g.dt);
      },
      workers, 16);
  for (int f = 0; f < 4; ++f) {
    rep.two_sided[f].resize(n);
    rep.shifted_maximum[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      rep.two_sided[f][i] = fa[i][f];
      rep.shifted_maximum[f][i] = fb[i][f];
    }
    rep.ks[f] = stats::ks_two_sample(rep.two_sided[f], rep.shifted_maximum[f]);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Log-correlated boundary fields on uniform grids.

namespace detail {

inline constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Mean of f(s - t) for s, t uniform on two cells of width d whose centres are
// r apart: the triangular law on [r - d, r + d].
template <typename F>
double triangle_mean(F&& f, double r, double d) {
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double lo = side == 0 ? r - d : r;
    const double half = 0.5 * d;
    const double mid = lo + half;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double u = mid + half * kGlNodes[i];
      const double w = side == 0 ? (u - (r - d)) / (d * d) : ((r + d) - u) / (d * d);
      total += half * kGlWeights[i] * w * f(u);
    }
  }
  return total;
}

// Mean of log|s - t| for cells j apart.
inline double cell_mean_log(std::size_t j, double d) {
  if (j >= 4) return triangle_mean([](double u) { return std::log(u); }, j * d, d);
  auto F = [](double u) { return u == 0.0 ? 0.0 : 0.5 * u * u * std::log(std::abs(u)) - 0.75 * u * u; };
  const double r = j * d;
  return (F(r + d) - 2.0 * F(r) + F(r - d)) / (d * d);
}

}  // namespace detail

// Kernel -2 log|r| + smooth(r), averaged over pairs of cells of width d.
inline double cell_averaged_log_kernel(std::size_t j, double d,
                                       const std::function<double(double)>& smooth) {
  return -2.0 * detail::cell_mean_log(j, d) +
         detail::triangle_mean([&](double u) { return smooth(std::abs(u)); }, j * d, d);
}

// Covariances of the lateral part of the strip boundary field. On one line
// the covariance is -2 log(1 - e^{-|r|}); across the two lines it is
// -2 log(1 + e^{-|r|}).
inline double strip_same_line_kernel(double r) { return -2.0 * std::log(-std::expm1(-std::abs(r))); }
inline double strip_cross_line_kernel(double r) { return -2.0 * std::log1p(std::exp(-std::abs(r))); }

namespace detail {

inline double same_line_smooth(double r) {
  return r < 1e-300 ? 0.0 : -2.0 * std::log(-std::expm1(-r) / r);
}
// (h_lower + h_upper) / sqrt(2): -2 log(1 - e^{-2|r|}).
inline double sum_smooth(double r) {
  return r < 1e-300 ? -2.0 * std::log(2.0) : -2.0 * std::log(-std::expm1(-2.0 * r) / r);
}
// (h_lower - h_upper) / sqrt(2): -2 log tanh(|r|/2).
inline double difference_smooth(double r) {
  return r < 1e-300 ? 2.0 * std::log(2.0) : -2.0 * std::log(std::tanh(0.5 * r) / r);
}

// Lags past which the exponentially decaying strip kernels fall below 1e-17.
inline std::size_t strip_max_lag(double d) { return static_cast<std::size_t>(std::ceil(42.0 / d)) + 1; }

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const;
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline void FftwPlanDeleter::operator()(fftw_plan_s* p) const {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(p);
}

}  // namespace detail

// Stationary Gaussian vector on n grid cells by circulant embedding. The
// covariance row is periodized over the embedding length, so an exactly
// positive definite kernel gives nonnegative eigenvalues up to rounding.
class CirculantField {
 public:
  CirculantField(std::size_t n, const std::function<double(std::size_t)>& lag,
                 std::size_t max_lag)
      : n_(n) {
    if (n < 2) throw PreconditionError("circulant field needs at least two cells");
    m_ = 1;
    while (m_ < 4 * n) m_ *= 2;
    std::vector<double> cache(max_lag + 1);
    for (std::size_t j = 0; j <= max_lag; ++j) cache[j] = lag(j);
    row_.assign(m_, 0.0);
    const long long M = static_cast<long long>(m_);
    const long long K = static_cast<long long>(max_lag) / M + 2;
    for (std::size_t j = 0; j < m_; ++j) {
      double s = 0.0;
      for (long long k = -K; k <= K; ++k) {
        const long long l = std::llabs(static_cast<long long>(j) + k * M);
        if (l <= static_cast<long long>(max_lag)) s += cache[static_cast<std::size_t>(l)];
      }
      row_[j] = s;
    }
    {
      std::lock_guard<std::mutex> lock(detail::planner_mutex());
      std::vector<std::complex<double>> a(m_), b(m_);
      plan_.reset(fftw_plan_dft_1d(static_cast<int>(m_), reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    std::vector<std::complex<double>> in(m_), out(m_);
    for (std::size_t j = 0; j < m_; ++j) in[j] = row_[j];
    execute(in, out);
    scale_.resize(m_);
    double lmax = 0.0;
    min_eigenvalue_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m_; ++k) {
      const double l = out[k].real();
      lmax = std::max(lmax, l);
      min_eigenvalue_ = std::min(min_eigenvalue_, l);
      scale_[k] = std::sqrt(std::max(l, 0.0) / static_cast<double>(m_));
    }
    if (min_eigenvalue_ < -1e-8 * lmax) {
      throw ConsistencyError("circulant embedding has a materially negative eigenvalue");
    }
  }

  std::size_t size() const { return n_; }
  std::size_t embedding_size() const { return m_; }
  double covariance(std::size_t j) const { return row_[j]; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  // Two independent draws.
  void sample(SampleStream& rng, std::span<double> a, std::span<double> b) const {
    std::vector<std::complex<double>> in(m_), out(m_);
    for (std::size_t k = 0; k < m_; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      in[k] = scale_[k] * std::complex<double>(re, im);
    }
    execute(in, out);
    for (std::size_t i = 0; i < n_; ++i) {
      a[i] = out[i].real();
      if (!b.empty()) b[i] = out[i].imag();
    }
  }

 private:
  void execute(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) const {
    fftw_execute_dft(plan_.get(), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> row_;
  std::vector<double> scale_;
  double min_eigenvalue_ = 0.0;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan_;
};

// Dense Gaussian vector from a Cholesky factor; jitter up to 1e-10 trace / n
// is added if the factorization fails.
class DenseGaussianField {
 public:
  explicit DenseGaussianField(const Eigen::MatrixXd& cov) {
    const auto n = cov.rows();
    const double base = 1e-10 * cov.trace() / static_cast<double>(n);
    for (double jitter : {0.0, 1e-4 * base, 1e-2 * base, base}) {
      Eigen::MatrixXd c = cov;
      c.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(c);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        jitter_ = jitter;
        return;
      }
    }
    throw ConsistencyError("Cholesky factorization failed after jitter");
  }
  void sample(SampleStream& rng, std::span<double> out) const {
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * z;
    for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = x[i];
  }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

struct StripGridSpec {
  double L = 24.0;       // window [-L, L]
  std::size_t n = 8192;  // cells per line
  bool two_lines = false;

  double dx() const { return 2.0 * L / static_cast<double>(n); }
  double center(std::size_t i) const { return -L + (static_cast<double>(i) + 0.5) * dx(); }
};

inline void validate(const StripGridSpec& s) {
  if (!(s.L > 0.0) || s.n < 4 || s.n % 2 != 0) {
    throw PreconditionError("strip grid needs L > 0 and an even cell count >= 4");
  }
}

// Cell-averaged lateral covariances between cells j apart.
inline double strip_same_line_cov(std::size_t j, double d) {
  return cell_averaged_log_kernel(j, d, detail::same_line_smooth);
}
inline double strip_cross_line_cov(std::size_t j, double d) {
  return detail::triangle_mean([](double u) { return strip_cross_line_kernel(u); }, j * d, d);
}

// Full lateral covariance on the grid (lower line first, then the upper
// line when present).
inline Eigen::MatrixXd lateral_covariance_matrix(const StripGridSpec& s) {
  validate(s);
  const double d = s.dx();
  const std::size_t n = s.n;
  const std::size_t total = s.two_lines ? 2 * n : n;
  std::vector<double> same(n), cross(n);
  for (std::size_t j = 0; j < n; ++j) {
    same[j] = strip_same_line_cov(j, d);
    cross[j] = strip_cross_line_cov(j, d);
  }
  Eigen::MatrixXd c(total, total);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < total; ++k) {
      const std::size_t li = i % n, lk = k % n;
      const std::size_t j = li > lk ? li - lk : lk - li;
      c(i, k) = (i < n) == (k < n) ? same[j] : cross[j];
    }
  }
  return c;
}

// Lateral field sampler for one or both boundary lines of the strip. Both
// lines are built from the independent stationary fields (h_l + h_u)/sqrt 2
// and (h_l - h_u)/sqrt 2.
class StripLateralSampler {
 public:
  explicit StripLateralSampler(const StripGridSpec& s) : spec_(s) {
    validate(s);
    const double d = s.dx();
    const std::size_t max_lag = detail::strip_max_lag(d);
    if (s.two_lines) {
      sum_ = std::make_shared<CirculantField>(
          s.n, [d](std::size_t j) { return cell_averaged_log_kernel(j, d, detail::sum_smooth); }, max_lag);
      diff_ = std::make_shared<CirculantField>(
          s.n, [d](std::size_t j) { return cell_averaged_log_kernel(j, d, detail::difference_smooth); },
          max_lag);
      variance_ = 0.5 * (sum_->covariance(0) + diff_->covariance(0));
      pair_variance_ = 0.25 * (sum_->covariance(0) + sum_->covariance(1) + diff_->covariance(0) +
                               diff_->covariance(1));
    } else {
      same_ = std::make_shared<CirculantField>(
          s.n, [d](std::size_t j) { return strip_same_line_cov(j, d); }, max_lag);
      variance_ = same_->covariance(0);
      pair_variance_ = 0.5 * (same_->covariance(0) + same_->covariance(1));
    }
  }

  const StripGridSpec& spec() const { return spec_; }
  // Variance of one cell and of the average of two adjacent cells.
  double variance() const { return variance_; }
  double pair_variance() const { return pair_variance_; }

  void sample(SampleStream& rng, std::span<double> lower, std::span<double> upper) const {
    const std::size_t n = spec_.n;
    if (!spec_.two_lines) {
      same_->sample(rng, lower, {});
      return;
    }
    std::vector<double> s(n), dd(n);
    sum_->sample(rng, s, {});
    diff_->sample(rng, dd, {});
    const double r = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      lower[i] = r * (s[i] + dd[i]);
      upper[i] = r * (s[i] - dd[i]);
    }
  }

 private:
  StripGridSpec spec_;
  std::shared_ptr<CirculantField> same_, sum_, diff_;
  double variance_ = 0.0;
  double pair_variance_ = 0.0;
};

// Radial part Y_x = B_{2x} - (Q - beta)|x| conditioned negative on each side,
// at sorted positions.
inline void radial_values(double a, std::span<const double> x, SampleStream& rng,
                          std::span<double> out) {
  std::vector<double> pos_t, neg_t;
  std::vector<std::size_t> pos_i, neg_i;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      pos_t.push_back(x[i]);
      pos_i.push_back(i);
    } else if (x[i] < 0.0) {
      neg_t.push_back(-x[i]);
      neg_i.push_back(i);
    } else {
      out[i] = 0.0;
    }
  }
  std::reverse(neg_t.begin(), neg_t.end());
  std::reverse(neg_i.begin(), neg_i.end());
  std::vector<double> v(std::max(pos_t.size(), neg_t.size()));
  conditioned_drift_values(a, 2.0, pos_t, rng, v);
  for (std::size_t k = 0; k < pos_t.size(); ++k) out[pos_i[k]] = v[k];
  conditioned_drift_values(a, 2.0, neg_t, rng, v);
  for (std::size_t k = 0; k < neg_t.size(); ++k) out[neg_i[k]] = v[k];
}

struct BoundaryFieldGrid {
  StripGridSpec spec;
  double beta = 0.0;
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> radial;
  double lateral_variance = 0.0;
};

inline void check_thick(double beta, double gamma) {
  if (!(beta < exact::q_of_gamma(gamma))) throw PreconditionError("strip field needs beta < Q");
}

inline BoundaryFieldGrid sample_strip_boundary_field(double beta, const StripLateralSampler& lat,
                                                     double gamma, std::uint64_t seed,
                                                     std::uint64_t index = 0) {
  check_thick(beta, gamma);
  BoundaryFieldGrid f;
  f.spec = lat.spec();
  f.beta = beta;
  const std::size_t n = f.spec.n;
  f.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.x[i] = f.spec.center(i);
  f.lower.resize(n);
  if (f.spec.two_lines) f.upper.resize(n);
  f.radial.resize(n);
  f.lateral_variance = lat.variance();
  SampleStream rng(seed, index, 31);
  lat.sample(rng, f.lower, f.upper);
  radial_values(exact::q_of_gamma(gamma) - beta, f.x, rng, f.radial);
  return f;
}

inline BoundaryFieldGrid sample_strip_boundary_field(double beta, const StripGridSpec& spec,
                                                     double gamma, std::uint64_t seed) {
  return sample_strip_boundary_field(beta, StripLateralSampler(spec), gamma, seed);
}

struct GmcMeasure {
  std::vector<double> locations;
  std::vector<double> weights;        // lower line
  std::vector<double> upper_weights;  // upper line, empty on one line
  double gamma = 0.0;
  double dx = 0.0;

  double lower_mass() const { return stats::pairwise_sum(weights); }
  double upper_mass() const { return stats::pairwise_sum(upper_weights); }
};

// Atom i carries dx exp((gamma/2)(Y_i + h_i) - (gamma^2/8) Var h_i).
inline GmcMeasure gmc_boundary_measure(const BoundaryFieldGrid& f, double gamma) {
  GmcMeasure m;
  m.gamma = gamma;
  m.dx = f.spec.dx();
  m.locations = f.x;
  const double shift = -0.125 * gamma * gamma * f.lateral_variance;
  auto atoms = [&](const std::vector<double>& h, std::vector<double>& w) {
    w.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double e = 0.5 * gamma * (f.radial[i] + h[i]) + shift;
      if (e > 700.0) throw OverflowError("GMC atom weight overflows");
      w[i] = m.dx * std::exp(e);
    }
  };
  atoms(f.lower, m.weights);
  if (!f.upper.empty()) atoms(f.upper, m.upper_weights);
  return m;
}

// E[exp(c Y_x)] for the radial process with a = Q - beta; it is the mean
// density of the chaos measure on one line.
inline double radial_exponential_mean(double a, double c, double x) {
  const double t = std::abs(x);
  if (t == 0.0) return 1.0;
  // Y_t = -sqrt(2) R with R the norm of a 3-d Gaussian with mean a t / sqrt 2
  // and covariance t I.
  const double m = a * t / std::numbers::sqrt2;
  const double k = c * std::numbers::sqrt2;
  const double st = std::sqrt(t);
  auto f = [&](double r) {
    const double g1 = std::exp(-0.5 * (r - m) * (r - m) / t - k * r);
    const double g2 = std::exp(-0.5 * (r + m) * (r + m) / t - k * r);
    return r / m * (g1 - g2) / std::sqrt(2.0 * std::numbers::pi * t);
  };
  quad::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-12;
  const double lo = std::max(0.0, m - k * t - 12.0 * st);
  const double hi = m + 12.0 * st;
  double total = quad::integrate(f, 0.0, lo > 0.0 ? lo : hi, opt).value;
  if (lo > 0.0) total += quad::integrate(f, lo, hi, opt).value;
  total += quad::integrate_to_infinity(f, hi, opt).value;
  return total;
}

// Expected lower-line mass of the discrete measure on the window, and of the
// continuum measure on the whole line.
inline double expected_window_mass(double beta, const StripGridSpec& s, double gamma) {
  const double a = exact::q_of_gamma(gamma) - beta;
  double total = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) total += radial_exponential_mean(a, 0.5 * gamma, s.center(i));
  return total * s.dx();
}

inline double expected_line_mass(double beta, double gamma) {
  const double a = exact::q_of_gamma(gamma) - beta;
  auto f = [&](double t) { return radial_exponential_mean(a, 0.5 * gamma, t); };
  quad::Options opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-10;
  return 2.0 * quad::integrate_panels_to_infinity(f, 0.0, 1.0, 1e-14, opt).value;
}

struct GmcMomentEstimate {
  double exponent = 0.0;
  stats::MeanEstimate fine;
  stats::MeanEstimate coarse;
  stats::MeanEstimate extrapolated;
  double order = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool flagged = false;  // stderr / mean above 0.2
};

// Combines per-draw values at two resolutions, coupled through the same
// field, as fine + (fine - coarse) / (2^order - 1).
inline GmcMomentEstimate combine_resolutions(const std::vector<double>& fine,
                                             const std::vector<double>& coarse, double order) {
  GmcMomentEstimate out;
  out.order = order;
  out.n = fine.size();
  out.fine = stats::mean_stderr(fine);
  out.coarse = stats::mean_stderr(coarse);
  std::vector<double> ex(fine.size());
  const double f = 1.0 / (std::exp2(order) - 1.0);
  for (std::size_t i = 0; i < fine.size(); ++i) ex[i] = fine[i] + (fine[i] - coarse[i]) * f;
  out.extrapolated = stats::mean_stderr(ex);
  out.flagged = !(out.extrapolated.stderr_ <= 0.2 * std::abs(out.extrapolated.mean));
  return out;
}

inline constexpr double kDefaultRichardsonOrder = 1.0;

// Monte Carlo estimate of E[(mu_1 nu(R) + mu_2 nu(R + pi i))^{(2/gamma)(Q - beta)}]
// on the window [-L, L]. Each field is evaluated at cell width dx and, after
// averaging adjacent cells, at 2 dx; the two estimates are extrapolated.
inline GmcMomentEstimate mc_reflection_moment(double beta, const exact::BoundaryCosmology& cosmo,
                                              double gamma, std::size_t n, StripGridSpec spec,
                                              std::uint64_t seed,
                                              double order = kDefaultRichardsonOrder,
                                              unsigned workers = 0) {
  exact::validate(cosmo);
  const double Q = exact::q_of_gamma(gamma);
  if (!(beta > 0.5 * gamma && beta < Q)) {
    throw PreconditionError("reflection moment needs gamma/2 < beta < Q");
  }
  const double p = (2.0 / gamma) * (Q - beta);
  if (p > 1.2 + 1e-12) throw PreconditionError("moment exponent above 1.2");
  spec.two_lines = cosmo.mu2 > 0.0;
  const StripLateralSampler lat(spec);
  const std::size_t cells = spec.n;
  const double d = spec.dx();
  const double a = Q - beta;
  const double fine_shift = -0.125 * gamma * gamma * lat.variance();
  const double coarse_shift = -0.125 * gamma * gamma * lat.pair_variance();
  std::vector<double> half_grid(2 * cells - 1);
  for (std::size_t k = 0; k < half_grid.size(); ++k) half_grid[k] = -spec.L + 0.5 * (k + 1) * d;

  std::vector<double> fine(n), coarse(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        SampleStream rng(seed, i, 41);
        std::vector<double> lower(cells), upper(spec.two_lines ? cells : 0), y(half_grid.size());
        lat.sample(rng, lower, upper);
        radial_values(a, half_grid, rng, y);
        auto masses = [&](const std::vector<double>& h) {
          std::vector<double> wf(cells), wc(cells / 2);
          for (std::size_t c = 0; c < cells; ++c) {
            wf[c] = d * std::exp(0.5 * gamma * (y[2 * c] + h[c]) + fine_shift);
          }
          for (std::size_t c = 0; c < cells / 2; ++c) {
            const double hb = 0.5 * (h[2 * c] + h[2 * c + 1]);
            wc[c] = 2.0 * d * std::exp(0.5 * gamma * (y[4 * c + 1] + hb) + coarse_shift);
          }
          return std::pair{stats::pairwise_sum(wf), stats::pairwise_sum(wc)};
        };
        const auto [lf, lc] = masses(lower);
        double tf = cosmo.mu1 * lf, tc = cosmo.mu1 * lc;
        if (spec.two_lines) {
          const auto [uf, uc] = masses(upper);
          tf += cosmo.mu2 * uf;
          tc += cosmo.mu2 * uc;
        }
        fine[i] = std::pow(tf, p);
        coarse[i] = std::pow(tc, p);
      },
      workers, 8);
  GmcMomentEstimate out = combine_resolutions(fine, coarse, order);
  out.exponent = p;
  out.seed = seed;
  return out;
}

struct IntervalGridSpec {
  std::size_t n = 8192;  // cells on (0, 1)
  bool mirror = false;   // evaluate on the reflected grid x -> 1 - x
};

// Covariance between cells j apart on (0, 1) for the kernel 2 log_+(1/|r|),
// which agrees with -2 log|x - y| inside the interval and is positive
// definite on the line.
inline double interval_cov(std::size_t j, double d) {
  const double r = j * d;
  if (r + d <= 1.0) return -2.0 * detail::cell_mean_log(j, d);
  if (r - d >= 1.0) return 0.0;
  const double lo = r - d;
  double total = 0.0;
  auto piece = [&](double a, double b, auto weight) {
    if (!(b > a)) return;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < detail::kGlNodes.size(); ++i) {
      const double u = mid + half * detail::kGlNodes[i];
      total += half * detail::kGlWeights[i] * weight(u) * (-2.0 * std::log(u));
    }
  };
  auto rising = [&](double u) { return (u - lo) / (d * d); };
  auto falling = [&](double u) { return (r + d - u) / (d * d); };
  piece(lo, std::min(r, 1.0), rising);
  piece(r, 1.0, falling);
  return total;
}

inline void check_interval_params(double beta, double alpha, double gamma) {
  const double Q = exact::q_of_gamma(gamma);
  if (!(alpha > 0.0) || !(0.5 * alpha + beta > 0.5 * gamma) || !(beta < Q)) {
    throw PreconditionError("interval moment needs alpha > 0, alpha/2 + beta > gamma/2, beta < Q");
  }
  if (!(0.5 * gamma * beta < 1.0)) {
    throw PreconditionError("interval moment needs gamma beta / 2 < 1 for integrable endpoint weights");
  }
}

// Integral of x^{-g}(1 - x)^{-g} over each cell, g = gamma beta / 2.
inline std::vector<double> interval_cell_weights(double beta, double gamma, std::size_t n) {
  const double e = 1.0 - 0.5 * gamma * beta;
  std::vector<double> cum(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    cum[i] = boost::math::beta(e, e, static_cast<double>(i) / static_cast<double>(n));
  }
  std::vector<double> w(n);
  // Differences of the incomplete beta lose digits past the midpoint; use
  // the reflection to keep every cell accurate.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    w[i] = 2 * i < n ? cum[i + 1] - cum[i] : cum[j + 1] - cum[j];
  }
  return w;
}

// Monte Carlo estimate of E[nu((0, 1))^{(2/gamma)(Q - beta - alpha/2)}] for
// the chaos of the field with covariance -2 log|x - y| and density
// x^{-gamma beta/2}(1 - x)^{-gamma beta/2}, at two coupled resolutions.
inline GmcMomentEstimate mc_interval_moment(double beta, double alpha, double gamma, std::size_t n,
                                            const IntervalGridSpec& spec, std::uint64_t seed,
                                            double order = kDefaultRichardsonOrder,
                                            unsigned workers = 0) {
  check_interval_params(beta, alpha, gamma);
  if (spec.n < 4 || spec.n % 2 != 0) throw PreconditionError("interval grid needs an even cell count >= 4");
  const double Q = exact::q_of_gamma(gamma);
  const double p = (2.0 / gamma) * (Q - beta - 0.5 * alpha);
  const std::size_t cells = spec.n;
  const double d = 1.0 / static_cast<double>(cells);
  const CirculantField field(cells, [d](std::size_t j) { return interval_cov(j, d); }, cells + 1);
  const std::vector<double> w = interval_cell_weights(beta, gamma, cells);
  const double fine_shift = -0.125 * gamma * gamma * field.covariance(0);
  const double coarse_shift =
      -0.125 * gamma * gamma * 0.5 * (field.covariance(0) + field.covariance(1));
  std::vector<double> fine(n), coarse(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        SampleStream rng(seed, i, 51);
        std::vector<double> h(cells);
        field.sample(rng, h, {});
        if (spec.mirror) std::reverse(h.begin(), h.end());
        std::vector<double> wf(cells), wc(cells / 2);
        for (std::size_t c = 0; c < cells; ++c) wf[c] = w[c] * std::exp(0.5 * gamma * h[c] + fine_shift);
        for (std::size_t c = 0; c < cells / 2; ++c) {
          const double hb = 0.5 * (h[2 * c] + h[2 * c + 1]);
          wc[c] = (w[2 * c] + w[2 * c + 1]) * std::exp(0.5 * gamma * hb + coarse_shift);
        }
        fine[i] = std::pow(stats::pairwise_sum(wf), p);
        coarse[i] = std::pow(stats::pairwise_sum(wc), p);
      },
      workers, 8);
  GmcMomentEstimate out = combine_resolutions(fine, coarse, order);
  out.exponent = p;
  out.seed = seed;
  return out;
}

}  // namespace weldbench::fieldsim
