#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "weldbench/errors.hpp"
#include "weldbench/quadrature.hpp"

namespace weldbench::specfun {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

struct DoubleGammaParam {
  double b;
  double q;

  explicit DoubleGammaParam(double b_) : b(b_), q(b_ + 1.0 / b_) {
    if (!(b_ > 0.0) || !std::isfinite(b_)) {
      throw PreconditionError("double gamma parameter b must be positive and finite");
    }
  }
  DoubleGammaParam dual() const { return DoubleGammaParam(1.0 / b); }
};

namespace detail {

// B_{2k} / (2k (2k-1)) for k = 1..10.
inline constexpr std::array<double, 10> kStirlingCoeffs = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0};

inline cplx stirling(cplx z) {
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx power = inv;
  for (double c : kStirlingCoeffs) {
    series += c * power;
    power *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + kHalfLog2Pi + series;
}

inline cplx log_gamma_right(cplx z) {
  cplx shift = 0.0;
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  return stirling(z) - shift;
}

// exp(z) - 1 without cancellation for small |z|.
inline cplx expm1(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double em1 = std::expm1(x);
  const double s = std::sin(0.5 * y);
  return {em1 * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

}  // namespace detail

// Log of the Gamma function, continuous in z off the negative real axis.
inline cplx log_gamma(cplx z) {
  if (z.real() <= 0.5) {
    const double nearest = std::round(z.real());
    if (nearest <= 0.0 && std::abs(z - cplx(nearest, 0.0)) < 1e-12) {
      throw PoleError("log_gamma: argument at a pole of Gamma");
    }
    return std::log(kPi) - std::log(std::sin(kPi * z)) - detail::log_gamma_right(1.0 - z);
  }
  return detail::log_gamma_right(z);
}

inline double gamma_real(double x) { return std::exp(log_gamma(cplx(x, 0.0))).real(); }

// Gamma(c)Gamma(c-a-b) / (Gamma(c-a)Gamma(c-b)).
inline cplx gauss_2f1_at_one(cplx a, cplx b, cplx c) {
  if (!((c - a - b).real() > 0.0)) {
    throw PreconditionError("gauss_2f1_at_one requires Re(c - a - b) > 0");
  }
  if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return 1.0;
  return std::exp(log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b));
}

namespace detail {

inline constexpr double kSeriesCut = 0.1;
inline constexpr int kSeriesTerms = 24;

// Integral of the double gamma integrand over (0, kSeriesCut], from its
// power series. The 1/t^2 and 1/t parts of the three terms cancel exactly.
inline cplx double_gamma_head(double b, cplx w) {
  constexpr int K = kSeriesTerms + 2;
  std::array<double, K> p{};
  {
    std::array<double, K> pu{}, pv{};
    const double u = 0.5 * b;
    const double v = 0.5 / b;
    double fact = 1.0;  // (2i+1)!
    double up = 1.0, vp = 1.0;
    for (int i = 0; 2 * i < K; ++i) {
      if (i > 0) fact *= (2.0 * i) * (2.0 * i + 1.0);
      pu[2 * i] = up / fact;
      pv[2 * i] = vp / fact;
      up *= u * u;
      vp *= v * v;
    }
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j <= i; ++j) p[i] += pu[j] * pv[i - j];
    }
  }
  std::array<cplx, K> a{}, d{};
  {
    cplx term = -w;
    for (int k = 0; k < K; ++k) {
      a[k] = term;
      term *= -w / static_cast<double>(k + 2);
    }
  }
  for (int k = 0; k < K; ++k) {
    cplx acc = a[k];
    for (int i = 1; i <= k; ++i) acc -= p[i] * d[k - i];
    d[k] = acc;
  }
  const cplx half_w2 = 0.5 * w * w;
  cplx total = 0.0;
  double delta_pow = 1.0;
  double inv_fact = 1.0;
  for (int m = 1; m < K - 1; ++m) {
    delta_pow *= kSeriesCut;
    inv_fact /= m;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const cplx c = d[m + 1] - half_w2 * sign * inv_fact;
    total += c * (delta_pow / m);
  }
  return total;
}

}  // namespace detail

// ln Gamma_b(z) from its integral representation, Re z > 0.
inline cplx log_double_gamma(double b, cplx z) {
  const DoubleGammaParam par(b);
  if (!(z.real() > 0.0)) {
    throw PreconditionError("log_double_gamma integral requires Re z > 0");
  }
  const double q = par.q;
  const cplx w = z - 0.5 * q;
  if (w == cplx(0.0, 0.0)) return 0.0;
  const cplx half_w2 = 0.5 * w * w;

  auto near = [&](double t) -> cplx {
    const double s = 4.0 * std::sinh(0.5 * b * t) * std::sinh(0.5 * t / b);
    return (detail::expm1(-w * t) / s - half_w2 * std::exp(-t) + w / t) / t;
  };
  // Beyond t = 1 the w/t^2 piece is integrated analytically.
  auto far = [&](double t) -> cplx {
    const double den = std::expm1(-b * t) * std::expm1(-t / b);
    const cplx num = std::exp(-z * t) - std::exp(-0.5 * q * t);
    return (num / den - half_w2 * std::exp(-t)) / t;
  };

  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-14;
  cplx total = detail::double_gamma_head(b, w);
  total += quad::integrate(near, detail::kSeriesCut, 1.0, opt).value;
  const double rate = std::min({z.real(), 0.5 * q, 1.0});
  const double tail_tol = 1e-16 * std::max(1.0, std::abs(total));
  total += quad::integrate_panels_to_infinity(far, 1.0, std::max(1.0, 0.5 / rate), tail_tol,
                                              opt, 400)
               .value;
  total += w;
  return total;
}

// Distance from z to the lattice of poles {-n b - m / b}, n, m = 0..50.
inline double pole_distance(double b, cplx z) {
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 50; ++n) {
    for (int m = 0; m <= 50; ++m) {
      best = std::min(best, std::abs(z + n * b + m / b));
    }
  }
  return best;
}

// ln Gamma_b(z) on the whole plane minus the poles, extending the integral by
// Gamma_b(z) = Gamma_b(z + s) Gamma(s z) s^{1/2 - s z} / sqrt(2 pi), s in {b, 1/b}.
// `shift` selects s; zero picks max(b, 1/b).
inline cplx log_double_gamma_continued(double b, cplx z, double shift = 0.0) {
  const DoubleGammaParam par(b);
  if (pole_distance(b, z) < 1e-10) {
    throw PoleError("double_gamma: argument within 1e-10 of a pole");
  }
  const double s = shift > 0.0 ? shift : std::max(b, 1.0 / b);
  if (std::abs(s - b) > 1e-15 * b && std::abs(s - 1.0 / b) > 1e-15 / b) {
    throw PreconditionError("double_gamma shift must be b or 1/b");
  }
  constexpr double kDirectMin = 0.5;
  cplx acc = 0.0;
  const double log_s = std::log(s);
  while (z.real() < kDirectMin) {
    acc += log_gamma(s * z) - kHalfLog2Pi + (0.5 - s * z) * log_s;
    z += s;
  }
  return acc + log_double_gamma(b, z);
}

inline cplx double_gamma(double b, cplx z) {
  const cplx lg = log_double_gamma_continued(b, z);
  if (std::abs(lg.real()) > 700.0) {
    throw OverflowError("double_gamma: magnitude outside double range; use the log form");
  }
  return std::exp(lg);
}

inline cplx log_double_sine(double b, cplx z) {
  const double q = b + 1.0 / b;
  return log_double_gamma_continued(b, z) - log_double_gamma_continued(b, q - z);
}

inline cplx double_sine(double b, cplx z) {
  const cplx ls = log_double_sine(b, z);
  if (std::abs(ls.real()) > 700.0) {
    throw OverflowError("double_sine: magnitude outside double range; use the log form");
  }
  return std::exp(ls);
}

}  // namespace weldbench::specfun
