#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "weldbench/errors.hpp"

namespace weldbench::quad {

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208292238031, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
double magnitude(const T& v) {
  using std::abs;
  return static_cast<double>(abs(v));
}

template <typename T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename T, typename F>
Panel<T> gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kKronrodWeights[10];
  T gauss = T{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += sum * kKronrodWeights[j];
    if (j % 2 == 1) gauss += sum * kGaussWeights[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

template <typename T>
struct Result {
  T value{};
  double error = 0.0;
  int evaluations = 0;
};

struct Options {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_panels = 2000;
};

// Globally adaptive Gauss-Kronrod (G10/K21) on a finite interval. The
// integrand may return double or std::complex<double>.
template <typename F>
auto integrate(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  if (a == b) return out;
  std::priority_queue<detail::Panel<T>> heap;
  auto first = detail::gk21<T>(f, a, b);
  out.evaluations = 21;
  T total = first.value;
  double err = first.error;
  heap.push(first);
  int panels = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
    if (panels >= opt.max_panels) {
      throw ConvergenceError("adaptive quadrature exceeded panel budget", err);
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw ConvergenceError("adaptive quadrature reached machine resolution", err);
    }
    auto left = detail::gk21<T>(f, worst.a, mid);
    auto right = detail::gk21<T>(f, mid, worst.b);
    out.evaluations += 42;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the round-off accumulated by the incremental updates.
  T resum{};
  double rerr = 0.0;
  while (!heap.empty()) {
    resum += heap.top().value;
    rerr += heap.top().error;
    heap.pop();
  }
  out.value = resum;
  out.error = rerr;
  return out;
}

// Integral over [a, inf) via the substitution x = a + u / (1 - u).
template <typename F>
auto integrate_to_infinity(F&& f, double a, const Options& opt = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  auto mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    const double x = a + u / one_minus;
    return f(x) * (1.0 / (one_minus * one_minus));
  };
  return integrate(mapped, 0.0, 1.0, opt);
}

// Integral over [a, inf) on geometrically growing panels [a, a+w], [a+w, a+3w],
// ... stopping once a panel contributes less than `tail_tol`. Suited to
// integrands with slow algebraic or exponential decay.
template <typename F>
auto integrate_panels_to_infinity(F&& f, double a, double first_width, double tail_tol,
                                  const Options& opt = {}, int max_panels = 200)
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  double lo = a;
  double width = first_width;
  int quiet = 0;
  for (int k = 0; k < max_panels; ++k) {
    auto piece = integrate(f, lo, lo + width, opt);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
    if (detail::magnitude(piece.value) < tail_tol) {
      if (++quiet >= 2) return out;
    } else {
      quiet = 0;
    }
    lo += width;
    width *= 2.0;
  }
  throw ConvergenceError("semi-infinite panel integration did not settle", out.error);
}

}  // namespace weldbench::quad
