#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include "weldbench/errors.hpp"
#include "weldbench/specfun.hpp"

namespace weldbench::exact {

using specfun::cplx;
using specfun::kPi;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SleParams {
  double kappa;
  double rho_minus;
  double rho_plus;
};

inline void validate(const SleParams& p) {
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) {
    throw PreconditionError("kappa must be positive and finite");
  }
  if (!(p.rho_minus > -2.0)) throw PreconditionError("rho_minus must exceed -2");
  if (!(p.rho_plus > std::max(-2.0, 0.5 * p.kappa - 4.0))) {
    throw PreconditionError("rho_plus must exceed max(-2, kappa/2 - 4)");
  }
}

struct LqgParams {
  double gamma;
  double Q;
  double beta_minus;
  double beta_plus;
  double W_minus;
  double W_plus;

  static LqgParams from_betas(double gamma, double beta_minus, double beta_plus) {
    if (!(gamma > 0.0 && gamma < 2.0)) throw PreconditionError("gamma must lie in (0, 2)");
    LqgParams g{};
    g.gamma = gamma;
    g.Q = 0.5 * gamma + 2.0 / gamma;
    g.beta_minus = beta_minus;
    g.beta_plus = beta_plus;
    g.W_minus = gamma * (g.Q + 0.5 * gamma - beta_minus);
    g.W_plus = gamma * (g.Q + 0.5 * gamma - beta_plus);
    return g;
  }
  static LqgParams from_gamma(double gamma) { return from_betas(gamma, gamma, gamma); }
};

inline double q_of_gamma(double gamma) { return 0.5 * gamma + 2.0 / gamma; }

// Insertion for a disk of weight W.
inline double beta_of_weight(double W, double gamma) {
  return q_of_gamma(gamma) + 0.5 * gamma - W / gamma;
}

inline LqgParams to_lqg(const SleParams& p) {
  validate(p);
  if (!(p.kappa < 4.0)) {
    throw PreconditionError("SLE to LQG conversion needs kappa < 4; apply duality_map first");
  }
  const double gamma = std::sqrt(p.kappa);
  return LqgParams::from_betas(gamma, gamma - p.rho_minus / gamma, gamma - p.rho_plus / gamma);
}

inline SleParams to_sle(const LqgParams& g) {
  const double k = g.gamma * g.gamma;
  return {k, k - g.gamma * g.beta_minus, k - g.gamma * g.beta_plus};
}

inline double lambda0(const SleParams& p) {
  return (p.rho_plus + 2.0) * (p.rho_plus + 4.0 - 0.5 * p.kappa) / p.kappa;
}

inline double q_kappa(double kappa) {
  const double s = std::sqrt(kappa);
  return 0.5 * s + 2.0 / s;
}

// Solutions of 1 - (a/2)(Qk - a/2) = lambda, with Qk = sqrt(kappa)/2 + 2/sqrt(kappa).
inline std::pair<cplx, cplx> alpha_roots(double lambda, double kappa) {
  const double qk = q_kappa(kappa);
  const double disc = qk * qk - 4.0 * (1.0 - lambda);
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {cplx(qk - r, 0.0), cplx(qk + r, 0.0)};
  }
  const double r = std::sqrt(-disc);
  return {cplx(qk, -r), cplx(qk, r)};
}

inline SleParams duality_map(const SleParams& p) {
  if (!(p.kappa > 4.0)) throw PreconditionError("duality_map needs kappa > 4");
  validate(p);
  const double kt = 16.0 / p.kappa;
  return {kt, 0.5 * kt - 2.0 + 0.25 * kt * p.rho_minus, kt + 0.25 * kt * p.rho_plus - 4.0};
}

// log F(x, kappa, rho_-, rho_+).
inline cplx log_F(cplx x, const SleParams& p) {
  const double s = std::sqrt(p.kappa);
  const double b = 0.5 * s;
  const double rp = p.rho_plus / s;
  const double rs = (p.rho_minus + p.rho_plus) / s;
  const cplx a1 = 2.0 / s - 0.5 * s + rp + 0.5 * x;
  const cplx a2 = 4.0 / s + rp - 0.5 * x;
  const cplx a3 = 4.0 / s - 0.5 * s + rs + 0.5 * x;
  const cplx a4 = 6.0 / s + rs - 0.5 * x;
  using specfun::log_double_gamma_continued;
  return log_double_gamma_continued(b, a1) + log_double_gamma_continued(b, a2) -
         log_double_gamma_continued(b, a3) - log_double_gamma_continued(b, a4);
}

inline cplx F(cplx x, const SleParams& p) { return std::exp(log_F(x, p)); }

namespace detail {

inline double real_from_log(cplx log_value, double tol, const char* what) {
  const cplx v = std::exp(log_value);
  if (std::abs(v.imag()) > tol * std::max(1.0, std::abs(v))) {
    throw ConsistencyError(std::string(what) + ": imaginary residue above tolerance");
  }
  return v.real();
}

inline void check_roots(double v1, double v2, double tol, const char* what) {
  if (!(std::abs(v1 - v2) <= tol * std::max(std::abs(v1), std::abs(v2)))) {
    throw ConsistencyError(std::string(what) + ": the two alpha roots disagree");
  }
}

}  // namespace detail

// F(alpha)/F(sqrt(kappa)) for an arbitrary alpha, without the lambda shortcuts.
inline cplx moment_from_root(cplx alpha, const SleParams& p) {
  validate(p);
  return std::exp(log_F(alpha, p) - log_F(cplx(std::sqrt(p.kappa), 0.0), p));
}

// E[psi'(1)^lambda] as the ratio F(alpha)/F(sqrt(kappa)); +inf for lambda >= lambda0.
inline double sle_derivative_moment(double lambda, const SleParams& p) {
  validate(p);
  if (lambda >= lambda0(p)) return kInfinity;
  if (lambda == 0.0) return 1.0;
  const auto [r1, r2] = alpha_roots(lambda, p.kappa);
  const cplx base = log_F(cplx(std::sqrt(p.kappa), 0.0), p);
  const double v1 = detail::real_from_log(log_F(r1, p) - base, 1e-10, "sle_derivative_moment");
  const double v2 = detail::real_from_log(log_F(r2, p) - base, 1e-10, "sle_derivative_moment");
  detail::check_roots(v1, v2, 1e-10, "sle_derivative_moment");
  return 0.5 * (v1 + v2);
}

struct BoundaryCosmology {
  double mu1 = 1.0;
  double mu2 = 0.0;

  // sigma_j = Q/2 + i t_j with mu_j = exp(i pi gamma (sigma_j - Q/2)).
  cplx sigma(int j, double gamma) const {
    const double mu = j == 1 ? mu1 : mu2;
    if (!(mu > 0.0)) throw PreconditionError("sigma is defined only for positive mu");
    return {0.5 * q_of_gamma(gamma), -std::log(mu) / (kPi * gamma)};
  }
};

inline void validate(const BoundaryCosmology& c) {
  if (!(c.mu1 >= 0.0) || !(c.mu2 >= 0.0) || (c.mu1 == 0.0 && c.mu2 == 0.0)) {
    throw PreconditionError("cosmological constants must be nonnegative and not both zero");
  }
}

// log of x * Gamma_b(x), finite through x = 0.
inline cplx log_x_double_gamma(double b, double x) {
  return specfun::log_double_gamma_continued(b, cplx(x + b, 0.0)) - specfun::kHalfLog2Pi +
         specfun::log_gamma(cplx(b * x + 1.0, 0.0)) - (b * x + 0.5) * std::log(b);
}

// log of the normalized reflection coefficient. The 1/(Q - beta) factor is
// merged with Gamma_b(Q - beta) through the shift equation, so beta = Q needs
// no special treatment.
inline cplx log_reflection_bar(double beta, const BoundaryCosmology& c, double gamma) {
  validate(c);
  const double b = 0.5 * gamma;
  const double Q = q_of_gamma(gamma);
  const double x = Q - beta;
  const double p = (2.0 / gamma) * x;
  cplx out = (p - 0.5) * std::log(2.0 * kPi) + (0.5 * gamma * x - 0.5) * std::log(2.0 / gamma) -
             p * specfun::log_gamma(cplx(1.0 - 0.25 * gamma * gamma, 0.0)) +
             specfun::log_double_gamma_continued(b, cplx(beta - 0.5 * gamma, 0.0)) -
             log_x_double_gamma(b, x);
  if (c.mu1 > 0.0 && c.mu2 > 0.0) {
    const cplx s1 = c.sigma(1, gamma);
    const cplx s2 = c.sigma(2, gamma);
    out += cplx(0.0, kPi) * (s1 + s2 - Q) * x;
    out -= specfun::log_double_sine(b, 0.5 * beta + s2 - s1);
    out -= specfun::log_double_sine(b, 0.5 * beta + s1 - s2);
  } else {
    out += p * std::log(c.mu1 > 0.0 ? c.mu1 : c.mu2);
  }
  return out;
}

inline double reflection_bar(double beta, const BoundaryCosmology& c, double gamma) {
  return detail::real_from_log(log_reflection_bar(beta, c, gamma), 1e-9, "reflection_bar");
}

inline double reflection(double beta, const BoundaryCosmology& c, double gamma) {
  const double Q = q_of_gamma(gamma);
  const double arg = 1.0 - (2.0 / gamma) * (Q - beta);
  return -specfun::gamma_real(arg) * reflection_bar(beta, c, gamma);
}

inline cplx log_h_bar(double beta, double alpha, double gamma) {
  const double b = 0.5 * gamma;
  const double Q = q_of_gamma(gamma);
  const double p = (2.0 / gamma) * (Q - beta - 0.5 * alpha);
  using specfun::log_double_gamma_continued;
  auto lg = [&](double z) { return log_double_gamma_continued(b, cplx(z, 0.0)); };
  const cplx base = std::log(2.0 * kPi) - 0.25 * gamma * gamma * std::log(0.5 * gamma) -
                    specfun::log_gamma(cplx(1.0 - 0.25 * gamma * gamma, 0.0));
  return p * base + 2.0 * lg(0.5 * alpha) + lg(Q - beta + 0.5 * alpha) +
         lg(beta + 0.5 * alpha - 0.5 * gamma) - lg(2.0 / gamma) - 2.0 * lg(Q - beta) - lg(alpha);
}

inline double h_bar(double beta, double alpha, double gamma) {
  return detail::real_from_log(log_h_bar(beta, alpha, gamma), 1e-9, "h_bar");
}

inline double h_coefficient(double beta, double alpha, double gamma) {
  const double Q = q_of_gamma(gamma);
  return (2.0 / gamma) * specfun::gamma_real((2.0 / gamma) * (0.5 * alpha + beta - Q)) *
         h_bar(beta, alpha, gamma);
}

enum class DiskWeight { Two, HalfGammaSquared };

// Joint density of the left/right boundary lengths for the two weights with
// explicit mating-of-trees laws.
inline double disk_length_joint_density(DiskWeight w, double l, double r, double gamma) {
  if (!(l > 0.0) || !(r > 0.0)) throw PreconditionError("boundary lengths must be positive");
  if (!(gamma > 0.0 && gamma < 2.0)) throw PreconditionError("gamma must lie in (0, 2)");
  const double e = 4.0 / (gamma * gamma);
  if (w == DiskWeight::Two) {
    const double g = 1.0 - 0.25 * gamma * gamma;
    const double log_c = (e - 1.0) * std::log(2.0 * kPi) - std::log(g) -
                         e * specfun::log_gamma(cplx(g, 0.0)).real();
    return std::exp(log_c - (e + 1.0) * std::log(l + r));
  }
  const double lr = std::pow(l * r, e - 1.0);
  const double s = std::pow(l, e) + std::pow(r, e);
  return e * lr / (s * s);
}

inline void check_weight(double W, double gamma) {
  const double Q = q_of_gamma(gamma);
  if (!(W > 0.0 && W < gamma * Q)) throw PreconditionError("disk weight must lie in (0, gamma Q)");
}

// Density of mu1 L1 + mu2 L2 at l for a weight-W disk.
inline double disk_length_marginal_density(double W, const BoundaryCosmology& c, double l,
                                           double gamma) {
  check_weight(W, gamma);
  if (!(l > 0.0)) throw PreconditionError("length must be positive");
  const double beta = beta_of_weight(W, gamma);
  return reflection_bar(beta, c, gamma) * std::pow(l, -2.0 * W / (gamma * gamma));
}

// gamma / (2 (Q - beta)) R(beta; mu1, mu2): the Laplace transform of the
// boundary length law, regularized by the Taylor polynomial for thick disks.
inline double disk_laplace(double W, const BoundaryCosmology& c, double gamma) {
  check_weight(W, gamma);
  const double beta = beta_of_weight(W, gamma);
  const double p = 2.0 * W / (gamma * gamma) - 1.0;
  return specfun::gamma_real(-p) * reflection_bar(beta, c, gamma);
}

enum class Insertion { Gamma, Q };

inline double m_special(Insertion which, double lambda, double beta_plus, double gamma) {
  if (!(gamma > 0.0 && gamma < 2.0)) throw PreconditionError("gamma must lie in (0, 2)");
  const double Q = q_of_gamma(gamma);
  if (!(beta_plus < Q + 0.5 * gamma)) throw PreconditionError("beta_plus must be below Q + gamma/2");
  const SleParams sp{gamma * gamma, 0.0, gamma * gamma - gamma * beta_plus};
  if (lambda >= lambda0(sp)) return kInfinity;
  const double c = which == Insertion::Gamma ? 2.0 / gamma : 0.5 * gamma;
  auto value = [&](cplx alpha) {
    using specfun::log_gamma;
    return log_gamma(c * (Q - beta_plus + 0.5 * alpha)) +
           log_gamma(c * (2.0 * Q - beta_plus - 0.5 * alpha)) -
           log_gamma(cplx(c * (Q - beta_plus + 0.5 * gamma), 0.0)) -
           log_gamma(cplx(c * (Q - beta_plus + 2.0 / gamma), 0.0));
  };
  const auto [r1, r2] = alpha_roots(lambda, gamma * gamma);
  const double v1 = detail::real_from_log(value(r1), 1e-10, "m_special");
  const double v2 = detail::real_from_log(value(r2), 1e-10, "m_special");
  detail::check_roots(v1, v2, 1e-10, "m_special");
  return 0.5 * (v1 + v2);
}

// Same quantity through Gauss's summation theorem.
inline double m_special_hypergeometric(Insertion which, double lambda, double beta_plus,
                                       double gamma) {
  const double Q = q_of_gamma(gamma);
  const double c = which == Insertion::Gamma ? 2.0 / gamma : 0.5 * gamma;
  const cplx alpha = alpha_roots(lambda, gamma * gamma).first;
  const cplx v = specfun::gauss_2f1_at_one(c * (0.5 * alpha - 0.5 * gamma),
                                           c * (0.5 * alpha - 2.0 / gamma),
                                           c * (Q - beta_plus + 0.5 * alpha));
  return v.real();
}

inline double m_general(double lambda, double beta_minus, double beta_plus, double gamma) {
  const LqgParams g = LqgParams::from_betas(gamma, beta_minus, beta_plus);
  const double Q = g.Q;
  if (!(beta_minus < Q + 0.5 * gamma) || !(beta_plus < Q + 0.5 * gamma)) {
    throw PreconditionError("insertions must be below Q + gamma/2");
  }
  const SleParams sp = to_sle(g);
  if (lambda >= lambda0(sp)) return kInfinity;
  if (lambda == 0.0) return 1.0;
  const double b = 0.5 * gamma;
  const double s = beta_minus + beta_plus;
  auto lg = [&](cplx z) { return specfun::log_double_gamma_continued(b, z); };
  auto value = [&](cplx alpha) {
    const cplx h = 0.5 * alpha;
    return lg(2.0 * Q + gamma - s) + lg(3.0 * Q - s) - lg(2.0 * Q + 0.5 * gamma - s + h) -
           lg(3.0 * Q + 0.5 * gamma - s - h) + lg(Q - beta_plus + h) + lg(2.0 * Q - beta_plus - h) -
           lg(Q - beta_plus + 0.5 * gamma) - lg(Q - beta_plus + 2.0 / gamma);
  };
  const auto [r1, r2] = alpha_roots(lambda, gamma * gamma);
  const double v1 = detail::real_from_log(value(r1), 1e-10, "m_general");
  const double v2 = detail::real_from_log(value(r2), 1e-10, "m_general");
  detail::check_roots(v1, v2, 1e-10, "m_general");
  return 0.5 * (v1 + v2);
}

// Right-hand sides of the two shift relations: m(beta_- - shift, beta_+) / m(beta_-, beta_+)
// for shift = 2/gamma (c = 2/gamma) and shift = gamma/2 (c = gamma/2).
inline double m_shift_ratio(Insertion which, double lambda, double beta_minus, double beta_plus,
                            double gamma) {
  const double Q = q_of_gamma(gamma);
  const double c = which == Insertion::Gamma ? 2.0 / gamma : 0.5 * gamma;
  const double s = beta_minus + beta_plus;
  const cplx alpha = alpha_roots(lambda, gamma * gamma).first;
  using specfun::log_gamma;
  const cplx v = log_gamma(c * (2.0 * Q + 0.5 * gamma - s + 0.5 * alpha)) +
                 log_gamma(c * (3.0 * Q + 0.5 * gamma - s - 0.5 * alpha)) -
                 log_gamma(cplx(c * (2.0 * Q + gamma - s), 0.0)) -
                 log_gamma(cplx(c * (3.0 * Q - s), 0.0));
  return detail::real_from_log(v, 1e-10, "m_shift_ratio");
}

}  // namespace weldbench::exact
