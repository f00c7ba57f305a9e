#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "weldbench/exact.hpp"
#include "weldbench/quadrature.hpp"
#include "weldbench/rng.hpp"

using namespace weldbench;
using exact::SleParams;
using cplx = std::complex<double>;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// Closed form of the weight-two disk constant.
double reflection_bar_at_gamma(double g) {
  const double e = 4.0 / (g * g);
  const double u = 1.0 - 0.25 * g * g;
  return 0.25 * g * g * std::pow(2.0 * std::numbers::pi, e - 1.0) / (u * std::pow(std::tgamma(u), e));
}

}  // namespace

TEST(Parameters, SubstitutionExamples) {
  const auto g = exact::to_lqg({1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(g.gamma, 1.0);
  EXPECT_DOUBLE_EQ(g.beta_minus, 1.0);
  EXPECT_DOUBLE_EQ(g.beta_plus, 1.0);
  EXPECT_DOUBLE_EQ(g.W_minus, 2.0);
  EXPECT_DOUBLE_EQ(g.W_plus, 2.0);
  const auto q = exact::LqgParams::from_betas(1.0, 2.5, 2.5);
  EXPECT_DOUBLE_EQ(q.W_plus, 0.5);
}

TEST(Parameters, RoundTrip) {
  SampleStream rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const SleParams p{0.2 + 3.7 * rng.uniform(), -1.9 + 5.0 * rng.uniform(), -1.0 + 4.0 * rng.uniform()};
    const SleParams r = exact::to_sle(exact::to_lqg(p));
    EXPECT_NEAR(r.kappa, p.kappa, 1e-12);
    EXPECT_NEAR(r.rho_minus, p.rho_minus, 1e-12);
    EXPECT_NEAR(r.rho_plus, p.rho_plus, 1e-12);
  }
}

TEST(Parameters, RejectsInvalid) {
  EXPECT_THROW(exact::validate(SleParams{2.0, -2.5, 0.0}), PreconditionError);
  EXPECT_THROW(exact::validate(SleParams{2.0, 0.0, -2.0}), PreconditionError);
  EXPECT_THROW(exact::to_lqg({4.5, 0.0, 0.0}), PreconditionError);
}

TEST(Lambda0, Values) {
  EXPECT_DOUBLE_EQ(exact::lambda0({4.0, 0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(exact::lambda0({2.0, 0.0, -2.0}), 0.0);
  EXPECT_DOUBLE_EQ(exact::lambda0({3.0, 0.0, 0.5 * 3.0 - 4.0}), 0.0);
}

TEST(AlphaRoots, Values) {
  for (double kappa : {0.5, 2.0, 3.5}) {
    const auto [a, b] = exact::alpha_roots(0.0, kappa);
    EXPECT_NEAR(a.real(), std::min(std::sqrt(kappa), 4.0 / std::sqrt(kappa)), 1e-14);
    EXPECT_NEAR(b.real(), std::max(std::sqrt(kappa), 4.0 / std::sqrt(kappa)), 1e-14);
    const auto [c, d] = exact::alpha_roots(1.0, kappa);
    EXPECT_NEAR(std::abs(c), 0.0, 1e-14);
    EXPECT_NEAR(d.real(), 2.0 * exact::q_kappa(kappa), 1e-14);
  }
  const auto [r1, r2] = exact::alpha_roots(-1.0, 2.0);
  const double qk = exact::q_kappa(2.0);
  for (cplx a : {r1, r2}) EXPECT_NEAR(std::abs(1.0 - 0.5 * a * (qk - 0.5 * a) + 1.0), 0.0, 1e-13);
}

TEST(FFunction, RootSwapAndPositivity) {
  const SleParams p{2.3, 0.7, 1.1};
  const double qk2 = 2.0 * exact::q_kappa(p.kappa);
  for (double x : {0.4, 1.0, 1.7}) {
    const cplx f = exact::F(cplx(x, 0.0), p);
    EXPECT_GT(f.real(), 0.0);
    EXPECT_NEAR(f.imag(), 0.0, 1e-12 * std::abs(f));
    EXPECT_LT(std::abs(exact::F(cplx(qk2 - x, 0.0), p) / f - 1.0), 1e-11);
  }
}

TEST(Moment, LambdaZeroIsOne) {
  EXPECT_DOUBLE_EQ(exact::sle_derivative_moment(0.0, {2.0, 0.0, 0.0}), 1.0);
  EXPECT_NEAR(exact::sle_derivative_moment(-1e-300, {1.3, 1.0, 0.4}), 1.0, 1e-12);
}

TEST(Moment, InfiniteAtAndAboveLambda0) {
  const SleParams p{2.0, 0.0, 0.0};
  EXPECT_TRUE(std::isinf(exact::sle_derivative_moment(exact::lambda0(p), p)));
  EXPECT_TRUE(std::isinf(exact::sle_derivative_moment(exact::lambda0(p) + 0.3, p)));
}

TEST(Moment, DecreasingInNegativeLambda) {
  const SleParams p{2.0, 0.0, 0.0};
  double prev = 1.0;
  for (double l : {-0.25, -0.5, -1.0, -2.0, -4.0}) {
    const double v = exact::sle_derivative_moment(l, p);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(Moment, JensenLowerBound) {
  // E[X^l] >= E[X^{-1}]^{-l} for l <= -1 since t -> t^{-l} is convex.
  const SleParams p{3.0, 1.0, 0.5};
  const double m1 = exact::sle_derivative_moment(-1.0, p);
  EXPECT_GE(exact::sle_derivative_moment(-2.0, p), m1 * m1 * (1.0 - 1e-12));
}

TEST(Reflection, AtQAndClosedFormAtGamma) {
  for (double g : {0.6, 1.0, 1.5}) {
    const double Q = exact::q_of_gamma(g);
    EXPECT_NEAR(exact::reflection_bar(Q, {1.0, 0.0}, g), 1.0, 1e-10);
    EXPECT_NEAR(exact::reflection_bar(Q, {0.7, 1.3}, g), 1.0, 1e-10);
    EXPECT_LT(rel(exact::reflection_bar(g, {1.0, 0.0}, g), reflection_bar_at_gamma(g)), 1e-10) << g;
  }
}

TEST(Reflection, ProductIsOne) {
  for (double g : {0.8, 1.2}) {
    const double Q = exact::q_of_gamma(g);
    for (double beta : {Q - 0.55, Q - 0.25, Q + 0.3}) {
      for (exact::BoundaryCosmology c : {exact::BoundaryCosmology{1.0, 0.0}, exact::BoundaryCosmology{0.5, 2.0}}) {
        const double r = exact::reflection(beta, c, g) * exact::reflection(2.0 * Q - beta, c, g);
        EXPECT_NEAR(r, 1.0, 1e-9) << g << " " << beta;
      }
    }
  }
}

TEST(Reflection, MuScaling) {
  const double g = 1.2, beta = 1.4, Q = exact::q_of_gamma(g);
  const double ratio = exact::reflection(beta, {3.0, 0.0}, g) / exact::reflection(beta, {1.0, 0.0}, g);
  EXPECT_LT(rel(ratio, std::pow(3.0, (2.0 / g) * (Q - beta))), 1e-11);
}

TEST(Reflection, SymmetricInCosmologies) {
  const double g = 1.1, beta = 1.3;
  EXPECT_LT(rel(exact::reflection_bar(beta, {0.4, 1.7}, g), exact::reflection_bar(beta, {1.7, 0.4}, g)), 1e-11);
}

TEST(HBar, ReflectionResidual) {
  for (double g : {0.9, 1.3}) {
    const double Q = exact::q_of_gamma(g);
    for (double beta : {0.4, 0.9}) {
      for (double alpha : {0.7, 1.6}) {
        const double lhs = exact::h_coefficient(beta, alpha, g);
        const double r = exact::reflection(beta, {1.0, 0.0}, g);
        const double rhs = r * r * exact::h_coefficient(2.0 * Q - beta, alpha, g);
        EXPECT_LT(rel(lhs, rhs), 1e-8) << g << " " << beta << " " << alpha;
      }
    }
  }
}

TEST(HBar, ZeroExponentIsOne) {
  const double g = 1.0, beta = 1.0, alpha = 2.0 * (exact::q_of_gamma(g) - beta);
  EXPECT_NEAR(exact::h_bar(beta, alpha, g), 1.0, 1e-10);
}

TEST(Disk, JointDensityHalfGammaSquared) {
  for (double g : {0.8, 1.0, 1.4}) {
    EXPECT_NEAR(exact::disk_length_joint_density(exact::DiskWeight::HalfGammaSquared, 1.0, 1.0, g), 1.0 / (g * g),
                1e-14);
  }
}

TEST(Disk, MarginalDensityClosedForms) {
  for (double g : {0.8, 1.0, 1.4}) {
    for (double l : {0.5, 2.0}) {
      EXPECT_NEAR(exact::disk_length_marginal_density(0.5 * g * g, {1.0, 0.0}, l, g) * l, 1.0, 1e-10);
      EXPECT_LT(rel(exact::disk_length_marginal_density(2.0, {1.0, 0.0}, l, g) * std::pow(l, 4.0 / (g * g)),
                    reflection_bar_at_gamma(g)),
                1e-10);
    }
  }
}

TEST(Disk, ThickThinContinuity) {
  const double g = 1.2, W = 0.5 * g * g;
  const double lo = exact::disk_length_marginal_density(W - 1e-6, {1.0, 0.0}, 1.3, g);
  const double hi = exact::disk_length_marginal_density(W + 1e-6, {1.0, 0.0}, 1.3, g);
  EXPECT_LT(rel(lo, hi), 1e-4);
}

TEST(Disk, ThinLaplaceMatchesQuadrature) {
  const double g = 1.0, W = 0.25 * g * g;
  const exact::BoundaryCosmology c{1.0, 0.0};
  const double p = 2.0 * W / (g * g);
  // The density is a pure power, so integrate l^{-p} e^{-l} directly.
  quad::Options opt;
  opt.rel_tol = 1e-12;
  const double head = quad::integrate([&](double l) { return std::pow(l, -p) * std::exp(-l); }, 0.0, 1.0, opt).value;
  const double tail = quad::integrate_to_infinity([&](double l) { return std::pow(l, -p) * std::exp(-l); }, 1.0, opt).value;
  const double direct = exact::disk_length_marginal_density(W, c, 1.0, g) * (head + tail);
  EXPECT_LT(rel(direct, exact::disk_laplace(W, c, g)), 1e-8);
}

TEST(Disk, RegularizedGammaIntegral) {
  // int_0^inf (e^{-l} - 1) l^{-p} dl = Gamma(1 - p) for p in (1, 2); the
  // constant part is integrated exactly on (1, inf).
  const double p = 1.4;
  quad::Options opt;
  opt.rel_tol = 1e-12;
  auto f = [&](double l) { return std::expm1(-l) * std::pow(l, -p); };
  auto g = [&](double l) { return std::exp(-l) * std::pow(l, -p); };
  const double v =
      quad::integrate(f, 0.0, 1.0, opt).value + quad::integrate_to_infinity(g, 1.0, opt).value - 1.0 / (p - 1.0);
  EXPECT_LT(rel(v, std::tgamma(1.0 - p)), 1e-8);
}

TEST(MSpecial, LambdaZeroAndHypergeometric) {
  for (auto which : {exact::Insertion::Gamma, exact::Insertion::Q}) {
    EXPECT_NEAR(exact::m_special(which, 0.0, 0.8, 1.0), 1.0, 1e-12);
    for (double lambda : {-0.5, -1.3}) {
      EXPECT_LT(rel(exact::m_special(which, lambda, 0.8, 1.0),
                    exact::m_special_hypergeometric(which, lambda, 0.8, 1.0)),
                1e-9);
    }
  }
}

TEST(MGeneral, ReducesToSpecialCase) {
  const double g = 1.0;
  EXPECT_NEAR(exact::m_general(0.0, 1.3, 0.8, g), 1.0, 1e-12);
  EXPECT_LT(rel(exact::m_general(-0.5, g, 0.8, g), exact::m_special(exact::Insertion::Gamma, -0.5, 0.8, g)), 1e-9);
  const double Q = exact::q_of_gamma(g);
  EXPECT_LT(rel(exact::m_general(-0.5, Q, 0.8, g), exact::m_special(exact::Insertion::Q, -0.5, 0.8, g)), 1e-9);
}

TEST(MGeneral, CompositionResidual) {
  const double g = 1.2, Q = exact::q_of_gamma(g), lambda = -0.7;
  const double beta = 1.1, bm = 1.5, bp = 0.6;
  const double lhs = exact::m_general(lambda, beta + bm - Q - 0.5 * g, bp, g);
  const double rhs = exact::m_general(lambda, beta, bm + bp - Q - 0.5 * g, g) * exact::m_general(lambda, bm, bp, g);
  EXPECT_LT(rel(lhs, rhs), 1e-8);
}

TEST(MGeneral, MatchesMomentFormula) {
  const SleParams p{2.0, 0.5, 1.0};
  const auto q = exact::to_lqg(p);
  for (double lambda : {-1.0, -0.3, 0.2}) {
    EXPECT_LT(rel(exact::m_general(lambda, q.beta_minus, q.beta_plus, q.gamma),
                  exact::sle_derivative_moment(lambda, p)),
              1e-9);
  }
}

TEST(Duality, MapValues) {
  const auto a = exact::duality_map({16.0, 0.0, 5.0});
  EXPECT_DOUBLE_EQ(a.kappa, 1.0);
  const auto b = exact::duality_map({8.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(b.kappa, 2.0);
  EXPECT_DOUBLE_EQ(b.rho_minus, -1.0);
}

TEST(Duality, FInvariance) {
  for (double kappa : {5.0, 8.0, 12.0}) {
    const SleParams p{kappa, 0.8, 3.0};
    const SleParams d = exact::duality_map(p);
    for (double x : {0.9, 1.4}) {
      EXPECT_LT(std::abs(exact::log_F(cplx(x, 0.0), p) - exact::log_F(cplx(x, 0.0), d)), 1e-10) << kappa;
    }
  }
}
