#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "weldbench/exact.hpp"
#include "weldbench/fieldsim.hpp"
#include "weldbench/stats.hpp"

using namespace weldbench;

TEST(ConditionedDrift, StaysNegative) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto s = fieldsim::sample_conditioned_drift_bm(0.5, 4.0, 0.01, 1, i);
    EXPECT_EQ(s.values.front(), 0.0);
    for (std::size_t k = 1; k < s.values.size(); ++k) EXPECT_LT(s.values[k], 0.0);
  }
}

TEST(ConditionedDrift, DensityIntegratesToOne) {
  for (double a : {0.5, 2.0}) {
    quad::Options opt;
    opt.rel_tol = 1e-12;
    const double mass =
        quad::integrate_to_infinity([&](double y) { return fieldsim::conditioned_drift_density(a, 1.0, -y); }, 0.0, opt)
            .value;
    EXPECT_NEAR(mass, 1.0, 1e-10) << a;
  }
}

TEST(ConditionedDrift, LargeDriftApproachesFreeMarginal) {
  // The conditioning is met with probability tending to one, and the KS
  // distance at t = 1 to the free marginal N(-a, 1) decays like 1/a.
  std::vector<double> dist;
  for (double a : {2.0, 6.0, 24.0}) {
    std::vector<double> v;
    for (std::uint64_t i = 0; i < 20000; ++i) v.push_back(fieldsim::sample_conditioned_drift_bm(a, 1.0, 1.0, 2, i).values[1]);
    dist.push_back(stats::ks_one_sample(v, [&](double x) { return stats::normal_cdf(x + a); }).statistic);
  }
  EXPECT_GT(dist[0], dist[1]);
  EXPECT_GT(dist[1], dist[2]);
  EXPECT_LT(dist[2], 0.03);
}

TEST(TailIntegral, ClosedForm) {
  EXPECT_NEAR(fieldsim::gaussian_tail_time_integral(1.0), 0.5, 1e-12);
  EXPECT_NEAR(fieldsim::gaussian_tail_time_integral(0.5), 2.0, 1e-11);
  for (double a : {0.25, 1.0, 4.0}) {
    EXPECT_NEAR(fieldsim::gaussian_tail_time_integral(a) * a * a, 0.5, 1e-11) << a;
  }
}

TEST(LevelMass, RatioAcrossLevels) {
  const double a = 0.8;
  EXPECT_NEAR(fieldsim::x1_mass_above(a, 1.5) / fieldsim::x1_mass_above(a, 0.5), std::exp(2.0 * a), 1e-10);
}

TEST(Constructions, ValueAtZeroIsExponentialAboveLevel) {
  const double a = 1.0, M = 0.5;
  const auto g = fieldsim::default_grid(a, 0.05);
  std::vector<double> two, shifted;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    SampleStream ra(3, i, 1), rb(3, i, 2);
    two.push_back(fieldsim::sample_two_sided_drift(a, M, g, ra).values[g.half] + M);
    shifted.push_back(fieldsim::sample_shifted_maximum(a, M, g, rb).values[g.half] + M);
  }
  auto expo = [&](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-2.0 * a * x); };
  EXPECT_GT(stats::ks_one_sample(two, expo).p_value, 1e-3);
  EXPECT_GT(stats::ks_one_sample(shifted, expo).p_value, 1e-3);
}

TEST(Constructions, ShiftedMaximumIsGlobalMaximum) {
  // The maximum of A^M sits at the sampled time tau >= 0 and the part left
  // of time 0 stays below the level.
  const double a = 1.0, M = 0.7;
  const auto g = fieldsim::default_grid(a, 0.01);
  for (std::uint64_t i = 0; i < 200; ++i) {
    SampleStream rng(4, i);
    const auto s = fieldsim::sample_shifted_maximum(a, M, g, rng);
    EXPECT_GT(s.values[g.half], -M);
    const double mx = *std::max_element(s.values.begin(), s.values.end());
    EXPECT_GE(mx, s.values[g.half]);
  }
}

TEST(StripKernel, CellAveragedVarianceAndFarField) {
  const double d = 1e-3;
  EXPECT_NEAR(fieldsim::strip_same_line_cov(0, d), -2.0 * std::log(d) + 3.0, 1e-3);
  const double L = 24.0, dx = 2.0 * L / 2048.0;
  const std::size_t lag = 1024;
  EXPECT_NEAR(fieldsim::strip_same_line_cov(lag, dx), fieldsim::strip_same_line_kernel(lag * dx), 1e-8);
  EXPECT_NEAR(fieldsim::strip_cross_line_cov(lag, dx), fieldsim::strip_cross_line_kernel(lag * dx), 1e-8);
}

TEST(CirculantField, MatchesDenseCovariance) {
  const fieldsim::StripGridSpec spec{4.0, 256, false};
  const double d = spec.dx();
  const fieldsim::CirculantField field(
      spec.n, [d](std::size_t j) { return fieldsim::strip_same_line_cov(j, d); }, fieldsim::detail::strip_max_lag(d));
  const auto dense = fieldsim::lateral_covariance_matrix(spec);
  for (std::size_t j : {0ul, 1ul, 7ul, 100ul, 255ul}) EXPECT_NEAR(field.covariance(j), dense(0, j), 1e-10) << j;
  EXPECT_GT(field.min_eigenvalue(), -1e-8);
}

TEST(CirculantField, EmpiricalCovarianceAndGaussianity) {
  const fieldsim::StripGridSpec spec{4.0, 256, false};
  const double d = spec.dx();
  const fieldsim::CirculantField field(
      spec.n, [d](std::size_t j) { return fieldsim::strip_same_line_cov(j, d); }, fieldsim::detail::strip_max_lag(d));
  const fieldsim::DenseGaussianField dense(fieldsim::lateral_covariance_matrix(spec));
  const std::size_t n = 2000;
  std::vector<double> a(spec.n), b(spec.n), c(spec.n);
  std::array<std::vector<double>, 3> circ_at, dense_at;
  const std::array<std::size_t, 3> where = {10, 128, 250};
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    SampleStream rng(5, i);
    field.sample(rng, a, b);
    dense.sample(rng, c);
    for (int k = 0; k < 3; ++k) {
      circ_at[k].push_back(a[where[k]]);
      dense_at[k].push_back(c[where[k]]);
    }
    c0 += a[100] * a[100] + b[100] * b[100];
    c1 += a[100] * a[110] + b[100] * b[110];
  }
  const double v0 = field.covariance(0), v10 = field.covariance(10);
  EXPECT_NEAR(c0 / (2.0 * n), v0, 5.0 * v0 * std::sqrt(2.0 / (2.0 * n)));
  EXPECT_NEAR(c1 / (2.0 * n), v10, 5.0 * v0 * std::sqrt(2.0 / (2.0 * n)));
  const double sd = std::sqrt(v0);
  for (int k = 0; k < 3; ++k) {
    auto cdf = [sd](double x) { return stats::normal_cdf(x / sd); };
    EXPECT_GT(stats::ks_one_sample(circ_at[k], cdf).p_value, 1e-3);
    EXPECT_GT(stats::ks_one_sample(dense_at[k], cdf).p_value, 1e-3);
  }
}

TEST(StripField, TwoLinesCrossCovariance) {
  const fieldsim::StripGridSpec spec{4.0, 128, true};
  const fieldsim::StripLateralSampler lat(spec);
  const auto dense = fieldsim::lateral_covariance_matrix(spec);
  double same = 0.0, cross = 0.0;
  const std::size_t n = 4000;
  std::vector<double> lo(spec.n), up(spec.n);
  for (std::size_t i = 0; i < n; ++i) {
    SampleStream rng(6, i);
    lat.sample(rng, lo, up);
    same += lo[60] * lo[60];
    cross += lo[60] * up[60];
  }
  const double v = dense(60, 60);
  EXPECT_NEAR(same / n, v, 5.0 * v * std::sqrt(2.0 / n));
  EXPECT_NEAR(cross / n, dense(60, spec.n + 60), 5.0 * v * std::sqrt(2.0 / n));
}

TEST(FirstMoment, ResolutionHalvingChangesLittle) {
  const double gamma = 1.0, beta = exact::q_of_gamma(gamma) - 1.0;
  const double a = fieldsim::expected_window_mass(beta, {8.0, 512, false}, gamma);
  const double b = fieldsim::expected_window_mass(beta, {8.0, 1024, false}, gamma);
  EXPECT_LT(std::abs(a - b) / b, 0.02);
}

TEST(FirstMoment, SmallGammaIsLebesgueWithDrift) {
  // The chaos density tends to E[exp(c Y_x)] with c -> 0, i.e. to 1 per unit length.
  const double gamma = 1e-3, beta = exact::q_of_gamma(gamma) - 1.0;
  const double m = fieldsim::expected_window_mass(beta, {8.0, 256, false}, gamma);
  EXPECT_NEAR(m, 16.0, 0.1);
}

TEST(GmcReflection, MuScalingIsExact) {
  const double gamma = 1.2, beta = exact::q_of_gamma(gamma) - 0.7;
  const fieldsim::StripGridSpec spec{16.0, 512, false};
  const auto one = fieldsim::mc_reflection_moment(beta, {1.0, 0.0}, gamma, 100, spec, 7);
  const auto two = fieldsim::mc_reflection_moment(beta, {2.0, 0.0}, gamma, 100, spec, 7);
  EXPECT_NEAR(two.extrapolated.mean / one.extrapolated.mean, std::pow(2.0, one.exponent), 1e-10);
}

TEST(GmcReflection, SpecExampleWithinTenPercent) {
  const double gamma = 1.5, beta = 0.9 * exact::q_of_gamma(gamma);
  const auto est = fieldsim::mc_reflection_moment(beta, {1.0, 0.0}, gamma, 4000, {24.0, 2048, false}, 8);
  const double ex = exact::reflection_bar(beta, {1.0, 0.0}, gamma);
  EXPECT_LT(std::abs(est.extrapolated.mean - ex), 0.10 * ex) << est.extrapolated.mean << " vs " << ex;
}

TEST(GmcReflection, RejectsInvalid) {
  EXPECT_THROW(fieldsim::mc_reflection_moment(3.0, {1.0, 0.0}, 1.0, 10, {}, 1), PreconditionError);
  EXPECT_THROW(fieldsim::mc_reflection_moment(1.0, {0.0, 0.0}, 1.0, 10, {}, 1), PreconditionError);
}

TEST(GmcInterval, ZeroExponentIsOne) {
  const double gamma = 1.0, beta = 1.0, alpha = 2.0 * (exact::q_of_gamma(gamma) - beta);
  const auto est = fieldsim::mc_interval_moment(beta, alpha, gamma, 10, {256, false}, 9);
  EXPECT_NEAR(est.extrapolated.mean, 1.0, 1e-12);
}

TEST(GmcInterval, MirrorSymmetry) {
  const auto a = fieldsim::mc_interval_moment(0.5, 2.9, 1.0, 200, {512, false}, 10);
  const auto b = fieldsim::mc_interval_moment(0.5, 2.9, 1.0, 200, {512, true}, 10);
  EXPECT_NEAR(a.extrapolated.mean, b.extrapolated.mean, 1e-9 * a.extrapolated.mean);
  const auto c = fieldsim::mc_interval_moment(0.5, 2.9, 1.0, 2000, {512, true}, 11);
  const auto e = fieldsim::mc_interval_moment(0.5, 2.9, 1.0, 2000, {512, false}, 12);
  EXPECT_LT(std::abs(c.extrapolated.mean - e.extrapolated.mean),
            4.0 * std::hypot(c.extrapolated.stderr_, e.extrapolated.stderr_));
}

TEST(GmcInterval, CellWeightsSumToBeta) {
  const double gamma = 1.0, beta = 0.5, e = 1.0 - 0.5 * gamma * beta;
  const auto w = fieldsim::interval_cell_weights(beta, gamma, 1024);
  double s = 0.0;
  for (double x : w) s += x;
  EXPECT_NEAR(s, std::exp(std::lgamma(e) * 2.0 - std::lgamma(2.0 * e)), 1e-12);
  EXPECT_NEAR(w.front(), w.back(), 1e-15);
}

TEST(GmcInterval, SpecExampleWithinTenPercent) {
  const double gamma = 1.0, beta = 0.5, alpha = 2.5;
  const auto est = fieldsim::mc_interval_moment(beta, alpha, gamma, 4000, {1024, false}, 13);
  const double ex = exact::h_bar(beta, alpha, gamma);
  EXPECT_LT(std::abs(est.extrapolated.mean - ex), 0.10 * ex) << est.extrapolated.mean << " vs " << ex;
}
