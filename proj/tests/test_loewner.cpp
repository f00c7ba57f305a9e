#include <gtest/gtest.h>

#include <cmath>

#include "weldbench/exact.hpp"
#include "weldbench/loewner.hpp"
#include "weldbench/stats.hpp"

using namespace weldbench;
using exact::SleParams;

namespace {

loewner::DrivingProcess constant_driving(double T, std::size_t steps) {
  loewner::DrivingProcess d;
  for (std::size_t i = 0; i <= steps; ++i) {
    d.times.push_back(T * static_cast<double>(i) / static_cast<double>(steps));
    d.W.push_back(0.0);
    d.V_minus.push_back(0.0);
    d.V_plus.push_back(0.0);
  }
  return d;
}

loewner::SimConfig quick_config() {
  loewner::SimConfig c;
  c.T = 1e3;
  return c;
}

}  // namespace

TEST(TrackPoint, ConstantDrivingClosedForm) {
  const auto d = constant_driving(5.0, 500);
  const auto tp = loewner::track_point(d);
  ASSERT_FALSE(tp.swallowed);
  for (std::size_t i = 0; i < d.times.size(); i += 50) {
    const double t = d.times[i];
    EXPECT_NEAR(tp.g[i], std::sqrt(1.0 + 4.0 * t), 1e-6 * std::sqrt(1.0 + 4.0 * t));
    EXPECT_NEAR(tp.gprime[i], 1.0 / std::sqrt(1.0 + 4.0 * t), 1e-6);
  }
}

// With W = V^+ = 0 the ratio g' / (g - V^+) is 1 / (1 + 4t).
TEST(TrackPoint, ConstantDrivingPsiRatio) {
  const auto d = constant_driving(100.0, 2000);
  const auto tp = loewner::track_point(d);
  const std::size_t last = d.times.size() - 1;
  EXPECT_NEAR(tp.gprime[last] / tp.g[last], 1.0 / (1.0 + 400.0), 1e-8);
}

TEST(Driving, OrderingAndMonotoneDerivative) {
  const SleParams p{2.5, 1.0, 0.5};
  const auto c = quick_config();
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto d = loewner::sample_driving(p, c, 50.0, 11, i);
    ASSERT_FALSE(d.rejected);
    for (std::size_t k = 0; k < d.times.size(); ++k) {
      EXPECT_LE(d.V_minus[k], d.W[k]);
      EXPECT_LE(d.W[k], d.V_plus[k]);
    }
    const auto tp = loewner::track_point(d);
    for (std::size_t k = 1; k < tp.gprime.size(); ++k) {
      EXPECT_LE(tp.gprime[k], tp.gprime[k - 1]);
      EXPECT_GT(tp.g[k] - d.V_plus[k], 0.0);
    }
  }
}

TEST(Driving, DeterministicGivenSeed) {
  const SleParams p{2.0, 0.0, 0.0};
  const auto a = loewner::sample_driving(p, quick_config(), 10.0, 5, 3);
  const auto b = loewner::sample_driving(p, quick_config(), 10.0, 5, 3);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.V_plus, b.V_plus);
  const auto c = loewner::sample_driving(p, quick_config(), 10.0, 5, 4);
  EXPECT_NE(a.W, c.W);
}

TEST(Driving, TrackedPointMatchesSimulator) {
  const SleParams p{3.0, 1.0, 2.0};
  const auto c = quick_config();
  const auto s = loewner::simulate_psi_prime(p, c, 21, 0);
  ASSERT_EQ(s.status, loewner::SampleStatus::Accepted);
  const auto d = loewner::sample_driving(p, c, s.final_time, 21, 0);
  const auto tp = loewner::track_point(d);
  const auto pp = loewner::psi_prime(d, tp, c.tail_tol);
  // Same driving path; the tracked point is advanced by a different splitting.
  EXPECT_NEAR(pp.value, s.value, 1e-4 * s.value);
}

TEST(Driving, StepHalvingChangesLittle) {
  const SleParams p{2.0, 0.0, 2.0};
  auto c = quick_config();
  std::vector<double> coarse, fine;
  for (std::uint64_t i = 0; i < 400; ++i) {
    c.dt = 0.02;
    coarse.push_back(loewner::simulate_psi_prime(p, c, 31, i).value);
    c.dt = 0.01;
    fine.push_back(loewner::simulate_psi_prime(p, c, 31, i).value);
  }
  // Paths differ after refinement, so compare the means of psi'^-1.
  auto inv_mean = [](const std::vector<double>& v) {
    std::vector<double> w;
    for (double x : v) w.push_back(1.0 / x);
    return stats::mean_stderr(w);
  };
  const auto a = inv_mean(coarse), b = inv_mean(fine);
  EXPECT_LT(std::abs(a.mean - b.mean), 4.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST(PsiPrime, AboveOneAndAccepted) {
  const SleParams p{2.0, 0.0, 0.5};
  const auto batch = loewner::sample_psi_primes(p, 500, quick_config(), 41);
  EXPECT_GE(batch.acceptance(), 0.95);
  for (double v : batch.accepted_values()) EXPECT_GT(v, 1.0);
}

TEST(PsiPrime, SmallKappaLimit) {
  // As kappa -> 0 the curve is the vertical slit and psi'(1) -> 2 for rho = 0.
  const SleParams p{1e-3, 0.0, 0.0};
  const auto batch = loewner::sample_psi_primes(p, 50, loewner::SimConfig{}, 51);
  for (double v : batch.accepted_values()) EXPECT_NEAR(v, 2.0, 0.05);
}

TEST(Moment, LambdaZeroIsExactlyOne) {
  const auto m = loewner::estimate_moment({2.0, 0.0, 0.0}, 0.0, 200, quick_config(), 61);
  EXPECT_EQ(m.mean, 1.0);
  EXPECT_EQ(m.stderr_, 0.0);
}

TEST(Moment, WorkerCountDoesNotChangeResult) {
  const SleParams p{2.0, 1.0, 2.0};
  const auto a = loewner::estimate_moment(p, -1.0, 300, quick_config(), 71, 1);
  const auto b = loewner::estimate_moment(p, -1.0, 300, quick_config(), 71, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Moment, AgreesWithExactAtModerateSize) {
  const SleParams p{3.0, 1.0, 0.5};
  const auto m = loewner::estimate_moment(p, -0.5, 4000, loewner::SimConfig{}, 81);
  const double ex = exact::sle_derivative_moment(-0.5, p);
  EXPECT_LT(std::abs(m.mean - ex), 3.0 * m.stderr_) << m.mean << " vs " << ex;
}

TEST(Tail, SurvivalAndFit) {
  std::vector<double> v;
  SampleStream rng(9, 0);
  // Pareto with index 1.5: survival y^-1.5.
  for (int i = 0; i < 200000; ++i) v.push_back(std::pow(rng.uniform_open(), -1.0 / 1.5));
  const auto s = loewner::survival(v, {1.0, 10.0});
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], std::pow(10.0, -1.5), 3e-3);
  const auto fit = loewner::fit_tail(v, 2.0, 100.0);
  EXPECT_NEAR(fit.slope, -1.5, 0.05);
}

TEST(Config, RejectsInvalid) {
  loewner::SimConfig c;
  c.dt = 0.0;
  EXPECT_THROW(loewner::validate(c), PreconditionError);
  c = loewner::SimConfig{};
  c.T_max = 1.0;
  EXPECT_THROW(loewner::validate(c), PreconditionError);
  EXPECT_THROW(loewner::sample_psi_primes({2.0, -3.0, 0.0}, 10, loewner::SimConfig{}, 1), PreconditionError);
}
