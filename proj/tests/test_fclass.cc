#include "pepls/fclass.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "pepls/quadsim.hpp"
#include "pepls/rational.hpp"
#include "pepls/rng.hpp"

using namespace pepls;

namespace {

LabeledPoint make_point(const std::string& label, std::vector<double> x, double f,
                        std::vector<double> g) {
  LabeledPoint p;
  p.label = label;
  p.x = std::move(x);
  p.f = f;
  p.g = std::move(g);
  return p;
}

// samples of f(x) = 1/2 (mu x1^2 + L x2^2), a member of the class boundary
LabeledPoint quad_sample(double mu, double L, double x1, double x2) {
  return make_point("", {x1, x2}, 0.5 * (mu * x1 * x1 + L * x2 * x2), {mu * x1, L * x2});
}

}  // namespace

TEST(ClassParams, RejectsDegenerateRanges) {
  EXPECT_THROW(ClassParams(1.0, 1.0), InputError);
  EXPECT_THROW(ClassParams(2.0, 1.0), InputError);
  EXPECT_THROW(ClassParams(0.0, 1.0), InputError);
  EXPECT_THROW(ClassParams(-1.0, 2.0), InputError);
  EXPECT_NO_THROW(ClassParams(1.0, 1.0 + 1e-9));
}

TEST(InterpResidual, IdenticalTriplesVanish) {
  const ClassParams p(1.0, 2.0);
  const auto pt = make_point("0", {1.0, -2.0}, 3.0, {0.5, 0.25});
  EXPECT_EQ(interp_residual(pt, pt, p), 0.0);

  SplitMix64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto q = make_point("r", {rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-5, 5),
                              {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    EXPECT_EQ(interp_residual(q, q, p), 0.0);
  }
}

TEST(InterpResidual, BoundaryQuadraticSitsOnZero) {
  // f(x) = x^2 with (mu, L) = (1, 2): both sides of the inequality coincide
  const ClassParams p(1.0, 2.0);
  const auto pi = make_point("i", {1.0}, 1.0, {2.0});
  const auto pj = make_point("j", {0.0}, 0.0, {0.0});
  EXPECT_NEAR(interp_residual(pi, pj, p), 0.0, 1e-15);
}

TEST(InterpResidual, ConvexityViolationIsNegative) {
  const ClassParams p(1.0, 2.0);
  const auto pi = make_point("i", {1.0}, 0.0, {0.0});
  const auto pj = make_point("j", {0.0}, 1.0, {0.0});
  EXPECT_LT(interp_residual(pi, pj, p), 0.0);
}

TEST(InterpResidual, DimensionMismatchRejected) {
  const ClassParams p(1.0, 2.0);
  const auto pi = make_point("i", {1.0, 2.0}, 0.0, {0.0, 0.0});
  const auto pj = make_point("j", {0.0}, 1.0, {0.0});
  EXPECT_THROW(interp_residual(pi, pj, p), InputError);
}

TEST(IsInterpolable, SinglePointAndEmpty) {
  const ClassParams p(1.0, 10.0);
  std::vector<LabeledPoint> one{quad_sample(1, 10, 0.3, -0.4)};
  EXPECT_TRUE(is_interpolable(one, p, 1e-9));
  std::vector<LabeledPoint> none;
  EXPECT_THROW(is_interpolable(none, p, 1e-9), InputError);
}

TEST(IsInterpolable, QuadraticSamplesAlwaysPass) {
  const ClassParams p(1.0, 10.0);
  SplitMix64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<LabeledPoint> pts;
    for (int i = 0; i < 6; ++i)
      pts.push_back(quad_sample(1, 10, rng.uniform(-3, 3), rng.uniform(-3, 3)));
    EXPECT_TRUE(is_interpolable(pts, p, 1e-9));
  }
}

TEST(IsInterpolable, TightTrajectoryDataInterpolates) {
  // three iterates of the tight instance plus the minimizer
  const ClassParams p(1, 10);
  auto [q, x0] = example1_start(p, 2);
  const auto traj = run_exact_ls(q, x0, 3);
  const auto pts = trajectory_points(q, traj);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_TRUE(is_interpolable(pts, p, 1e-9));
}

TEST(IsInterpolable, ExactRationalPathWithZeroTolerance) {
  // same boundary quadratic, exact arithmetic, tol = 0
  const ClassParamsT<Rational> p(rat(1), rat(2));
  const auto sample = [&](long num, long den) {
    PointDataT<Rational> pt;
    const Rational x = rat(num, den);
    pt.x = {x};
    pt.f = x * x;          // f(x) = x^2 lies in F_{1,2}
    pt.g = {2 * x};
    return pt;
  };
  std::vector<PointDataT<Rational>> pts{sample(1, 1), sample(0, 1), sample(-3, 2),
                                        sample(7, 5)};
  EXPECT_TRUE(is_interpolable(pts, p, Rational(0)));
}

TEST(Rate, ClosedFormValues) {
  EXPECT_NEAR(rate(ClassParams(1, 10)), 81.0 / 121.0, 1e-15);
  EXPECT_NEAR(rate(ClassParams(1, 3)), 0.25, 1e-15);
  const double tiny = rate(ClassParams(1.0, 1.0 + 1e-9));
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-18);
}

TEST(Rate, AlwaysInsideUnitInterval) {
  SplitMix64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const double mu = rng.uniform(1e-3, 10);
    const double L = mu + rng.uniform(1e-6, 100);
    const double r = rate(ClassParams(mu, L));
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 1.0);
  }
}

TEST(NoisyRate, MatchesClosedFormAndLimits) {
  const ClassParams p(1, 10);
  EXPECT_EQ(noisy_rate(p, 0.0), rate(p));
  const double r = 123.0 / 137.0;  // rho_eps at eps = 0.3
  EXPECT_NEAR(noisy_rate(p, 0.3), r * r, 1e-12);
  EXPECT_NEAR(noisy_rate(p, 1.0 - 1e-12), 1.0, 1e-10);
  EXPECT_THROW(noisy_rate(p, 1.0), InputError);
  EXPECT_THROW(noisy_rate(p, -0.1), InputError);
}

TEST(NoisyRate, MonotoneInEps) {
  SplitMix64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const double mu = rng.uniform(0.1, 5);
    const ClassParams p(mu, mu + rng.uniform(0.1, 20));
    double e1 = rng.uniform(0, 1), e2 = rng.uniform(0, 1);
    if (e1 > e2) std::swap(e1, e2);
    EXPECT_LE(noisy_rate(p, e1), noisy_rate(p, e2) + 1e-15);
  }
}

TEST(IterationBound, KnownValues) {
  EXPECT_EQ(iteration_bound(ClassParams(1, 10), 1e-3), 18);
  // equality case of the ceiling: eps = rate^2 exactly
  const ClassParams p(1, 10);
  EXPECT_EQ(iteration_bound(p, rate(p) * rate(p)), 2);
  EXPECT_EQ(iteration_bound(p, 0.99), 1);
  EXPECT_THROW(iteration_bound(p, 0.0), InputError);
  EXPECT_THROW(iteration_bound(p, 1.0), InputError);
}

TEST(IterationBound, IsLeastPowerIndex) {
  SplitMix64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const double mu = rng.uniform(0.5, 3);
    const ClassParams p(mu, mu + rng.uniform(0.5, 30));
    const double eps = rng.uniform(1e-6, 0.9);
    const int n = iteration_bound(p, eps);
    // oracle: direct power comparison
    int least = 1;
    double pw = rate(p);
    while (pw > eps && least < 10000) {
      pw *= rate(p);
      ++least;
    }
    EXPECT_EQ(n, least) << "mu=" << mu << " L=" << p.L << " eps=" << eps;
  }
}
