#include "pepls/quadsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pepls/rng.hpp"

using namespace pepls;

namespace {

DiagQuadratic random_instance(SplitMix64& rng, int n, double mu, double L) {
  VectorXd lam(n);
  lam(0) = mu;
  lam(n - 1) = L;
  for (int i = 1; i + 1 < n; ++i) lam(i) = rng.uniform(mu, L);
  return DiagQuadratic(lam);
}

VectorXd random_vec(SplitMix64& rng, int n, double lo = -2, double hi = 2) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST(ExactLsStep, KnownSteps) {
  auto [q1, x1] = example1_start(ClassParams(1, 10), 2);
  EXPECT_NEAR(exact_ls_step(q1, x1), 2.0 / 11.0, 1e-15);

  const DiagQuadratic single((VectorXd(1) << 4.0).finished());
  VectorXd x(1);
  x << 3.0;
  EXPECT_NEAR(exact_ls_step(single, x), 0.25, 1e-15);
  // one step lands exactly at the minimizer
  auto t = run_exact_ls(single, x, 1);
  EXPECT_NEAR(t.iterates.back()(0), 0.0, 1e-15);

  const DiagQuadratic q2((VectorXd(2) << 1.0, 2.0).finished());
  VectorXd y(2);
  y << 1.0, 1.0;
  EXPECT_NEAR(exact_ls_step(q2, y), 5.0 / 9.0, 1e-15);

  VectorXd zero = VectorXd::Zero(2);
  EXPECT_THROW(exact_ls_step(q2, zero), StateError);
}

TEST(RunExactLs, TightInstanceFollowsClosedForm) {
  const ClassParams p(1, 10);
  auto [q, x0] = example1_start(p, 2);
  const double rho = 9.0 / 11.0;

  auto t = run_exact_ls(q, x0, 2);
  ASSERT_EQ(t.iterates.size(), 3u);
  EXPECT_NEAR(t.iterates[1](0), rho * 1.0, 1e-14);
  EXPECT_NEAR(t.iterates[1](1), -rho * 0.1, 1e-14);
  EXPECT_NEAR(t.iterates[2](0), rho * rho * x0(0), 1e-14);
  EXPECT_NEAR(t.iterates[2](1), rho * rho * x0(1), 1e-14);
}

TEST(RunExactLs, FixedPointAtMinimizer) {
  const DiagQuadratic q((VectorXd(2) << 1.0, 10.0).finished());
  auto t = run_exact_ls(q, VectorXd::Zero(2), 5);
  EXPECT_EQ(t.num_steps(), 0u);  // early termination
  EXPECT_EQ(t.iterates.size(), 1u);
}

TEST(RunExactLs, OrthogonalityInvariants) {
  SplitMix64 rng(100);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const auto q = random_instance(rng, n, 1.0, 10.0);
    const auto t = run_exact_ls(q, random_vec(rng, n), 8);
    for (std::size_t i = 0; i + 1 < t.iterates.size(); ++i) {
      const VectorXd gi = q.gradient(t.iterates[i]);
      const VectorXd gn = q.gradient(t.iterates[i + 1]);
      const VectorXd step = t.iterates[i + 1] - t.iterates[i];
      const double scale = std::max(1.0, gn.norm() * step.norm());
      EXPECT_LE(std::abs(gn.dot(step)), 1e-10 * scale);
      EXPECT_LE(std::abs(gn.dot(gi)), 1e-10 * std::max(1.0, gn.norm() * gi.norm()));
    }
  }
}

TEST(RunExactLs, RatioNeverExceedsWorstCase) {
  const ClassParams p(1, 10);
  const double bound = rate(p) + 1e-12;
  SplitMix64 rng(200);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const auto q = random_instance(rng, n, 1.0, 10.0);
    const auto t = run_exact_ls(q, random_vec(rng, n), 8);
    for (double r : t.ratios()) EXPECT_LE(r, bound);
  }
}

TEST(RunExactLs, TightInstanceAttainsRateEveryStep) {
  const ClassParams p(1, 10);
  auto [q, x0] = example1_start(p, 2);
  const auto t = run_exact_ls(q, x0, 8);
  for (double r : t.ratios()) EXPECT_NEAR(r, rate(p), 1e-12);
}

TEST(RunFixedStep, ZeroStepIsConstant) {
  const DiagQuadratic q((VectorXd(2) << 1.0, 10.0).finished());
  VectorXd x0(2);
  x0 << 1, 1;
  const auto t = run_fixed_step(q, x0, 0.0, 4);
  for (const auto& x : t.iterates) EXPECT_EQ((x - x0).norm(), 0.0);
}

TEST(RunFixedStep, MatchesExactLsOnTightInstance) {
  // on the tight instance the exact line-search step is constantly 2/(L+mu)
  auto [q, x0] = example1_start(ClassParams(1, 10), 2);
  const auto tls = run_exact_ls(q, x0, 8);
  const auto tfs = run_fixed_step(q, x0, 2.0 / 11.0, 8);
  ASSERT_EQ(tls.iterates.size(), tfs.iterates.size());
  for (std::size_t i = 0; i < tls.iterates.size(); ++i)
    EXPECT_LE((tls.iterates[i] - tfs.iterates[i]).norm(), 1e-12 * tls.iterates[i].norm());
}

TEST(RunFixedStep, NesterovStepRatioBound) {
  const ClassParams p(1, 10);
  const double gamma = 2.0 / (p.mu + p.L);
  SplitMix64 rng(300);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_instance(rng, 3, 1.0, 10.0);
    const auto t = run_fixed_step(q, random_vec(rng, 3), gamma, 20);
    for (double r : t.ratios()) EXPECT_LE(r, rate(p) + 1e-12);
    EXPECT_TRUE(bound_check_nesterov(t, p, t.iterates[0]));
  }
}

TEST(BoundCheckNesterov, ZeroStepsHoldsBySmoothness) {
  const ClassParams p(1, 10);
  auto [q, x0] = example1_start(p, 2);
  const auto t = run_fixed_step(q, x0, 2.0 / 11.0, 0);
  EXPECT_TRUE(bound_check_nesterov(t, p, x0));
}

TEST(RunNoisy, ZeroEpsRecoversGradientDescent) {
  SplitMix64 rng(400);
  const auto q = random_instance(rng, 3, 1.0, 10.0);
  const VectorXd x0 = random_vec(rng, 3);
  const auto tn = run_noisy(q, x0, 0.0, negative_gradient_policy(), 6);
  const auto tg = run_exact_ls(q, x0, 6);
  ASSERT_EQ(tn.iterates.size(), tg.iterates.size());
  for (std::size_t i = 0; i < tn.iterates.size(); ++i)
    EXPECT_LE((tn.iterates[i] - tg.iterates[i]).norm(), 1e-12);
}

TEST(RunNoisy, TightRotatedInstanceFollowsClosedForm) {
  const ClassParams p(1, 10);
  const double eps = 0.3;
  auto [q, x0] = example2_start(p, eps, 2);
  const double k_eps = (p.mu / p.L) * (1 - eps) / (1 + eps);
  const double rho_eps = (1 - k_eps) / (1 + k_eps);  // 123/137

  const auto t = run_noisy(q, x0, eps, rotation_policy(std::asin(eps), true), 2);
  ASSERT_EQ(t.iterates.size(), 3u);
  EXPECT_NEAR(t.iterates[1](0), rho_eps * x0(0), 1e-12);
  EXPECT_NEAR(t.iterates[1](1), -rho_eps * x0(1), 1e-12);
  EXPECT_NEAR(t.iterates[2](0), rho_eps * rho_eps * x0(0), 1e-12);
  EXPECT_NEAR(t.iterates[2](1), rho_eps * rho_eps * x0(1), 1e-12);
}

TEST(RunNoisy, TightInstanceAttainsNoisyRate) {
  const ClassParams p(1, 10);
  const double eps = 0.3;
  auto [q, x0] = example2_start(p, eps, 2);
  const auto t = run_noisy(q, x0, eps, rotation_policy(std::asin(eps), true), 8);
  for (double r : t.ratios()) EXPECT_NEAR(r, noisy_rate(p, eps), 1e-10);
}

TEST(RunNoisy, ConformingPoliciesRespectTheBound) {
  const ClassParams p(1, 10);
  const double eps = 0.3;
  SplitMix64 rng(500);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_instance(rng, 3, 1.0, 10.0);
    // random rotation angle per iteration, |sin theta| <= eps
    auto policy = [&rng, eps](int, const VectorXd&, const VectorXd& g) {
      const double theta = std::asin(eps * rng.uniform(-1, 1));
      const double c = std::cos(theta), s = std::sin(theta);
      VectorXd d = -g;
      const double a = d(0), b = d(d.size() - 1);
      d(0) = c * a - s * b;
      d(d.size() - 1) = s * a + c * b;
      return d;
    };
    const auto t = run_noisy(q, random_vec(rng, 3), eps, policy, 6);
    for (double r : t.ratios()) EXPECT_LE(r, noisy_rate(p, eps) + 1e-10);
  }
}

TEST(RunNoisy, ViolatingPolicyRaisesContractError) {
  const auto q = DiagQuadratic((VectorXd(2) << 1.0, 10.0).finished());
  VectorXd x0(2);
  x0 << 1, 1;
  // orthogonal direction: infinitely far from the negative-gradient ray
  auto bad = [](int, const VectorXd&, const VectorXd& g) {
    VectorXd d(2);
    d << -g(1), g(0);
    return d;
  };
  try {
    run_noisy(q, x0, 0.3, bad, 3);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos);
  }
}

TEST(RotationPolicy, ZeroAngleIsNegativeGradient) {
  auto pol = rotation_policy(0.0, false);
  VectorXd x(2), g(2);
  x << 1, 2;
  g << 3, -4;
  EXPECT_EQ((pol(0, x, g) + g).norm(), 0.0);
}

TEST(RotationPolicy, RotationsAreIsometries) {
  auto pol = rotation_policy(std::asin(0.3), true);
  SplitMix64 rng(600);
  for (int t = 0; t < 20; ++t) {
    VectorXd g = random_vec(rng, 4);
    for (int it = 0; it < 2; ++it) EXPECT_NEAR(pol(it, g, g).norm(), g.norm(), 1e-12);
  }
}

TEST(RotationPolicy, QuarterTurnConvention) {
  auto pol = rotation_policy(M_PI / 4, false);
  VectorXd g(2);
  g << 1, 0;
  const VectorXd d = pol(0, g, g);
  EXPECT_NEAR(d(0), -std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(d(1), -std::sqrt(0.5), 1e-15);
  EXPECT_THROW(rotation_policy(-0.1, false), InputError);
  EXPECT_THROW(rotation_policy(M_PI / 2, false), InputError);
}

TEST(ExampleStarts, QuotedValues) {
  const ClassParams p(1, 10);
  {
    auto [q, x0] = example1_start(p, 2);
    EXPECT_EQ(q.lambdas(0), 1.0);
    EXPECT_EQ(q.lambdas(1), 10.0);
    EXPECT_EQ(x0(0), 1.0);
    EXPECT_EQ(x0(1), 0.1);
  }
  {
    auto [q, x0] = example1_start(p, 4);
    EXPECT_EQ(x0(1), 0.0);
    EXPECT_EQ(x0(2), 0.0);
    EXPECT_EQ(x0(3), 0.1);
    EXPECT_EQ(q.lambdas(1), 1.0);  // interior eigenvalues at mu
  }
  {
    auto [q, x0] = example2_start(p, 0.3, 3);
    EXPECT_EQ(x0(1), 0.0);
    EXPECT_NEAR(x0(2), 0.1 * std::sqrt(7.0 / 13.0), 1e-16);
  }
  {
    auto [q0, a] = example1_start(p, 2);
    auto [q1, b] = example2_start(p, 0.0, 2);
    EXPECT_EQ((a - b).norm(), 0.0);
  }
  EXPECT_THROW(example1_start(p, 1), InputError);
  EXPECT_THROW(example2_start(p, 1.0, 2), InputError);
  EXPECT_NO_THROW(example1_start(ClassParams(1.0 - 1e-6, 1.0), 2));
}

TEST(Kantorovich, EigenvectorAndBalancedCases) {
  const DiagQuadratic q((VectorXd(2) << 1.0, 10.0).finished());
  VectorXd e1(2), bal(2);
  e1 << 1, 0;
  bal << std::sqrt(0.5), std::sqrt(0.5);
  EXPECT_NEAR(kantorovich_residual(q, e1), 121.0 / 40.0 - 1.0, 1e-14);
  EXPECT_NEAR(kantorovich_residual(q, bal), 0.0, 1e-14);

  const DiagQuadratic scaled((VectorXd(3) << 2.0, 2.0, 2.0).finished());
  VectorXd unit(3);
  unit << 1, 0, 0;
  EXPECT_NEAR(kantorovich_residual(scaled, unit), 0.0, 1e-14);

  VectorXd notunit(2);
  notunit << 1, 1;
  EXPECT_THROW(kantorovich_residual(q, notunit), InputError);
}

TEST(Kantorovich, NonnegativeOnRandomData) {
  SplitMix64 rng(700);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 3));
    VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = rng.uniform(0.2, 20);
    const DiagQuadratic q(lam);
    VectorXd x = random_vec(rng, n);
    x /= x.norm();
    EXPECT_GE(kantorovich_residual(q, x), -1e-12);
  }
}

namespace {

// non-quadratic member of F_{mu,L}: (mu/2)|x|^2 + (L-mu) sum log cosh x_i
struct LogCosh : SmoothOracle {
  double mu, L;
  LogCosh(double mu_, double L_) : mu(mu_), L(L_) {}
  double value(const VectorXd& x) const override {
    double s = 0.5 * mu * x.squaredNorm();
    for (int i = 0; i < x.size(); ++i) s += (L - mu) * std::log(std::cosh(x(i)));
    return s;
  }
  VectorXd gradient(const VectorXd& x) const override {
    VectorXd g = mu * x;
    for (int i = 0; i < x.size(); ++i) g(i) += (L - mu) * std::tanh(x(i));
    return g;
  }
};

}  // namespace

TEST(GenericOracle, BisectionLineSearchOnNonQuadratic) {
  const ClassParams p(1, 10);
  const LogCosh f(p.mu, p.L);
  VectorXd x0(2);
  x0 << 1.5, -0.8;
  const auto t = run_exact_ls_oracle(f, x0, 6);
  ASSERT_GE(t.num_steps(), 3u);  // stops early at the double-precision floor
  // worst-case ratio bound applies to the whole class
  for (double r : t.ratios()) EXPECT_LE(r, rate(p) + 1e-9);
  // line-search orthogonality at the bisection tolerance
  for (std::size_t i = 0; i + 1 < t.iterates.size(); ++i) {
    const VectorXd gn = f.gradient(t.iterates[i + 1]);
    const VectorXd step = t.iterates[i + 1] - t.iterates[i];
    EXPECT_LE(std::abs(gn.dot(step)), 1e-9);
  }
  // exact evaluations of a class member always interpolate
  std::vector<LabeledPoint> pts;
  {
    LabeledPoint star;
    star.label = "*";
    star.x = {0.0, 0.0};
    star.g = {0.0, 0.0};
    star.f = 0.0;
    pts.push_back(star);
    for (std::size_t i = 0; i < t.iterates.size(); ++i) {
      LabeledPoint q;
      q.label = std::to_string(i);
      q.x = {t.iterates[i](0), t.iterates[i](1)};
      const VectorXd g = f.gradient(t.iterates[i]);
      q.g = {g(0), g(1)};
      q.f = t.values[i];
      pts.push_back(q);
    }
  }
  EXPECT_TRUE(is_interpolable(pts, p, 1e-9));
}

TEST(TrajectoryExport, CsvShape) {
  auto [q, x0] = example1_start(ClassParams(1, 10), 2);
  const auto t = run_exact_ls(q, x0, 2);
  const std::string csv = trajectory_csv(t);
  EXPECT_NE(csv.find("iteration,f_gap,step,ratio"), std::string::npos);
  // three rows beyond the header
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
