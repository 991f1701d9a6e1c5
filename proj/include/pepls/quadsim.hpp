#pragma once

// Quadratic oracles f(x) = 1/2 sum_i lambda_i x_i^2 and simulators for
// gradient descent with exact line search, with a fixed step, and with noisy
// directions constrained to a relative tolerance around the negative
// gradient. Includes the two tight worst-case constructions.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pepls/errors.hpp"
#include "pepls/fclass.hpp"

namespace pepls {

using Eigen::VectorXd;

struct DiagQuadratic {
  VectorXd lambdas;  // Hessian eigenvalues, all positive

  explicit DiagQuadratic(VectorXd lam) : lambdas(std::move(lam)) {
    if (lambdas.size() == 0) throw InputError("DiagQuadratic: empty spectrum");
    if ((lambdas.array() <= 0).any())
      throw InputError("DiagQuadratic: eigenvalues must be positive");
  }

  int dim() const { return static_cast<int>(lambdas.size()); }
  double mu() const { return lambdas.minCoeff(); }
  double L() const { return lambdas.maxCoeff(); }

  double value(const VectorXd& x) const {
    return 0.5 * (lambdas.array() * x.array().square()).sum();
  }
  VectorXd gradient(const VectorXd& x) const {
    return (lambdas.array() * x.array()).matrix();
  }
};

// x_{i+1} = x_i - steps[i] * directions[i]; values[i] = f(x_i) (f_* = 0 for
// all DiagQuadratic instances).
struct Trajectory {
  std::vector<VectorXd> iterates;
  std::vector<double> values;
  std::vector<double> steps;
  std::vector<VectorXd> directions;

  std::size_t num_steps() const { return steps.size(); }

  // f-gap contraction between consecutive iterates.
  std::vector<double> ratios() const {
    std::vector<double> r;
    for (std::size_t i = 1; i < values.size(); ++i) r.push_back(values[i] / values[i - 1]);
    return r;
  }
};

// Decides d_i given (iteration, current point, current gradient). The runner
// checks conformance: the ray of d_i must pass within relative tolerance eps
// of the negative gradient.
using DirectionPolicy = std::function<VectorXd(int iter, const VectorXd& x, const VectorXd& g)>;

namespace detail {
inline bool at_optimum(const VectorXd& x, const VectorXd& g) {
  return g.norm() <= 1e-14 * (1.0 + x.norm());
}
}  // namespace detail

// Minimizing step along the negative gradient: gamma = |g|^2 / (g'Qg).
inline double exact_ls_step(const DiagQuadratic& q, const VectorXd& x) {
  const VectorXd g = q.gradient(x);
  if (detail::at_optimum(x, g)) throw StateError("exact_ls_step: already at the optimum");
  return g.squaredNorm() / (g.array().square() * q.lambdas.array()).sum();
}

inline Trajectory run_exact_ls(const DiagQuadratic& q, const VectorXd& x0, int iters) {
  if (iters < 0) throw InputError("run_exact_ls: negative iteration count");
  Trajectory t;
  VectorXd x = x0;
  t.iterates.push_back(x);
  t.values.push_back(q.value(x));
  for (int i = 0; i < iters; ++i) {
    const VectorXd g = q.gradient(x);
    if (detail::at_optimum(x, g)) break;
    const double gamma = g.squaredNorm() / (g.array().square() * q.lambdas.array()).sum();
    x -= gamma * g;
    t.iterates.push_back(x);
    t.values.push_back(q.value(x));
    t.steps.push_back(gamma);
    t.directions.push_back(g);
  }
  return t;
}

inline Trajectory run_fixed_step(const DiagQuadratic& q, const VectorXd& x0, double gamma,
                                 int iters) {
  if (iters < 0) throw InputError("run_fixed_step: negative iteration count");
  if (gamma < 0) throw InputError("run_fixed_step: negative step length");
  Trajectory t;
  VectorXd x = x0;
  t.iterates.push_back(x);
  t.values.push_back(q.value(x));
  for (int i = 0; i < iters; ++i) {
    const VectorXd g = q.gradient(x);
    x -= gamma * g;
    t.iterates.push_back(x);
    t.values.push_back(q.value(x));
    t.steps.push_back(gamma);
    t.directions.push_back(g);
  }
  return t;
}

// Noisy descent: the policy's direction is checked against the eps-ball in a
// scale-invariant way (only the ray of d matters; the minimizing step
// rescales it anyway): min_{c>=0} |-g - c d| <= eps |g|.
inline Trajectory run_noisy(const DiagQuadratic& q, const VectorXd& x0, double eps,
                            const DirectionPolicy& policy, int iters) {
  if (eps < 0 || eps >= 1) throw InputError("run_noisy: eps must lie in [0, 1)");
  if (iters < 0) throw InputError("run_noisy: negative iteration count");
  Trajectory t;
  VectorXd x = x0;
  t.iterates.push_back(x);
  t.values.push_back(q.value(x));
  for (int i = 0; i < iters; ++i) {
    const VectorXd g = q.gradient(x);
    if (detail::at_optimum(x, g)) break;
    const VectorXd d = policy(i, x, g);
    if (d.size() != x.size()) throw ContractError("direction policy: dimension mismatch");
    const double dn2 = d.squaredNorm();
    const double scale = dn2 > 0 ? std::max(0.0, -g.dot(d)) / dn2 : 0.0;
    const double dist = (-g - scale * d).norm();
    if (dist > eps * g.norm() * (1.0 + 1e-9) + 1e-300)
      throw ContractError("direction policy left the eps-ball at iteration " +
                          std::to_string(i));
    const double dQd = (d.array().square() * q.lambdas.array()).sum();
    const double gamma = g.dot(d) / dQd;
    x -= gamma * d;
    // exact line search along d makes the next gradient orthogonal to d
    const VectorXd gn = q.gradient(x);
    if (std::abs(gn.dot(d)) > 1e-10 * std::max(1.0, gn.norm() * d.norm()))
      throw NumericalError("run_noisy: line-search orthogonality lost at iteration " +
                           std::to_string(i));
    t.iterates.push_back(x);
    t.values.push_back(q.value(x));
    t.steps.push_back(gamma);
    t.directions.push_back(d);
  }
  return t;
}

inline DirectionPolicy negative_gradient_policy() {
  return [](int, const VectorXd&, const VectorXd& g) { return VectorXd(-g); };
}

// Rotates the negative gradient in the (first, last) coordinate plane by
// theta. Sign convention: the base rotation maps (a, b) to
// (a cos t - b sin t, a sin t + b cos t); alternating flips the angle each
// iteration. This is the orientation that reproduces the tight noisy
// trajectory, and it meets the eps-ball with eps = sin(theta).
inline DirectionPolicy rotation_policy(double theta, bool alternating) {
  if (theta < 0 || theta >= M_PI / 2)
    throw InputError("rotation_policy: theta must lie in [0, pi/2)");
  return [theta, alternating](int iter, const VectorXd&, const VectorXd& g) {
    const double t = (alternating && iter % 2 == 1) ? -theta : theta;
    const double c = std::cos(t), s = std::sin(t);
    VectorXd d = -g;
    const Eigen::Index first = 0, last = d.size() - 1;
    const double a = d(first), b = d(last);
    d(first) = c * a - s * b;
    d(last) = s * a + c * b;
    return d;
  };
}

// Tight instance of the exact line-search bound: lambda = (mu, ..., mu, L),
// x0 = (1/mu, 0, ..., 0, 1/L).
inline std::pair<DiagQuadratic, VectorXd> example1_start(const ClassParams& params, int n) {
  if (n < 2) throw InputError("example1_start: need n >= 2");
  VectorXd lam = VectorXd::Constant(n, params.mu);
  lam(n - 1) = params.L;
  VectorXd x0 = VectorXd::Zero(n);
  x0(0) = 1.0 / params.mu;
  x0(n - 1) = 1.0 / params.L;
  return {DiagQuadratic(lam), x0};
}

// Tight instance of the noisy bound: same spectrum, last coordinate of x0
// shrunk to (1/L) sqrt((1-eps)/(1+eps)).
inline std::pair<DiagQuadratic, VectorXd> example2_start(const ClassParams& params, double eps,
                                                         int n) {
  if (n < 2) throw InputError("example2_start: need n >= 2");
  if (eps < 0 || eps >= 1) throw InputError("example2_start: eps must lie in [0, 1)");
  auto [q, x0] = example1_start(params, n);
  x0(n - 1) = std::sqrt((1 - eps) / (1 + eps)) / params.L;
  return {q, x0};
}

// (mu+L)^2/(4 mu L) - (x'Qx)(x'Q^{-1}x) for a unit vector x; mu, L are the
// extreme eigenvalues of this instance. Nonnegative by the Kantorovich
// inequality, zero at the balanced two-eigenvector combination.
inline double kantorovich_residual(const DiagQuadratic& q, const VectorXd& x) {
  if (std::abs(x.norm() - 1.0) > 1e-12)
    throw InputError("kantorovich_residual: x must be a unit vector");
  const double mu = q.mu(), L = q.L();
  const double bound = (mu + L) * (mu + L) / (4 * mu * L);
  const double xQx = (x.array().square() * q.lambdas.array()).sum();
  const double xQinvx = (x.array().square() / q.lambdas.array()).sum();
  return bound - xQx * xQinvx;
}

// Fixed-step bound f(x_i) - f_* <= (L/2) rho^{2i} |x0 - x_*|^2 for
// gamma = 2/(mu+L), checked at relative tolerance 1e-10.
inline bool bound_check_nesterov(const Trajectory& traj, const ClassParams& params,
                                 const VectorXd& x0) {
  const double rho = (params.L - params.mu) / (params.L + params.mu);
  double bound = 0.5 * params.L * x0.squaredNorm();
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    if (traj.values[i] > bound * (1.0 + 1e-10)) return false;
    bound *= rho * rho;
  }
  return true;
}

// --- general smooth oracles (spot checks beyond quadratics) ---

struct SmoothOracle {
  virtual ~SmoothOracle() = default;
  virtual double value(const VectorXd& x) const = 0;
  virtual VectorXd gradient(const VectorXd& x) const = 0;
};

// Exact line search by bracketing + bisection on phi'(gamma) with
// phi(gamma) = f(x - gamma d). Assumes d is a descent direction.
inline double exact_ls_bisect(const SmoothOracle& f, const VectorXd& x, const VectorXd& d,
                              double tol = 1e-12, int max_bisect = 200) {
  const auto slope = [&](double gamma) { return -f.gradient(x - gamma * d).dot(d); };
  double lo = 0.0, hi = 1.0;
  if (slope(0.0) >= 0) throw InputError("exact_ls_bisect: not a descent direction");
  int expand = 0;
  while (slope(hi) < 0) {
    lo = hi;
    hi *= 2;
    if (++expand > 200) throw NumericalError("exact_ls_bisect: no bracket found");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < max_bisect; ++i) {
    mid = 0.5 * (lo + hi);
    const double s = slope(mid);
    if (std::abs(s) <= tol) break;
    (s < 0 ? lo : hi) = mid;
  }
  return mid;
}

inline Trajectory run_exact_ls_oracle(const SmoothOracle& f, const VectorXd& x0, int iters,
                                      double fstar = 0.0) {
  if (iters < 0) throw InputError("run_exact_ls_oracle: negative iteration count");
  Trajectory t;
  VectorXd x = x0;
  t.iterates.push_back(x);
  t.values.push_back(f.value(x) - fstar);
  for (int i = 0; i < iters; ++i) {
    const VectorXd g = f.gradient(x);
    if (detail::at_optimum(x, g)) break;
    const double gamma = exact_ls_bisect(f, x, g);
    const VectorXd x_next = x - gamma * g;
    const double f_next = f.value(x_next) - fstar;
    if (!(f_next < t.values.back())) break;  // numerical floor: no descent left
    x = x_next;
    t.iterates.push_back(x);
    t.values.push_back(f_next);
    t.steps.push_back(gamma);
    t.directions.push_back(g);
  }
  return t;
}

// --- data-set bridges and exports ---

// LabeledPoints ("0", "1", ..., plus the minimizer "*") induced by a
// trajectory on a quadratic; the raw material for interpolation checks.
inline std::vector<LabeledPoint> trajectory_points(const DiagQuadratic& q,
                                                   const Trajectory& traj,
                                                   bool include_minimizer = true) {
  std::vector<LabeledPoint> pts;
  const int n = q.dim();
  if (include_minimizer) {
    LabeledPoint star;
    star.label = "*";
    star.x.assign(n, 0.0);
    star.g.assign(n, 0.0);
    star.f = 0.0;
    pts.push_back(std::move(star));
  }
  for (std::size_t i = 0; i < traj.iterates.size(); ++i) {
    LabeledPoint p;
    p.label = std::to_string(i);
    const VectorXd& x = traj.iterates[i];
    const VectorXd g = q.gradient(x);
    p.x.assign(x.data(), x.data() + n);
    p.g.assign(g.data(), g.data() + n);
    p.f = traj.values[i];
    pts.push_back(std::move(p));
  }
  return pts;
}

// CSV export: iteration, f_gap, step, ratio (step blank on the last row,
// ratio blank on the first).
inline std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,f_gap,step,ratio\n";
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    out << i << ',' << traj.values[i] << ',';
    if (i < traj.steps.size()) out << traj.steps[i];
    out << ',';
    if (i > 0 && traj.values[i - 1] != 0) out << traj.values[i] / traj.values[i - 1];
    out << '\n';
  }
  return out.str();
}

}  // namespace pepls
