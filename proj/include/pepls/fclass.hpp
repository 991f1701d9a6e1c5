#pragma once

// The function class F_{mu,L} of mu-strongly convex functions with
// L-Lipschitz gradient: interpolation conditions for finite data sets and the
// closed-form worst-case rates of gradient descent with exact line search.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pepls/errors.hpp"

namespace pepls {

template <class T>
struct ClassParamsT {
  T mu;  // strong-convexity modulus
  T L;   // gradient Lipschitz constant

  ClassParamsT(T mu_, T L_) : mu(mu_), L(L_) {
    if (!(mu > 0) || !(L > 0) || !(mu < L))
      throw InputError("class parameters require 0 < mu < L");
  }

  T condition_ratio() const { return mu / L; }  // kappa in (0,1)
};

using ClassParams = ClassParamsT<double>;

// One (point, value, gradient) triple; the unit of interpolation data.
template <class T>
struct PointDataT {
  std::string label;
  std::vector<T> x;
  T f{};
  std::vector<T> g;
};

using LabeledPoint = PointDataT<double>;

namespace detail {
template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

// LHS - RHS of the pairwise interpolation inequality
//   f_i - f_j - <g_j, x_i - x_j>
//     >= 1/(2(1-mu/L)) * ( (1/L)|g_i-g_j|^2 + mu|x_i-x_j|^2
//                           - (2mu/L)<g_j-g_i, x_j-x_i> )
// Nonnegative for the ordered pair (i, j) iff the condition holds.
template <class T>
T interp_residual(const PointDataT<T>& pi, const PointDataT<T>& pj,
                  const ClassParamsT<T>& params) {
  const std::size_t n = pi.x.size();
  if (pi.g.size() != n || pj.x.size() != n || pj.g.size() != n)
    throw InputError("interp_residual: dimension mismatch");
  std::vector<T> dx(n), dg(n);
  for (std::size_t k = 0; k < n; ++k) {
    dx[k] = pi.x[k] - pj.x[k];
    dg[k] = pi.g[k] - pj.g[k];
  }
  const T lhs = pi.f - pj.f - detail::dot(pj.g, dx);
  const T kappa = params.mu / params.L;
  // <g_j - g_i, x_j - x_i> = <dg, dx> with dg = g_i - g_j, dx = x_i - x_j
  const T quad = detail::dot(dg, dg) / params.L + params.mu * detail::dot(dx, dx) -
                 (T(2) * kappa) * detail::dot(dg, dx);
  return lhs - quad / (T(2) * (T(1) - kappa));
}

// True iff every ordered pair i != j has interp_residual >= -tol. The exact
// path is the same template instantiated at Rational with tol = 0.
template <class T>
bool is_interpolable(std::span<const PointDataT<T>> points,
                     const ClassParamsT<T>& params, const T& tol) {
  if (points.empty()) throw InputError("is_interpolable: empty data set");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j)
      if (i != j && interp_residual(points[i], points[j], params) < -tol) return false;
  return true;
}

template <class T>
bool is_interpolable(const std::vector<PointDataT<T>>& points,
                     const ClassParamsT<T>& params, const T& tol) {
  return is_interpolable(std::span<const PointDataT<T>>(points), params, tol);
}

// Worst-case per-iteration contraction of f - f_* under exact line search:
// ((L-mu)/(L+mu))^2.
inline double rate(const ClassParams& params) {
  const double r = (params.L - params.mu) / (params.L + params.mu);
  return r * r;
}

// Noisy variant: directions within relative tolerance eps of the negative
// gradient contract by ((1-k_eps)/(1+k_eps))^2 with
// k_eps = (mu/L)(1-eps)/(1+eps), evaluated as (L_eps-mu_eps)/(L_eps+mu_eps)
// with L_eps = (1+eps)L, mu_eps = (1-eps)mu so that eps = 0 reproduces
// rate() exactly.
inline double noisy_rate(const ClassParams& params, double eps) {
  if (eps < 0 || eps >= 1)
    throw InputError("noisy_rate: eps must lie in [0, 1)");
  const double L_eps = (1 + eps) * params.L;
  const double mu_eps = (1 - eps) * params.mu;
  const double r = (L_eps - mu_eps) / (L_eps + mu_eps);
  return r * r;
}

// Iterations guaranteeing relative accuracy eps_acc on the objective:
// ceil( log(1/eps) / (2 log((L+mu)/(L-mu))) ). The tiny guard keeps exact
// equality cases (eps = rate^N) from rounding up one step.
inline int iteration_bound(const ClassParams& params, double eps_acc) {
  if (!(eps_acc > 0) || !(eps_acc < 1))
    throw InputError("iteration_bound: accuracy must lie in (0, 1)");
  const double v = 0.5 * std::log(1.0 / eps_acc) /
                   std::log((params.L + params.mu) / (params.L - params.mu));
  const int n = static_cast<int>(std::ceil(v - 1e-12 * std::max(1.0, v)));
  return n < 1 ? 1 : n;
}

}  // namespace pepls
