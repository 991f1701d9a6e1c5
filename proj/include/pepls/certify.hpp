#pragma once

// Exact reconstruction and verification of the closed-form proof
// certificates: the five scalar multipliers and key inequality for exact line
// search, its symmetric rewriting, the fixed-step combined inequality, and
// the noisy certificate (scalar multipliers, rank-one 2x2 matrix multiplier,
// alpha coefficients). Everything here runs on GMP rationals; a residual is
// accepted only when it is identically zero.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pepls/errors.hpp"
#include "pepls/fclass.hpp"
#include "pepls/rational.hpp"

namespace pepls {

using RationalClassParams = ClassParamsT<Rational>;

// Rational combination over the translation-invariant basis
// (x0 - x*, x1 - x*, g0, g1).
using CombiVec = std::array<Rational, 4>;

inline CombiVec basis_vec(int i) {
  CombiVec v{Rational(0), Rational(0), Rational(0), Rational(0)};
  v[static_cast<std::size_t>(i)] = 1;
  return v;
}

inline CombiVec operator-(const CombiVec& a, const CombiVec& b) {
  CombiVec r;
  for (int i = 0; i < 4; ++i) r[i] = a[i] - b[i];
  return r;
}

inline CombiVec operator+(const CombiVec& a, const CombiVec& b) {
  CombiVec r;
  for (int i = 0; i < 4; ++i) r[i] = a[i] + b[i];
  return r;
}

inline CombiVec operator*(const Rational& s, const CombiVec& a) {
  CombiVec r;
  for (int i = 0; i < 4; ++i) r[i] = s * a[i];
  return r;
}

// Quadratic form in the Gram entries of the basis, plus a linear part in
// (f0 - f*, f1 - f*) and a constant. Value semantics, exact coefficients.
struct QForm {
  std::array<std::array<Rational, 4>, 4> m{};  // symmetric by construction
  std::array<Rational, 2> lin{};
  Rational cst{};

  QForm& operator+=(const QForm& o) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m[a][b] += o.m[a][b];
    lin[0] += o.lin[0];
    lin[1] += o.lin[1];
    cst += o.cst;
    return *this;
  }
  QForm& operator-=(const QForm& o) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m[a][b] -= o.m[a][b];
    lin[0] -= o.lin[0];
    lin[1] -= o.lin[1];
    cst -= o.cst;
    return *this;
  }
  friend QForm operator+(QForm a, const QForm& b) { return a += b; }
  friend QForm operator-(QForm a, const QForm& b) { return a -= b; }
  friend QForm operator*(const Rational& s, QForm a) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a.m[i][j] *= s;
    a.lin[0] *= s;
    a.lin[1] *= s;
    a.cst *= s;
    return a;
  }

  bool is_zero() const {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (m[a][b] != 0) return false;
    return lin[0] == 0 && lin[1] == 0 && cst == 0;
  }

  bool is_symmetric() const {
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (m[a][b] != m[b][a]) return false;
    return true;
  }

  double max_abs_coeff() const {
    double mx = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) mx = std::max(mx, std::abs(to_double(m[a][b])));
    mx = std::max(mx, std::abs(to_double(lin[0])));
    mx = std::max(mx, std::abs(to_double(lin[1])));
    return std::max(mx, std::abs(to_double(cst)));
  }

  // Names the first nonzero coefficient, for failure messages.
  std::string describe_nonzero() const {
    static const char* base[4] = {"x0-x*", "x1-x*", "g0", "g1"};
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b)
        if (m[a][b] != 0)
          return std::string("<") + base[a] + ", " + base[b] + ">: " + to_string(m[a][b]);
    if (lin[0] != 0) return "f0: " + to_string(lin[0]);
    if (lin[1] != 0) return "f1: " + to_string(lin[1]);
    if (cst != 0) return "const: " + to_string(cst);
    return "zero";
  }

  // Substitute x1 - x* <- x0 - x* - gamma g0 (basis column 1 mapped into
  // columns 0 and 2) and return the transformed form.
  QForm substitute_x1(const Rational& gamma) const {
    std::array<CombiVec, 4> repl = {basis_vec(0), basis_vec(0) - gamma * basis_vec(2),
                                    basis_vec(2), basis_vec(3)};
    QForm out;
    out.lin = lin;
    out.cst = cst;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (m[a][b] != 0)
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) out.m[p][q] += m[a][b] * repl[a][p] * repl[b][q];
    return out;
  }
};

// Exact rank of the bilinear-form matrix, by fraction-free elimination.
inline int qform_rank(const QForm& q) {
  std::array<std::array<Rational, 4>, 4> a = q.m;
  int rank = 0;
  for (int col = 0; col < 4 && rank < 4; ++col) {
    int pivot = -1;
    for (int r = rank; r < 4; ++r)
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(a[rank], a[pivot]);
    for (int r = rank + 1; r < 4; ++r) {
      if (a[r][col] == 0) continue;
      const Rational factor = a[r][col] / a[rank][col];
      for (int c = col; c < 4; ++c) a[r][c] -= factor * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

inline QForm inner(const CombiVec& u, const CombiVec& v) {
  QForm q;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Rational t = u[a] * v[b] / 2;
      q.m[a][b] += t;
      q.m[b][a] += t;
    }
  return q;
}

inline QForm normsq(const CombiVec& u) { return inner(u, u); }

inline QForm f_term(int which, const Rational& coeff) {
  QForm q;
  q.lin[static_cast<std::size_t>(which)] = coeff;
  return q;
}

namespace detail {

// The five one-iteration inequalities, each in "expression >= 0" form over
// the basis (x0-x*, x1-x*, g0, g1) with g* = 0 and f* = 0.
struct OneStepSystem {
  QForm interp_01, interp_s0, interp_s1;  // interpolation pairs (0,1), (*,0), (*,1)
  QForm grad_ortho;                       // -<g0, g1>
  QForm line_search;                      // <g1, x0 - x1>
};

inline OneStepSystem one_step_system(const RationalClassParams& p) {
  const CombiVec x0 = basis_vec(0), x1 = basis_vec(1), g0 = basis_vec(2), g1 = basis_vec(3);
  const CombiVec zero{Rational(0), Rational(0), Rational(0), Rational(0)};
  const Rational kappa = p.mu / p.L;
  const Rational cq = 1 / (2 * (1 - kappa));

  // f_i - f_j - <g_j, x_i-x_j> - cq ((1/L)|g_i-g_j|^2 + mu |x_i-x_j|^2
  //                                   - (2 mu/L) <g_j-g_i, x_j-x_i>)
  const auto interp = [&](int fi, int fj, const CombiVec& xi, const CombiVec& xj,
                          const CombiVec& gi, const CombiVec& gj) {
    QForm q;
    if (fi >= 0) q += f_term(fi, Rational(1));
    if (fj >= 0) q += f_term(fj, Rational(-1));
    q -= inner(gj, xi - xj);
    QForm quad = (1 / p.L) * normsq(gi - gj) + p.mu * normsq(xi - xj) -
                 (2 * kappa) * inner(gj - gi, xj - xi);
    q -= cq * quad;
    return q;
  };

  OneStepSystem sys;
  sys.interp_01 = interp(0, 1, x0, x1, g0, g1);
  sys.interp_s0 = interp(-1, 0, zero, x0, zero, g0);
  sys.interp_s1 = interp(-1, 1, zero, x1, zero, g1);
  sys.grad_ortho = Rational(-1) * inner(g0, g1);
  sys.line_search = inner(g1, x0 - x1);
  return sys;
}

}  // namespace detail

// Multipliers and slack data of the exact line-search certificate.
struct CertificateExactLS {
  Rational y1, y2, y3, y4, y5;
  Rational rho;          // (L-mu)/(L+mu)
  Rational c1, c2;       // coefficients of the two squared slack norms
  CombiVec slack1, slack2;
};

inline CertificateExactLS multipliers_exact(const RationalClassParams& p) {
  const Rational &mu = p.mu, &L = p.L;
  CertificateExactLS c;
  c.y1 = (L - mu) / (L + mu);
  c.y2 = 2 * mu * (L - mu) / ((L + mu) * (L + mu));
  c.y3 = 2 * mu / (L + mu);
  c.y4 = 2 / (L + mu);
  c.y5 = 1;
  c.rho = (L - mu) / (L + mu);
  c.c1 = mu * L * (L + 3 * mu) / (2 * (L + mu) * (L + mu));
  c.c2 = 2 * L * mu * mu / (L * L + 2 * L * mu - 3 * mu * mu);
  const CombiVec x0 = basis_vec(0), x1 = basis_vec(1), g0 = basis_vec(2), g1 = basis_vec(3);
  c.slack1 = x0 - ((L + mu) / (L + 3 * mu)) * x1 - ((3 * L + mu) / (L * L + 3 * mu * L)) * g0 -
             ((L + mu) / (L * L + 3 * mu * L)) * g1;
  c.slack2 = x1 - ((L - mu) * (L - mu) / (2 * mu * L * (L + mu))) * g0 -
             ((L + mu) / (2 * mu * L)) * g1;
  return c;
}

// Aggregates the five inequalities with the certificate multipliers and
// subtracts the key-inequality right-hand side; the returned QForm must be
// identically zero.
inline QForm verify_identity_exact(const RationalClassParams& p) {
  const auto sys = detail::one_step_system(p);
  const auto cert = multipliers_exact(p);
  QForm agg = cert.y1 * sys.interp_01 + cert.y2 * sys.interp_s0 + cert.y3 * sys.interp_s1 +
              cert.y4 * sys.grad_ortho + cert.y5 * sys.line_search;
  QForm rhs = f_term(0, cert.rho * cert.rho) + f_term(1, Rational(-1)) -
              cert.c1 * normsq(cert.slack1) - cert.c2 * normsq(cert.slack2);
  return agg - rhs;
}

// Result of the symmetric-rewriting check. When kappa = mu/L is a rational
// square the check is exact; otherwise sqrt(kappa) is replaced by a rational
// within 1e-60 and the residual coefficients are only guaranteed tiny.
struct SymmetricCheck {
  QForm residual;
  bool exact;
};

inline SymmetricCheck symmetric_form_check(const RationalClassParams& p) {
  const Rational kappa = p.mu / p.L;
  Rational sk;
  SymmetricCheck out;
  out.exact = rational_square_root(kappa, &sk);
  if (!out.exact) {
    Rational tol = 1;
    for (int i = 0; i < 60; ++i) tol /= 10;
    sk = sqrt_upper_bound(kappa, tol);
  }
  // sqrt(L mu) = L sqrt(kappa)
  const Rational sLmu = p.L * sk;
  const CombiVec x0 = basis_vec(0), x1 = basis_vec(1), g0 = basis_vec(2), g1 = basis_vec(3);
  const Rational one_plus = (1 + sk) * (1 + sk) / (1 + kappa);
  const Rational one_minus = (1 - sk) * (1 - sk) / (1 + kappa);
  const CombiVec s1 =
      Rational(-1) * (one_plus * (x0 - (1 / sLmu) * g0)) + (x1 + (1 / sLmu) * g1);
  const CombiVec s2 = one_minus * (x0 + (1 / sLmu) * g0) - (x1 - (1 / sLmu) * g1);
  const QForm sym = (p.mu / 4) * ((1 / (1 + sk)) * normsq(s1) + (1 / (1 - sk)) * normsq(s2));
  const auto cert = multipliers_exact(p);
  const QForm key = cert.c1 * normsq(cert.slack1) + cert.c2 * normsq(cert.slack2);
  out.residual = key - sym;
  return out;
}

// Noisy certificate: scalar multipliers, the rank-one matrix multiplier for
// the 2x2 LMI, the alpha coefficients and the slack-square coefficients.
struct CertificateNoisy {
  Rational L_eps, mu_eps, kappa_eps, rho_eps;
  Rational y1, y2, y3, y4;  // on interp(0,1), interp(*,0), interp(*,1), line search
  Rational a;               // 1/(L_eps + mu_eps)
  std::array<std::array<Rational, 2>, 2> multiplier;  // [[a rho, -a], [-a, a/rho]]
  Rational alpha1, alpha2, alpha3, alpha4, alpha5;
  Rational slack_coeff1, slack_coeff2;
  CombiVec slack1, slack2;
};

inline CertificateNoisy noisy_certificate(const RationalClassParams& p, const Rational& eps) {
  if (eps < 0 || eps >= 1) throw InputError("noisy_certificate: eps must lie in [0, 1)");
  const Rational &mu = p.mu, &L = p.L;
  CertificateNoisy c;
  c.L_eps = (1 + eps) * L;
  c.mu_eps = (1 - eps) * mu;
  c.kappa_eps = c.mu_eps / c.L_eps;
  c.rho_eps = (1 - c.kappa_eps) / (1 + c.kappa_eps);
  c.y1 = c.rho_eps;
  c.y2 = 2 * c.kappa_eps * (1 - c.kappa_eps) / ((1 + c.kappa_eps) * (1 + c.kappa_eps));
  c.y3 = 2 * c.kappa_eps / (1 + c.kappa_eps);
  c.y4 = 1;
  c.a = 1 / (c.L_eps + c.mu_eps);
  c.multiplier = {{{c.a * c.rho_eps, -c.a}, {-c.a, c.a / c.rho_eps}}};
  const Rational Le = c.L_eps, me = c.mu_eps;
  c.alpha1 = -(Le + me) / (Le + 3 * me);
  c.alpha2 = -(4 * L - Le + me) / (L * (Le + 3 * me));
  c.alpha3 = (Le + me) * (-4 * L + 3 * Le + me) / (L * (Le - me) * (Le + 3 * me));
  c.alpha4 = -(L - mu) * (Le - me) / (2 * L * mu * (Le + me));
  c.alpha5 = -(L + mu) / (2 * L * mu);
  c.slack_coeff1 = L * mu * (Le - me) * (Le + 3 * me) / (2 * (L - mu) * (Le + me) * (Le + me));
  c.slack_coeff2 = 2 * L * mu * me / ((L - mu) * (Le + 3 * me));
  const CombiVec x0 = basis_vec(0), x1 = basis_vec(1), g0 = basis_vec(2), g1 = basis_vec(3);
  c.slack1 = x0 + c.alpha1 * x1 + c.alpha2 * g0 + c.alpha3 * g1;
  c.slack2 = x1 + c.alpha4 * g0 + c.alpha5 * g1;
  return c;
}

// Aggregates interp(0,1), interp(*,0), interp(*,1), the line-search
// inequality and the LMI inner product with the noisy multipliers, subtracts
// the generalized key inequality; must be identically zero.
inline QForm verify_noisy_identity(const RationalClassParams& p, const Rational& eps) {
  const auto sys = detail::one_step_system(p);
  const auto c = noisy_certificate(p, eps);
  const CombiVec g0 = basis_vec(2), g1 = basis_vec(3);
  // <multiplier, [[eps|g0|^2, g0'g1], [g0'g1, eps|g1|^2]]>
  const QForm lmi = (c.multiplier[0][0] * eps) * normsq(g0) +
                    (2 * c.multiplier[0][1]) * inner(g0, g1) +
                    (c.multiplier[1][1] * eps) * normsq(g1);
  QForm agg = c.y1 * sys.interp_01 + c.y2 * sys.interp_s0 + c.y3 * sys.interp_s1 +
              c.y4 * sys.line_search + lmi;
  QForm rhs = f_term(0, c.rho_eps * c.rho_eps) + f_term(1, Rational(-1)) -
              c.slack_coeff1 * normsq(c.slack1) - c.slack_coeff2 * normsq(c.slack2);
  return agg - rhs;
}

// Fixed-step remark: y4 (-g0'g1) + y5 <g1, x0-x1> equals the combined form
// <g1, x0 - (2/(L+mu)) g0 - x1>, which vanishes under the substitution
// x1 = x0 - (2/(L+mu)) g0.
struct FixedStepCheck {
  QForm combined_residual;  // aggregation minus combined inner product
  QForm substituted;        // combined form after the substitution
  int combined_rank;        // rank of the combined bilinear form
};

inline FixedStepCheck fixed_step_combined_check(const RationalClassParams& p) {
  const auto sys = detail::one_step_system(p);
  const auto cert = multipliers_exact(p);
  const Rational gamma = 2 / (p.L + p.mu);
  const CombiVec x0 = basis_vec(0), x1 = basis_vec(1), g0 = basis_vec(2), g1 = basis_vec(3);
  const QForm combined = inner(g1, x0 - gamma * g0 - x1);
  FixedStepCheck out;
  out.combined_residual = cert.y4 * sys.grad_ortho + cert.y5 * sys.line_search - combined;
  out.substituted = combined.substitute_x1(gamma);
  out.combined_rank = qform_rank(combined);
  return out;
}

}  // namespace pepls
