#pragma once

// Shared generators for the test suites: random strictly feasible SDPs
// (both primal and dual interiors nonempty by construction) and random
// rational class parameters.

#include "pepls/fclass.hpp"
#include "pepls/rational.hpp"
#include "pepls/rng.hpp"
#include "pepls/sdp.hpp"

namespace pepls::testutil {

// Strictly feasible random instance: one 3x3 PSD block, one 2-entry diagonal
// block, one free variable, five constraints (two of them inequalities).
// b is chosen from a random interior primal point, C from a random interior
// dual point, so the optimum exists and strong duality holds.
inline SdpProblem random_sdp(SplitMix64& rng) {
  const int s = 3, dlen = 2, m = 5, nfree = 1;
  SdpProblem p = SdpProblem::with_blocks({s}, {dlen}, nfree);

  const auto rand_sym = [&](int n) {
    MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) M(i, j) = M(j, i) = rng.uniform(-1, 1);
    return M;
  };

  // interior primal point
  MatrixXd X0 = rand_sym(s);
  X0 = 0.3 * (X0 * X0.transpose()) + MatrixXd::Identity(s, s);
  VectorXd xd0(dlen);
  for (int t = 0; t < dlen; ++t) xd0(t) = rng.uniform(0.5, 2.0);
  const double u0 = rng.uniform(-1, 1);

  // interior dual point
  VectorXd y0(m);
  std::vector<SdpConstraint> cons;
  for (int k = 0; k < m; ++k) {
    auto con = p.blank_constraint();
    con.A_psd[0] = rand_sym(s);
    for (int t = 0; t < dlen; ++t) con.A_diag[0](t) = rng.uniform(-1, 1);
    con.a_free(0) = rng.uniform(-1, 1);
    con.rel = k < 2 ? Relation::Le : Relation::Eq;
    con.name = "c" + std::to_string(k);
    y0(k) = con.rel == Relation::Le ? rng.uniform(0.1, 1.0) : rng.uniform(-1, 1);
    cons.push_back(std::move(con));
  }
  // b from the primal point (interior margin on inequality rows)
  for (int k = 0; k < m; ++k) {
    double lhs = (cons[k].A_psd[0].array() * X0.array()).sum() + cons[k].A_diag[0].dot(xd0) +
                 cons[k].a_free(0) * u0;
    cons[k].b = lhs + (cons[k].rel == Relation::Le ? rng.uniform(0.2, 1.0) : 0.0);
  }
  // C = sum y0_k A_k - S0 with S0 interior, so S0 = A*(y0) - C is PSD
  MatrixXd S0 = rand_sym(s);
  S0 = 0.3 * (S0 * S0.transpose()) + MatrixXd::Identity(s, s);
  MatrixXd C = -S0;
  for (int k = 0; k < m; ++k) C += y0(k) * cons[k].A_psd[0];
  p.C_psd[0] = C;
  VectorXd Cd = VectorXd::Zero(dlen);
  for (int t = 0; t < dlen; ++t) Cd(t) = -rng.uniform(0.5, 1.5);
  for (int k = 0; k < m; ++k) Cd += y0(k) * cons[k].A_diag[0];
  p.C_diag[0] = Cd;
  double cf = 0;
  for (int k = 0; k < m; ++k) cf += y0(k) * cons[k].a_free(0);
  p.c_free(0) = cf;
  p.constraints = std::move(cons);
  return p;
}

// Random rational parameters with numerators/denominators up to 10^4 and
// 0 < mu < L.
inline ClassParamsT<Rational> random_rational_params(SplitMix64& rng) {
  const Rational mu = rat(rng.uniform_int(1, 10000), rng.uniform_int(1, 10000));
  const Rational gap = rat(rng.uniform_int(1, 10000), rng.uniform_int(1, 10000));
  return {mu, mu + gap};
}

inline Rational random_rational_eps(SplitMix64& rng) {
  const long den = rng.uniform_int(2, 10000);
  return rat(rng.uniform_int(0, den - 1), den);
}

}  // namespace pepls::testutil
