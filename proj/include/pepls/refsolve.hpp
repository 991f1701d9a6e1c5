#pragma once

// First-order reference solver used to cross-check the interior-point method
// through exported problem files. Plain consensus ADMM: alternate an affine
// projection (with the linear objective folded in) against a projection onto
// the cone, with an adaptive penalty. Slow but algorithmically unrelated to
// the path-following solver, which is the point.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "pepls/errors.hpp"
#include "pepls/sdp.hpp"

namespace pepls {

struct RefSolveOptions {
  double tol = 1e-9;       // primal/dual residual target (infinity norm)
  int max_iter = 200000;
  double rho = 1.0;        // initial penalty
};

struct RefSolution {
  double objective = 0;
  int iterations = 0;
  bool converged = false;
};

inline RefSolution ref_solve(const SdpProblem& problem, const RefSolveOptions& opts = {}) {
  problem.validate();
  const int m = problem.num_constraints();
  const int nfree = problem.num_free();
  const int npsd = static_cast<int>(problem.psd_sizes.size());
  const int ndiag = static_cast<int>(problem.diag_sizes.size());

  std::vector<int> ineq_rows;
  for (int k = 0; k < m; ++k)
    if (problem.constraints[k].rel == Relation::Le) ineq_rows.push_back(k);
  const int nslack = static_cast<int>(ineq_rows.size());

  // flatten: [vec(PSD blocks) | diag blocks | slacks | free]
  int dim = 0;
  std::vector<int> psd_off, diag_off;
  for (int i = 0; i < npsd; ++i) {
    psd_off.push_back(dim);
    dim += problem.psd_sizes[i] * problem.psd_sizes[i];
  }
  for (int i = 0; i < ndiag; ++i) {
    diag_off.push_back(dim);
    dim += problem.diag_sizes[i];
  }
  const int slack_off = dim;
  dim += nslack;
  const int free_off = dim;
  dim += nfree;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, dim);
  Eigen::VectorXd b(m), q = Eigen::VectorXd::Zero(dim);
  for (int k = 0; k < m; ++k) {
    const auto& con = problem.constraints[k];
    for (int i = 0; i < npsd; ++i) {
      const int s = problem.psd_sizes[i];
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) A(k, psd_off[i] + r * s + c) = con.A_psd[i](r, c);
    }
    for (int i = 0; i < ndiag; ++i)
      for (int t = 0; t < problem.diag_sizes[i]; ++t)
        A(k, diag_off[i] + t) = con.A_diag[i](t);
    for (int t = 0; t < nfree; ++t) A(k, free_off + t) = con.a_free(t);
    b(k) = con.b;
  }
  for (std::size_t t = 0; t < ineq_rows.size(); ++t)
    A(ineq_rows[t], slack_off + static_cast<int>(t)) = 1.0;
  // minimize q'x with q = -vec(C, 0, c)
  for (int i = 0; i < npsd; ++i) {
    const int s = problem.psd_sizes[i];
    for (int r = 0; r < s; ++r)
      for (int c = 0; c < s; ++c) q(psd_off[i] + r * s + c) = -problem.C_psd[i](r, c);
  }
  for (int i = 0; i < ndiag; ++i)
    for (int t = 0; t < problem.diag_sizes[i]; ++t) q(diag_off[i] + t) = -problem.C_diag[i](t);
  for (int t = 0; t < nfree; ++t) q(free_off + t) = -problem.c_free(t);

  Eigen::LLT<Eigen::MatrixXd> gram_llt(A * A.transpose());
  if (gram_llt.info() != Eigen::Success)
    throw NumericalError("ref_solve: rank-deficient constraint system");

  const auto project_affine = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v - A.transpose() * gram_llt.solve(A * v - b));
  };
  const auto project_cone = [&](Eigen::VectorXd v) {
    for (int i = 0; i < npsd; ++i) {
      const int s = problem.psd_sizes[i];
      Eigen::MatrixXd M(s, s);
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) M(r, c) = v(psd_off[i] + r * s + c);
      M = 0.5 * (M + M.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
      M = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) v(psd_off[i] + r * s + c) = M(r, c);
    }
    for (int t = diag_off.empty() ? slack_off : diag_off[0]; t < free_off; ++t)
      v(t) = std::max(0.0, v(t));
    return v;  // free part untouched
  };

  double rho = opts.rho;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim), w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd x = z;
  RefSolution out;
  for (int it = 0; it < opts.max_iter; ++it) {
    x = project_affine(z - w - q / rho);
    const Eigen::VectorXd z_prev = z;
    z = project_cone(x + w);
    w += x - z;
    const double r_prim = (x - z).cwiseAbs().maxCoeff();
    const double r_dual = rho * (z - z_prev).cwiseAbs().maxCoeff();
    if (r_prim < opts.tol && r_dual < opts.tol) {
      out.converged = true;
      out.iterations = it + 1;
      break;
    }
    if ((it + 1) % 50 == 0) {
      if (r_prim > 10 * r_dual) {
        rho *= 2;
        w /= 2;
      } else if (r_dual > 10 * r_prim) {
        rho /= 2;
        w *= 2;
      }
    }
    out.iterations = it + 1;
  }
  out.objective = -q.dot(x);
  return out;
}

}  // namespace pepls
