#pragma once

// Dense block-diagonal semidefinite programming, sized for desk-scale
// performance-estimation instances. Problems are stated as
//
//   maximize  <C, X> + c'u
//   s.t.      <A_k, X> + a_k'u  (= | <=)  b_k      k = 1..m
//             X block-diagonal PSD, u free
//
// with two block kinds: dense PSD blocks and diagonal blocks (componentwise
// nonnegative). The solver is an infeasible-start primal-dual path-following
// method with Nesterov-Todd scaling and a Mehrotra predictor-corrector,
// solving the dense Schur-complement saddle system directly. Inequalities
// get slack variables in one extra diagonal block; free variables stay in
// the KKT system.
//
// Dual convention: S = sum_k y_k A_k - C per block, F'y = c on free
// variables, y_k >= 0 for (<=) rows. Each y_k is the Lagrange multiplier of
// constraint k.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pepls/errors.hpp"

namespace pepls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class BlockKind { Psd, Diag };

struct BlockDesc {
  BlockKind kind;
  int size;
};

enum class Relation { Eq, Le };

struct SdpConstraint {
  std::vector<MatrixXd> A_psd;   // symmetric coefficient per PSD block
  std::vector<VectorXd> A_diag;  // diagonal coefficient per diagonal block
  VectorXd a_free;               // coefficients on free scalar variables
  double b = 0.0;
  Relation rel = Relation::Eq;
  std::string name;
};

struct SdpProblem {
  std::vector<int> psd_sizes;
  std::vector<int> diag_sizes;
  std::vector<MatrixXd> C_psd;
  std::vector<VectorXd> C_diag;
  VectorXd c_free;
  std::vector<SdpConstraint> constraints;

  int num_free() const { return static_cast<int>(c_free.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  std::vector<BlockDesc> blocks() const {
    std::vector<BlockDesc> out;
    for (int s : psd_sizes) out.push_back({BlockKind::Psd, s});
    for (int s : diag_sizes) out.push_back({BlockKind::Diag, s});
    return out;
  }

  // Zero-objective skeleton with consistent shapes.
  static SdpProblem with_blocks(std::vector<int> psd, std::vector<int> diag, int nfree) {
    SdpProblem p;
    p.psd_sizes = std::move(psd);
    p.diag_sizes = std::move(diag);
    for (int s : p.psd_sizes) p.C_psd.push_back(MatrixXd::Zero(s, s));
    for (int s : p.diag_sizes) p.C_diag.push_back(VectorXd::Zero(s));
    p.c_free = VectorXd::Zero(nfree);
    return p;
  }

  SdpConstraint blank_constraint() const {
    SdpConstraint con;
    for (int s : psd_sizes) con.A_psd.push_back(MatrixXd::Zero(s, s));
    for (int s : diag_sizes) con.A_diag.push_back(VectorXd::Zero(s));
    con.a_free = VectorXd::Zero(num_free());
    return con;
  }

  void validate() const {
    const auto check_sym = [](const MatrixXd& M, const std::string& where) {
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + M.cwiseAbs().maxCoeff()))
        throw InputError("non-symmetric coefficient matrix in " + where);
    };
    for (std::size_t i = 0; i < psd_sizes.size(); ++i) {
      if (psd_sizes[i] <= 0) throw InputError("nonpositive PSD block size");
      if (C_psd[i].rows() != psd_sizes[i] || C_psd[i].cols() != psd_sizes[i])
        throw InputError("objective block shape mismatch");
      check_sym(C_psd[i], "objective");
    }
    for (std::size_t i = 0; i < diag_sizes.size(); ++i)
      if (diag_sizes[i] <= 0 || C_diag[i].size() != diag_sizes[i])
        throw InputError("diagonal block shape mismatch");
    for (const auto& con : constraints) {
      if (con.A_psd.size() != psd_sizes.size() || con.A_diag.size() != diag_sizes.size() ||
          con.a_free.size() != c_free.size())
        throw InputError("constraint shape mismatch in " + con.name);
      for (std::size_t i = 0; i < psd_sizes.size(); ++i) {
        if (con.A_psd[i].rows() != psd_sizes[i] || con.A_psd[i].cols() != psd_sizes[i])
          throw InputError("constraint block shape mismatch in " + con.name);
        check_sym(con.A_psd[i], con.name.empty() ? "constraint" : con.name);
      }
    }
  }
};

enum class SolveStatus { Optimal, MaxIter, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max-iterations";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

struct IterStat {
  int iter = 0;
  double pobj = 0, dobj = 0, mu = 0;
  double primal_infeas = 0, dual_infeas = 0;
  double alpha_p = 0, alpha_d = 0, sigma = 0;
};

struct SolveOptions {
  double tol_gap = 1e-9;
  double tol_feas = 1e-9;
  int max_iter = 200;
  std::ostream* log = nullptr;  // iteration log, optional
};

// When the problem has (<=) rows, X/S carry one extra trailing diagonal
// block holding the slacks and their duals, so that <X, S> equals the full
// complementarity gap.
struct SdpSolution {
  std::vector<MatrixXd> X_psd;
  std::vector<VectorXd> X_diag;
  VectorXd u;
  VectorXd y;
  std::vector<MatrixXd> S_psd;
  std::vector<VectorXd> S_diag;
  double objective_primal = 0;
  double objective_dual = 0;
  double gap = 0;  // <X, S>
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  std::vector<IterStat> history;
};

struct SdpResiduals {
  double primal_infeas = 0;
  double dual_infeas = 0;
  double gap = 0;
};

namespace ipm {

// One cone block in canonical (all-equality) form. Diagonal blocks store
// vectors; dense blocks store full matrices.
struct ConeState {
  bool diag;
  MatrixXd Xm, Sm;
  VectorXd Xv, Sv;
};

struct Scaling {
  // PSD block: G, Ginv with Ghat' S Ghat = Ginv X Ginv' = diag(sigma).
  MatrixXd G, Ginv;
  VectorXd sigma;
  // Diagonal block: g with x = g^2 sigma, s = sigma / g^2.
  VectorXd gv;
};

}  // namespace ipm

inline SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {}) {
  problem.validate();
  const int m = problem.num_constraints();
  const int nfree = problem.num_free();

  // --- canonicalize: append a slack diagonal block for inequality rows
  std::vector<int> ineq_rows;
  for (int k = 0; k < m; ++k)
    if (problem.constraints[k].rel == Relation::Le) ineq_rows.push_back(k);
  const int nslack = static_cast<int>(ineq_rows.size());

  struct Blk {
    bool diag;
    int size;
  };
  std::vector<Blk> blks;
  for (int s : problem.psd_sizes) blks.push_back({false, s});
  for (int s : problem.diag_sizes) blks.push_back({true, s});
  if (nslack > 0) blks.push_back({true, nslack});
  const int nblk = static_cast<int>(blks.size());
  const int npsd = static_cast<int>(problem.psd_sizes.size());
  const int ndiag = static_cast<int>(problem.diag_sizes.size());

  // constraint coefficients in canonical block order
  const auto A_of = [&](int k, int blk) -> MatrixXd {
    // dense view; used only for PSD blocks
    return problem.constraints[k].A_psd[blk];
  };
  const auto Adiag_of = [&](int k, int blk) -> VectorXd {
    const int j = blk - npsd;
    if (j < ndiag) return problem.constraints[k].A_diag[j];
    VectorXd v = VectorXd::Zero(nslack);  // slack block
    for (int t = 0; t < nslack; ++t)
      if (ineq_rows[t] == k) v(t) = 1.0;
    return v;
  };
  const auto Cdiag_of = [&](int blk) -> VectorXd {
    const int j = blk - npsd;
    if (j < ndiag) return problem.C_diag[j];
    return VectorXd::Zero(nslack);
  };

  VectorXd b(m);
  for (int k = 0; k < m; ++k) b(k) = problem.constraints[k].b;

  // problem scale and starting point (identity-scaled blocks)
  double cmax = 0.0;
  for (const auto& C : problem.C_psd) if (C.size()) cmax = std::max(cmax, C.cwiseAbs().maxCoeff());
  for (const auto& C : problem.C_diag) if (C.size()) cmax = std::max(cmax, C.cwiseAbs().maxCoeff());
  if (nfree > 0) cmax = std::max(cmax, problem.c_free.cwiseAbs().maxCoeff());
  const double eta = std::max({1.0, m > 0 ? b.cwiseAbs().maxCoeff() : 0.0, cmax});

  std::vector<ipm::ConeState> Xs(nblk);
  int ntot = 0;
  for (int i = 0; i < nblk; ++i) {
    Xs[i].diag = blks[i].diag;
    ntot += blks[i].size;
    if (blks[i].diag) {
      Xs[i].Xv = VectorXd::Constant(blks[i].size, eta);
      Xs[i].Sv = VectorXd::Constant(blks[i].size, eta);
    } else {
      Xs[i].Xm = MatrixXd::Identity(blks[i].size, blks[i].size) * eta;
      Xs[i].Sm = MatrixXd::Identity(blks[i].size, blks[i].size) * eta;
    }
  }
  VectorXd y = VectorXd::Zero(m);
  VectorXd u = VectorXd::Zero(nfree);

  // dual start along b, scaled so the initial dual objective strictly
  // dominates the initial primal objective; the step safeguard below then
  // keeps the two ordered on every iterate
  {
    double ptrace = 0;
    for (int i = 0; i < npsd; ++i) ptrace += problem.C_psd[i].trace();
    for (int i = 0; i < ndiag; ++i) ptrace += problem.C_diag[i].sum();
    const double pobj0 = eta * ptrace;
    const double bb = b.squaredNorm();
    const double target = std::max(pobj0, 0.0) * (1 + 1e-3) + eta;
    if (bb > 0) y = (target / bb) * b;
  }

  // best iterate so far, by the worst of (relative gap, infeasibilities);
  // returned on MaxIter/NumericalFailure instead of a freshly broken point
  std::vector<ipm::ConeState> best_Xs = Xs;
  VectorXd best_y = y, best_u = u;
  double best_merit = std::numeric_limits<double>::infinity();

  SdpSolution sol;
  const auto finish = [&](SolveStatus status, int iters) {
    if (status != SolveStatus::Optimal) {
      Xs = best_Xs;
      y = best_y;
      u = best_u;
    }
    sol.status = status;
    sol.iterations = iters;
    sol.y = y;
    sol.u = u;
    sol.X_psd.clear();
    sol.S_psd.clear();
    sol.X_diag.clear();
    sol.S_diag.clear();
    for (int i = 0; i < nblk; ++i) {
      if (Xs[i].diag) {
        sol.X_diag.push_back(Xs[i].Xv);
        sol.S_diag.push_back(Xs[i].Sv);
      } else {
        sol.X_psd.push_back(Xs[i].Xm);
        sol.S_psd.push_back(Xs[i].Sm);
      }
    }
    double pobj = problem.c_free.dot(u);
    for (int i = 0; i < npsd; ++i) pobj += (problem.C_psd[i].array() * Xs[i].Xm.array()).sum();
    for (int i = 0; i < ndiag; ++i) pobj += problem.C_diag[i].dot(Xs[npsd + i].Xv);
    double gap = 0;
    for (int i = 0; i < nblk; ++i)
      gap += Xs[i].diag ? Xs[i].Xv.dot(Xs[i].Sv) : (Xs[i].Xm.array() * Xs[i].Sm.array()).sum();
    sol.objective_primal = pobj;
    sol.objective_dual = b.dot(y);
    sol.gap = gap;
    return sol;
  };

  // residual computation in canonical form
  const auto primal_residual = [&]() {
    VectorXd rp = b;
    for (int k = 0; k < m; ++k) {
      double lhs = problem.constraints[k].a_free.dot(u);
      for (int i = 0; i < npsd; ++i)
        lhs += (problem.constraints[k].A_psd[i].array() * Xs[i].Xm.array()).sum();
      for (int i = npsd; i < nblk; ++i) lhs += Adiag_of(k, i).dot(Xs[i].Xv);
      rp(k) -= lhs;
    }
    return rp;
  };
  // RD per block = sum_k y_k A_k - C - S  (want zero)
  const auto dual_residual = [&]() {
    std::vector<ipm::ConeState> rd(nblk);
    for (int i = 0; i < nblk; ++i) {
      rd[i].diag = blks[i].diag;
      if (blks[i].diag) {
        VectorXd v = -Cdiag_of(i) - Xs[i].Sv;
        for (int k = 0; k < m; ++k)
          if (y(k) != 0) v += y(k) * Adiag_of(k, i);
        rd[i].Xv = v;
      } else {
        MatrixXd M = -problem.C_psd[i] - Xs[i].Sm;
        for (int k = 0; k < m; ++k)
          if (y(k) != 0) M += y(k) * A_of(k, i);
        rd[i].Xm = M;
      }
    }
    return rd;
  };
  const auto free_residual = [&]() {
    VectorXd rf = problem.c_free;
    for (int k = 0; k < m; ++k) rf -= y(k) * problem.constraints[k].a_free;
    return rf;  // c - F'y, want zero
  };

  const double bnorm = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double cnorm = 1.0 + cmax;

  Eigen::MatrixXd K(m + nfree, m + nfree);
  Eigen::VectorXd rhs(m + nfree);

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    // --- diagnostics
    const VectorXd rp = primal_residual();
    const auto rd = dual_residual();
    const VectorXd rf = free_residual();
    double pinf = m > 0 ? rp.cwiseAbs().maxCoeff() / bnorm : 0.0;
    double dinf = nfree > 0 ? rf.cwiseAbs().maxCoeff() / cnorm : 0.0;
    for (int i = 0; i < nblk; ++i) {
      const double r = blks[i].diag ? (rd[i].Xv.size() ? rd[i].Xv.cwiseAbs().maxCoeff() : 0.0)
                                    : rd[i].Xm.cwiseAbs().maxCoeff();
      dinf = std::max(dinf, r / cnorm);
    }
    double gap = 0;
    for (int i = 0; i < nblk; ++i)
      gap += Xs[i].diag ? Xs[i].Xv.dot(Xs[i].Sv) : (Xs[i].Xm.array() * Xs[i].Sm.array()).sum();
    const double mu_bar = gap / ntot;

    double pobj = problem.c_free.dot(u);
    for (int i = 0; i < npsd; ++i) pobj += (problem.C_psd[i].array() * Xs[i].Xm.array()).sum();
    for (int i = 0; i < ndiag; ++i) pobj += problem.C_diag[i].dot(Xs[npsd + i].Xv);
    const double dobj = b.dot(y);
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));

    IterStat st;
    st.iter = iter;
    st.pobj = pobj;
    st.dobj = dobj;
    st.mu = mu_bar;
    st.primal_infeas = pinf;
    st.dual_infeas = dinf;
    sol.history.push_back(st);
    if (opts.log)
      (*opts.log) << "iter " << iter << "  pobj " << pobj << "  dobj " << dobj << "  gap "
                  << gap << "  pinf " << pinf << "  dinf " << dinf << '\n';

    const double merit = std::max({relgap, pinf, dinf});
    if (merit < best_merit) {
      best_merit = merit;
      best_Xs = Xs;
      best_y = y;
      best_u = u;
    }

    if (relgap <= opts.tol_gap && pinf <= opts.tol_feas && dinf <= opts.tol_feas)
      return finish(SolveStatus::Optimal, iter);

    // --- Nesterov-Todd scaling per block
    std::vector<ipm::Scaling> sc(nblk);
    bool scaling_ok = true;
    for (int i = 0; i < nblk && scaling_ok; ++i) {
      if (blks[i].diag) {
        if ((Xs[i].Xv.array() <= 0).any() || (Xs[i].Sv.array() <= 0).any()) {
          scaling_ok = false;
          break;
        }
        sc[i].gv = (Xs[i].Xv.array() / Xs[i].Sv.array()).pow(0.25);
        sc[i].sigma = (Xs[i].Xv.array() * Xs[i].Sv.array()).sqrt();
      } else {
        Eigen::LLT<MatrixXd> llt(Xs[i].Xm);
        if (llt.info() != Eigen::Success) {
          scaling_ok = false;
          break;
        }
        const MatrixXd Lx = llt.matrixL();
        MatrixXd Msc = Lx.transpose() * Xs[i].Sm * Lx;
        Msc = 0.5 * (Msc + Msc.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Msc);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0) {
          scaling_ok = false;
          break;
        }
        const VectorXd d4 = es.eigenvalues().array().pow(0.25);
        sc[i].G = Lx * es.eigenvectors() * d4.cwiseInverse().asDiagonal();
        sc[i].Ginv = d4.asDiagonal() * es.eigenvectors().transpose() *
                     Lx.triangularView<Eigen::Lower>().solve(
                         MatrixXd::Identity(blks[i].size, blks[i].size));
        sc[i].sigma = es.eigenvalues().array().sqrt();
      }
    }
    if (!scaling_ok) return finish(SolveStatus::NumericalFailure, iter);

    // --- scaled constraint matrices and Schur complement
    // Ahat[k][i]: PSD blocks G' A G; diagonal blocks g^2 .* a
    std::vector<std::vector<MatrixXd>> Ahat_m(m, std::vector<MatrixXd>(npsd));
    std::vector<std::vector<VectorXd>> Ahat_d(m);
    for (int k = 0; k < m; ++k) {
      for (int i = 0; i < npsd; ++i) {
        MatrixXd t = sc[i].G.transpose() * A_of(k, i) * sc[i].G;
        Ahat_m[k][i] = 0.5 * (t + t.transpose());
      }
      Ahat_d[k].resize(nblk - npsd);
      for (int i = npsd; i < nblk; ++i)
        Ahat_d[k][i - npsd] = sc[i].gv.array().square() * Adiag_of(k, i).array();
    }
    std::vector<ipm::ConeState> RDhat(nblk);
    for (int i = 0; i < nblk; ++i) {
      RDhat[i].diag = blks[i].diag;
      if (blks[i].diag)
        RDhat[i].Xv = sc[i].gv.array().square() * rd[i].Xv.array();
      else {
        MatrixXd t = sc[i].G.transpose() * rd[i].Xm * sc[i].G;
        RDhat[i].Xm = 0.5 * (t + t.transpose());
      }
    }

    K.setZero();
    for (int k = 0; k < m; ++k) {
      for (int l = k; l < m; ++l) {
        double v = 0;
        for (int i = 0; i < npsd; ++i)
          v += (Ahat_m[k][i].array() * Ahat_m[l][i].array()).sum();
        for (int i = 0; i < nblk - npsd; ++i) v += Ahat_d[k][i].dot(Ahat_d[l][i]);
        K(k, l) = v;
        K(l, k) = v;
      }
      K.block(k, m, 1, nfree) = -problem.constraints[k].a_free.transpose();
      K.block(m, k, nfree, 1) = problem.constraints[k].a_free;
    }
    Eigen::FullPivLU<MatrixXd> klu(K);
    // singular saddle systems surface as NaNs in the solve below

    // Newton solve for a given complementarity target Rc (scaled space):
    //   deltaShat = sum dy_l Ahat_l + RDhat
    //   deltaXhat = Linv(Rc) - deltaShat
    // with the saddle system  M dy - F du = h,  F' dy = rf.
    std::vector<ipm::ConeState> Rc(nblk), dXh(nblk), dSh(nblk);
    VectorXd dy(m), du(nfree);
    const auto newton = [&]() {
      for (int k = 0; k < m; ++k) {
        double h = -rp(k);
        for (int i = 0; i < npsd; ++i) {
          // Linv(Rc) on PSD block i
          const auto& s = sc[i].sigma;
          const MatrixXd& R = Rc[i].Xm;
          double acc = 0;
          for (int r = 0; r < R.rows(); ++r)
            for (int c = 0; c < R.cols(); ++c)
              acc += Ahat_m[k][i](r, c) * (2.0 * R(r, c) / (s(r) + s(c)) - RDhat[i].Xm(r, c));
          h += acc;
        }
        for (int i = npsd; i < nblk; ++i) {
          const auto& s = sc[i].sigma;
          h += Ahat_d[k][i - npsd].dot(
              (Rc[i].Xv.array() / s.array() - RDhat[i].Xv.array()).matrix());
        }
        rhs(k) = h;
      }
      rhs.tail(nfree) = rf;
      const VectorXd sol_kkt = klu.solve(rhs);
      if (!sol_kkt.allFinite()) return false;
      dy = sol_kkt.head(m);
      du = sol_kkt.tail(nfree);
      for (int i = 0; i < nblk; ++i) {
        dSh[i].diag = dXh[i].diag = blks[i].diag;
        if (blks[i].diag) {
          VectorXd s = RDhat[i].Xv;
          for (int k = 0; k < m; ++k) s += dy(k) * Ahat_d[k][i - npsd];
          dSh[i].Xv = s;
          dXh[i].Xv = (Rc[i].Xv.array() / sc[i].sigma.array()).matrix() - s;
        } else {
          MatrixXd s = RDhat[i].Xm;
          for (int k = 0; k < m; ++k) s += dy(k) * Ahat_m[k][i];
          dSh[i].Xm = s;
          const auto& sg = sc[i].sigma;
          MatrixXd lx(s.rows(), s.cols());
          for (int r = 0; r < s.rows(); ++r)
            for (int c = 0; c < s.cols(); ++c)
              lx(r, c) = 2.0 * Rc[i].Xm(r, c) / (sg(r) + sg(c));
          dXh[i].Xm = lx - s;
        }
      }
      return true;
    };

    // step to the cone boundary in scaled space (Xhat = Shat = diag(sigma))
    const auto max_step = [&](const std::vector<ipm::ConeState>& d) {
      double alpha = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nblk; ++i) {
        const auto& s = sc[i].sigma;
        if (blks[i].diag) {
          const VectorXd& dv = d[i].Xv;
          for (int t = 0; t < dv.size(); ++t)
            if (dv(t) < 0) alpha = std::min(alpha, -s(t) / dv(t));
        } else {
          const MatrixXd& dm = d[i].Xm;
          MatrixXd scaled(dm.rows(), dm.cols());
          const VectorXd isq = s.cwiseSqrt().cwiseInverse();
          scaled = isq.asDiagonal() * dm * isq.asDiagonal();
          scaled = 0.5 * (scaled + scaled.transpose());
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
          const double lmin = es.eigenvalues().minCoeff();
          if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
        }
      }
      return alpha;
    };

    // --- predictor (affine scaling direction)
    for (int i = 0; i < nblk; ++i) {
      Rc[i].diag = blks[i].diag;
      if (blks[i].diag)
        Rc[i].Xv = -sc[i].sigma.array().square();
      else
        Rc[i].Xm = (-sc[i].sigma.array().square()).matrix().asDiagonal();
    }
    if (!newton()) return finish(SolveStatus::NumericalFailure, iter);
    const double ap_aff = std::min(1.0, 0.98 * max_step(dXh));
    const double ad_aff = std::min(1.0, 0.98 * max_step(dSh));

    double gap_aff = 0;
    for (int i = 0; i < nblk; ++i) {
      const auto& s = sc[i].sigma;
      if (blks[i].diag)
        gap_aff += ((s + ap_aff * dXh[i].Xv).array() * (s + ad_aff * dSh[i].Xv).array()).sum();
      else {
        MatrixXd xa = MatrixXd(s.asDiagonal()) + ap_aff * dXh[i].Xm;
        MatrixXd sa = MatrixXd(s.asDiagonal()) + ad_aff * dSh[i].Xm;
        gap_aff += (xa.array() * sa.array()).sum();
      }
    }
    double sigma_c = std::pow(std::max(0.0, gap_aff / gap), 3.0);
    sigma_c = std::min(1.0, std::max(sigma_c, 1e-8));

    // --- corrector (Mehrotra): Rc = sigma mu I - Sigma^2 - H(dXhat dShat)
    const std::vector<ipm::ConeState> dXa = dXh, dSa = dSh;
    for (int i = 0; i < nblk; ++i) {
      if (blks[i].diag) {
        Rc[i].Xv = VectorXd::Constant(blks[i].size, sigma_c * mu_bar) -
                   sc[i].sigma.array().square().matrix() -
                   (dXa[i].Xv.array() * dSa[i].Xv.array()).matrix();
      } else {
        MatrixXd cross = dXa[i].Xm * dSa[i].Xm;
        cross = 0.5 * (cross + cross.transpose());
        Rc[i].Xm = MatrixXd((sigma_c * mu_bar - sc[i].sigma.array().square()).matrix().asDiagonal()) -
                   cross;
      }
    }
    if (!newton()) return finish(SolveStatus::NumericalFailure, iter);
    double alpha_p = std::min(1.0, 0.98 * max_step(dXh));
    double alpha_d = std::min(1.0, 0.98 * max_step(dSh));

    // unscaled step
    std::vector<MatrixXd> dXm(nblk), dSm(nblk);
    std::vector<VectorXd> dXv(nblk), dSv(nblk);
    for (int i = 0; i < nblk; ++i) {
      if (blks[i].diag) {
        dXv[i] = (sc[i].gv.array().square() * dXh[i].Xv.array()).matrix();
        dSv[i] = (dSh[i].Xv.array() / sc[i].gv.array().square()).matrix();
      } else {
        MatrixXd dX = sc[i].G * dXh[i].Xm * sc[i].G.transpose();
        MatrixXd dS = sc[i].Ginv.transpose() * dSh[i].Xm * sc[i].Ginv;
        dXm[i] = 0.5 * (dX + dX.transpose());
        dSm[i] = 0.5 * (dS + dS.transpose());
      }
    }

    // weak-duality safeguard: the reported objectives start ordered
    // (dual >= primal for this maximization) and both move affinely in the
    // step lengths, so a clip keeps them ordered on every iterate
    {
      double dpobj = problem.c_free.dot(du) * alpha_p;
      for (int i = 0; i < npsd; ++i)
        dpobj += alpha_p * (problem.C_psd[i].array() * dXm[i].array()).sum();
      for (int i = 0; i < ndiag; ++i) dpobj += alpha_p * problem.C_diag[i].dot(dXv[npsd + i]);
      const double ddobj = alpha_d * b.dot(dy);
      const double g0 = dobj - pobj;
      // retain a fraction of the ordering margin (it stays positive
      // inductively; both objectives are exactly affine in the steps) and
      // shrink only the side pushing the ordering, so the other side keeps
      // moving and the search direction changes next iteration
      const double margin = 0.99 * g0;
      if (g0 > 0 && ddobj - dpobj < -margin) {
        if (dpobj > 0 && ddobj >= 0)
          alpha_p *= (ddobj + margin) / dpobj;
        else if (ddobj < 0 && dpobj <= 0)
          alpha_d *= (margin - dpobj) / (-ddobj);
        else {
          const double s = margin / (dpobj - ddobj);
          alpha_p *= s;
          alpha_d *= s;
        }
      }
    }
    sol.history.back().alpha_p = alpha_p;
    sol.history.back().alpha_d = alpha_d;
    sol.history.back().sigma = sigma_c;

    // --- update
    for (int i = 0; i < nblk; ++i) {
      if (blks[i].diag) {
        Xs[i].Xv += alpha_p * dXv[i];
        Xs[i].Sv += alpha_d * dSv[i];
      } else {
        Xs[i].Xm += alpha_p * dXm[i];
        Xs[i].Sm += alpha_d * dSm[i];
      }
    }
    y += alpha_d * dy;
    u += alpha_p * du;
  }
  return finish(SolveStatus::MaxIter, iter);
}

// Residuals of a (problem, solution) pair against the original relations.
inline SdpResiduals residuals(const SdpProblem& problem, const SdpSolution& sol) {
  const int m = problem.num_constraints();
  const int npsd = static_cast<int>(problem.psd_sizes.size());
  const int ndiag = static_cast<int>(problem.diag_sizes.size());
  if (static_cast<int>(sol.X_psd.size()) != npsd ||
      static_cast<int>(sol.X_diag.size()) < ndiag || sol.y.size() != m)
    throw InputError("residuals: dimension mismatch");
  std::vector<int> ineq_rows;
  for (int k = 0; k < m; ++k)
    if (problem.constraints[k].rel == Relation::Le) ineq_rows.push_back(k);
  const bool has_slack = static_cast<int>(sol.X_diag.size()) == ndiag + 1;

  SdpResiduals r;
  for (int k = 0; k < m; ++k) {
    const auto& con = problem.constraints[k];
    double lhs = con.a_free.dot(sol.u);
    for (int i = 0; i < npsd; ++i) lhs += (con.A_psd[i].array() * sol.X_psd[i].array()).sum();
    for (int i = 0; i < ndiag; ++i) lhs += con.A_diag[i].dot(sol.X_diag[i]);
    const double viol = con.rel == Relation::Eq ? std::abs(lhs - con.b)
                                                : std::max(0.0, lhs - con.b);
    r.primal_infeas = std::max(r.primal_infeas, viol);
  }
  // dual: sum y_k A_k - C - S per block, plus free-variable stationarity
  for (int i = 0; i < npsd; ++i) {
    MatrixXd M = -problem.C_psd[i] - sol.S_psd[i];
    for (int k = 0; k < m; ++k) M += sol.y(k) * problem.constraints[k].A_psd[i];
    r.dual_infeas = std::max(r.dual_infeas, M.cwiseAbs().maxCoeff());
  }
  for (int i = 0; i < ndiag; ++i) {
    VectorXd v = -problem.C_diag[i] - sol.S_diag[i];
    for (int k = 0; k < m; ++k) v += sol.y(k) * problem.constraints[k].A_diag[i];
    if (v.size()) r.dual_infeas = std::max(r.dual_infeas, v.cwiseAbs().maxCoeff());
  }
  if (has_slack) {
    // slack block dual is y_k itself
    const auto& sv = sol.S_diag.back();
    for (std::size_t t = 0; t < ineq_rows.size(); ++t)
      r.dual_infeas = std::max(r.dual_infeas, std::abs(sv(static_cast<int>(t)) -
                                                       sol.y(ineq_rows[t])));
  }
  VectorXd rf = problem.c_free;
  for (int k = 0; k < m; ++k) rf -= sol.y(k) * problem.constraints[k].a_free;
  if (rf.size()) r.dual_infeas = std::max(r.dual_infeas, rf.cwiseAbs().maxCoeff());

  double gap = 0;
  for (int i = 0; i < npsd; ++i) gap += (sol.X_psd[i].array() * sol.S_psd[i].array()).sum();
  for (std::size_t i = 0; i < sol.X_diag.size(); ++i) gap += sol.X_diag[i].dot(sol.S_diag[i]);
  r.gap = gap;
  return r;
}

}  // namespace pepls
