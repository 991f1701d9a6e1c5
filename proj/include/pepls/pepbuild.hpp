#pragma once

// Compiles a performance-estimation instance into a block-diagonal SDP over
// the Gram matrix of (x_0..x_N, g_0..g_N) plus free function values, after
// the normalization x_* = 0, g_* = 0, f_* = 0. Maps solved duals back to the
// named multipliers of the one-iteration proof.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "pepls/errors.hpp"
#include "pepls/fclass.hpp"
#include "pepls/quadsim.hpp"
#include "pepls/sdp.hpp"

namespace pepls {

enum class Variant { ExactLSRelaxed, FixedStep, Noisy };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::ExactLSRelaxed: return "exact-ls";
    case Variant::FixedStep: return "fixed-step";
    case Variant::Noisy: return "noisy";
  }
  return "?";
}

enum class InitKind { FunctionGap, DistanceSq };

inline const char* to_string(InitKind k) {
  return k == InitKind::FunctionGap ? "fgap" : "dist2";
}

struct PepSpec {
  ClassParams params;
  int N = 1;
  double R = 1.0;
  Variant variant = Variant::ExactLSRelaxed;
  double eps = 0.0;  // Noisy only
  InitKind init = InitKind::FunctionGap;

  void validate() const {
    if (N < 1) throw InputError("PepSpec: N must be >= 1");
    if (N > 10) throw InputError("PepSpec: N capped at 10 (Gram growth is quadratic)");
    if (!(R > 0)) throw InputError("PepSpec: R must be positive");
    if (variant == Variant::Noisy && (eps < 0 || eps >= 1))
      throw InputError("PepSpec: noisy variant needs eps in [0, 1)");
  }
};

// Fixed basis order: x_0..x_N then g_0..g_N; with x-elimination (fixed-step
// compilation) the basis is x_0, g_0..g_N and later x_i are affine in it.
struct GramIndex {
  int N = 1;
  bool x_eliminated = false;
  double gamma = 0.0;  // elimination step length

  int dim() const { return x_eliminated ? N + 2 : 2 * (N + 1); }
  int g(int i) const { return x_eliminated ? 1 + i : (N + 1) + i; }

  // x_i as a combination over the basis
  VectorXd x_comb(int i) const {
    VectorXd v = VectorXd::Zero(dim());
    if (!x_eliminated) {
      v(i) = 1.0;
      return v;
    }
    v(0) = 1.0;
    for (int t = 0; t < i; ++t) v(g(t)) -= gamma;
    return v;
  }
  VectorXd g_comb(int i) const {
    VectorXd v = VectorXd::Zero(dim());
    v(g(i)) = 1.0;
    return v;
  }
  VectorXd zero_comb() const { return VectorXd::Zero(dim()); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    if (x_eliminated)
      out.push_back("x0");
    else
      for (int i = 0; i <= N; ++i) out.push_back("x" + std::to_string(i));
    for (int i = 0; i <= N; ++i) out.push_back("g" + std::to_string(i));
    return out;
  }
};

struct ConstraintTag {
  enum class Kind {
    Interpolation,       // ordered pair (i, j); -1 stands for '*'
    LineSearchOrtho,     // <g_{i+1}, x_i - x_{i+1}> = 0
    SuccessiveGradOrtho, // -<g_i, g_{i+1}> = 0
    InitialCondition,
    NoisyLmi,            // step i, entry j in {0: (1,1), 1: (1,2), 2: (2,2)}
    FixedStepLink        // step i, basis column j (explicit mode only)
  };
  Kind kind;
  int i = 0;
  int j = 0;

  friend bool operator<(const ConstraintTag& a, const ConstraintTag& b) {
    return std::tie(a.kind, a.i, a.j) < std::tie(b.kind, b.i, b.j);
  }
  friend bool operator==(const ConstraintTag& a, const ConstraintTag& b) {
    return a.kind == b.kind && a.i == b.i && a.j == b.j;
  }

  std::string str() const {
    const auto pt = [](int v) { return v < 0 ? std::string("*") : std::to_string(v); };
    switch (kind) {
      case Kind::Interpolation: return "interp(" + pt(i) + "," + pt(j) + ")";
      case Kind::LineSearchOrtho: return "line-search(" + std::to_string(i) + ")";
      case Kind::SuccessiveGradOrtho: return "grad-ortho(" + std::to_string(i) + ")";
      case Kind::InitialCondition: return "initial";
      case Kind::NoisyLmi: {
        static const char* e[3] = {"11", "12", "22"};
        return "lmi(" + std::to_string(i) + ")[" + e[j] + "]";
      }
      case Kind::FixedStepLink:
        return "step-link(" + std::to_string(i) + ")[" + std::to_string(j) + "]";
    }
    return "?";
  }
};

struct CompiledPep {
  PepSpec spec;
  GramIndex gram;
  SdpProblem problem;
  std::vector<ConstraintTag> tags;  // one per constraint, same order

  explicit CompiledPep(const PepSpec& s) : spec(s) {}
};

namespace pepdetail {

// rank-one symmetrized outer product u v' contributing <u, v> on the Gram
inline MatrixXd sym_outer(const VectorXd& u, const VectorXd& v) {
  return 0.5 * (u * v.transpose() + v * u.transpose());
}

}  // namespace pepdetail

struct BuildOptions {
  // Fixed-step only: keep x_1..x_N in the basis and add explicit linking
  // equalities instead of eliminating them.
  bool explicit_fixed_step_links = false;
};

inline CompiledPep build(const PepSpec& spec, const BuildOptions& bopts = {}) {
  spec.validate();
  const int N = spec.N;
  const double mu = spec.params.mu, L = spec.params.L;
  const double kappa = mu / L;
  const double cq = 1.0 / (2.0 * (1.0 - kappa));

  CompiledPep out(spec);
  out.gram.N = N;
  out.gram.x_eliminated =
      spec.variant == Variant::FixedStep && !bopts.explicit_fixed_step_links;
  out.gram.gamma = 2.0 / (mu + L);
  const GramIndex& gi = out.gram;
  const int d = gi.dim();

  std::vector<int> psd{d};
  const int nlmi = spec.variant == Variant::Noisy ? N : 0;
  for (int i = 0; i < nlmi; ++i) psd.push_back(2);  // one 2x2 block per step
  out.problem = SdpProblem::with_blocks(psd, {}, N + 1);
  out.problem.c_free(N) = 1.0;  // maximize f_N (f_* = 0)

  const auto x_of = [&](int i) { return i < 0 ? gi.zero_comb() : gi.x_comb(i); };
  const auto g_of = [&](int i) { return i < 0 ? gi.zero_comb() : gi.g_comb(i); };

  const auto push = [&](SdpConstraint con, ConstraintTag tag) {
    con.name = tag.str();
    out.problem.constraints.push_back(std::move(con));
    out.tags.push_back(tag);
  };

  // interpolation inequalities over ordered pairs of {*, 0, ..., N},
  // compiled as the negated (<=) form so duals equal the proof weights
  for (int i = -1; i <= N; ++i) {
    for (int j = -1; j <= N; ++j) {
      if (i == j) continue;
      auto con = out.problem.blank_constraint();
      const VectorXd xi = x_of(i), xj = x_of(j), gvi = g_of(i), gvj = g_of(j);
      MatrixXd Q = -pepdetail::sym_outer(gvj, xi - xj);
      Q -= cq * ((1.0 / L) * pepdetail::sym_outer(gvi - gvj, gvi - gvj) +
                 mu * pepdetail::sym_outer(xi - xj, xi - xj) -
                 (2.0 * kappa) * pepdetail::sym_outer(gvj - gvi, xj - xi));
      con.A_psd[0] = -Q;
      if (i >= 0) con.a_free(i) -= 1.0;
      if (j >= 0) con.a_free(j) += 1.0;
      con.b = 0.0;
      con.rel = Relation::Le;
      push(std::move(con), {ConstraintTag::Kind::Interpolation, i, j});
    }
  }

  // method constraints, oriented as in the estimation SDP
  // (g_{i+1}'(x_{i+1}-x_i) = 0, g_{i+1}'g_i = 0); with this orientation the
  // signed equality duals equal the proof multipliers
  if (spec.variant == Variant::ExactLSRelaxed || spec.variant == Variant::Noisy) {
    for (int i = 0; i < N; ++i) {
      auto con = out.problem.blank_constraint();
      con.A_psd[0] = pepdetail::sym_outer(g_of(i + 1), x_of(i + 1) - x_of(i));
      con.rel = Relation::Eq;
      push(std::move(con), {ConstraintTag::Kind::LineSearchOrtho, i, 0});
    }
  }
  if (spec.variant == Variant::ExactLSRelaxed) {
    for (int i = 0; i < N; ++i) {
      auto con = out.problem.blank_constraint();
      con.A_psd[0] = pepdetail::sym_outer(g_of(i), g_of(i + 1));
      con.rel = Relation::Eq;
      push(std::move(con), {ConstraintTag::Kind::SuccessiveGradOrtho, i, 0});
    }
  }
  if (spec.variant == Variant::Noisy) {
    // per step: tie the 2x2 block T to [eps|g_i|^2, g_i'g_{i+1}; ., eps|g_{i+1}|^2]
    for (int i = 0; i < N; ++i) {
      const int tb = 1 + i;  // PSD block index of T_i
      for (int e = 0; e < 3; ++e) {
        auto con = out.problem.blank_constraint();
        if (e == 0)
          con.A_psd[0] = spec.eps * pepdetail::sym_outer(g_of(i), g_of(i));
        else if (e == 1)
          con.A_psd[0] = pepdetail::sym_outer(g_of(i), g_of(i + 1));
        else
          con.A_psd[0] = spec.eps * pepdetail::sym_outer(g_of(i + 1), g_of(i + 1));
        MatrixXd E = MatrixXd::Zero(2, 2);
        if (e == 0) E(0, 0) = -1.0;
        if (e == 2) E(1, 1) = -1.0;
        if (e == 1) E(0, 1) = E(1, 0) = -0.5;
        con.A_psd[tb] = E;
        con.rel = Relation::Eq;
        push(std::move(con), {ConstraintTag::Kind::NoisyLmi, i, e});
      }
    }
  }
  if (spec.variant == Variant::FixedStep && bopts.explicit_fixed_step_links) {
    // <x_{i+1} - x_i + gamma g_i, e_b> = 0 for every basis column b
    for (int i = 0; i < N; ++i) {
      const VectorXd v = gi.x_comb(i + 1) - gi.x_comb(i) + gi.gamma * gi.g_comb(i);
      for (int bcol = 0; bcol < d; ++bcol) {
        auto con = out.problem.blank_constraint();
        VectorXd e = VectorXd::Zero(d);
        e(bcol) = 1.0;
        con.A_psd[0] = pepdetail::sym_outer(v, e);
        con.rel = Relation::Eq;
        push(std::move(con), {ConstraintTag::Kind::FixedStepLink, i, bcol});
      }
    }
  }

  // initial condition
  {
    auto con = out.problem.blank_constraint();
    if (spec.init == InitKind::FunctionGap)
      con.a_free(0) = 1.0;
    else
      con.A_psd[0] = pepdetail::sym_outer(x_of(0), x_of(0));
    con.b = spec.R;
    con.rel = Relation::Le;
    push(std::move(con), {ConstraintTag::Kind::InitialCondition, 0, 0});
  }

  return out;
}

// Signed dual values keyed by tag; named one-iteration multipliers when the
// instance resolves them (N = 1).
struct MultiplierMap {
  std::map<ConstraintTag, double> by_tag;
  std::optional<std::array<double, 5>> named;  // y1..y5 (exact line search)
  std::optional<Eigen::Matrix2d> lmi_multiplier;  // noisy matrix multiplier

  double at(const ConstraintTag& t) const {
    auto it = by_tag.find(t);
    if (it == by_tag.end()) throw InputError("no dual for tag " + t.str());
    return it->second;
  }
};

inline MultiplierMap extract_multipliers(const CompiledPep& pep, const SdpSolution& sol,
                                         double gap_tol = 1e-6) {
  if (sol.status != SolveStatus::Optimal)
    throw StateError("extract_multipliers: solution is not optimal");
  const double scale = 1.0 + std::abs(sol.objective_primal) + std::abs(sol.objective_dual);
  if (sol.gap > gap_tol * scale)
    throw StateError("extract_multipliers: duality gap too large");
  MultiplierMap mm;
  for (std::size_t k = 0; k < pep.tags.size(); ++k)
    mm.by_tag[pep.tags[k]] = sol.y(static_cast<int>(k));
  if (pep.spec.N == 1) {
    using K = ConstraintTag::Kind;
    std::array<double, 5> y{};
    y[0] = mm.at({K::Interpolation, 0, 1});
    y[1] = mm.at({K::Interpolation, -1, 0});
    y[2] = mm.at({K::Interpolation, -1, 1});
    if (pep.spec.variant == Variant::ExactLSRelaxed) {
      y[3] = mm.at({K::SuccessiveGradOrtho, 0, 0});
      y[4] = mm.at({K::LineSearchOrtho, 0, 0});
      mm.named = y;
    } else if (pep.spec.variant == Variant::Noisy) {
      y[3] = mm.at({K::LineSearchOrtho, 0, 0});  // the noisy system's fourth weight
      y[4] = 0.0;
      mm.named = y;
    }
  }
  if (pep.spec.variant == Variant::Noisy && !sol.S_psd.empty()) {
    // the dual slack of the first 2x2 block is the matrix multiplier
    if (sol.S_psd.size() >= 2) mm.lmi_multiplier = Eigen::Matrix2d(sol.S_psd[1]);
  }
  return mm;
}

// Factorizes the Gram block into explicit vectors (rank-truncated) and
// returns labeled data including the minimizer; the result satisfies the
// interpolation conditions whenever the solution was feasible.
inline std::vector<LabeledPoint> reconstruct_worst_case(const CompiledPep& pep,
                                                        const SdpSolution& sol) {
  const MatrixXd& P = sol.X_psd.at(0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P);
  const VectorXd ev = es.eigenvalues();
  const double lmax = std::max(0.0, ev.maxCoeff());
  if (ev.minCoeff() < -1e-9 * std::max(1.0, lmax))
    throw NumericalError("reconstruct_worst_case: Gram block is indefinite");
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-9 * lmax) keep.push_back(i);
  const int rank = static_cast<int>(keep.size());
  // rows of V: one realization vector per basis label
  MatrixXd V = MatrixXd::Zero(P.rows(), std::max(rank, 1));
  for (int t = 0; t < rank; ++t)
    V.col(t) = es.eigenvectors().col(keep[t]) * std::sqrt(ev(keep[t]));

  const auto vec_of = [&](const VectorXd& comb) { return VectorXd(V.transpose() * comb); };

  std::vector<LabeledPoint> pts;
  LabeledPoint star;
  star.label = "*";
  star.x.assign(V.cols(), 0.0);
  star.g.assign(V.cols(), 0.0);
  star.f = 0.0;
  pts.push_back(std::move(star));
  for (int i = 0; i <= pep.spec.N; ++i) {
    LabeledPoint p;
    p.label = std::to_string(i);
    const VectorXd x = vec_of(pep.gram.x_comb(i));
    const VectorXd g = vec_of(pep.gram.g_comb(i));
    p.x.assign(x.data(), x.data() + x.size());
    p.g.assign(g.data(), g.data() + g.size());
    p.f = sol.u(i);
    pts.push_back(std::move(p));
  }
  return pts;
}

// --- feasibility bridge from simulated trajectories ---

struct PepAssignment {
  MatrixXd gram;                 // over the compiled basis
  std::vector<MatrixXd> lmi;     // T blocks (noisy only)
  VectorXd fvals;                // f_0..f_N
};

// Gram/f assignment induced by a trajectory. The trajectory must have
// exactly N steps.
inline PepAssignment induced_assignment(const CompiledPep& pep, const DiagQuadratic& q,
                                        const Trajectory& traj) {
  const int N = pep.spec.N;
  if (static_cast<int>(traj.num_steps()) != N)
    throw InputError("induced_assignment: trajectory length mismatch");
  const int n = q.dim();
  const int d = pep.gram.dim();
  MatrixXd Vecs(n, d);
  if (pep.gram.x_eliminated) {
    Vecs.col(0) = traj.iterates[0];
    for (int i = 0; i <= N; ++i) Vecs.col(pep.gram.g(i)) = q.gradient(traj.iterates[i]);
  } else {
    for (int i = 0; i <= N; ++i) {
      Vecs.col(i) = traj.iterates[i];
      Vecs.col(pep.gram.g(i)) = q.gradient(traj.iterates[i]);
    }
  }
  PepAssignment a;
  a.gram = Vecs.transpose() * Vecs;
  a.fvals = VectorXd::Zero(N + 1);
  for (int i = 0; i <= N; ++i) a.fvals(i) = traj.values[i];
  if (pep.spec.variant == Variant::Noisy) {
    for (int i = 0; i < N; ++i) {
      const VectorXd gi = q.gradient(traj.iterates[i]);
      const VectorXd gj = q.gradient(traj.iterates[i + 1]);
      MatrixXd T(2, 2);
      T << pep.spec.eps * gi.squaredNorm(), gi.dot(gj), gi.dot(gj),
          pep.spec.eps * gj.squaredNorm();
      a.lmi.push_back(T);
    }
  }
  return a;
}

// Largest violation of the compiled constraints at the assignment
// (equalities by |.|, inequalities by positive part); the objective row
// check is up to the caller.
inline double feasibility_violation(const CompiledPep& pep, const PepAssignment& a) {
  double worst = 0.0;
  for (std::size_t k = 0; k < pep.problem.constraints.size(); ++k) {
    const auto& con = pep.problem.constraints[k];
    double lhs = con.a_free.dot(a.fvals);
    lhs += (con.A_psd[0].array() * a.gram.array()).sum();
    for (std::size_t t = 1; t < con.A_psd.size(); ++t)
      lhs += (con.A_psd[t].array() * a.lmi[t - 1].array()).sum();
    const double viol =
        con.rel == Relation::Eq ? std::abs(lhs - con.b) : std::max(0.0, lhs - con.b);
    worst = std::max(worst, viol);
  }
  // cone feasibility of the LMI blocks
  for (const auto& T : a.lmi) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()));
  }
  return worst;
}

inline double objective_value(const CompiledPep& pep, const PepAssignment& a) {
  return a.fvals(pep.spec.N);
}

}  // namespace pepls
