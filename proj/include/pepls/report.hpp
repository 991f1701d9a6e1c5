#pragma once

// Machine- and human-readable run reports. Every numeric section carries the
// tolerance it was produced with; JSON reports round-trip exactly.

#include <json.hpp>

#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pepls/certify.hpp"
#include "pepls/pepbuild.hpp"
#include "pepls/quadsim.hpp"
#include "pepls/sdp.hpp"

namespace pepls {

using nlohmann::json;

struct DualRow {
  std::string tag;
  double value = 0;
  std::optional<double> closed_form;
  std::optional<double> abs_diff;
};

struct SolverDiagnostics {
  std::string status;
  int iterations = 0;
  double gap = 0;
  double primal_infeas = 0;
  double dual_infeas = 0;
};

struct Report {
  json inputs = json::object();      // echo of the run configuration
  json tolerances = json::object();  // every tolerance in effect
  std::optional<double> sdp_optimum;
  std::optional<double> analytic_bound;
  std::optional<double> bound_gap;  // optimum minus analytic bound
  std::vector<DualRow> duals;
  std::map<std::string, std::string> certificates;  // check name -> verdict
  json simulation = json::object();
  std::optional<SolverDiagnostics> solver;

  json to_json() const {
    json j;
    j["inputs"] = inputs;
    j["tolerances"] = tolerances;
    if (sdp_optimum) j["sdp_optimum"] = *sdp_optimum;
    if (analytic_bound) j["analytic_bound"] = *analytic_bound;
    if (bound_gap) j["bound_gap"] = *bound_gap;
    if (!duals.empty()) {
      json rows = json::array();
      for (const auto& r : duals) {
        json row;
        row["tag"] = r.tag;
        row["value"] = r.value;
        if (r.closed_form) row["closed_form"] = *r.closed_form;
        if (r.abs_diff) row["abs_diff"] = *r.abs_diff;
        rows.push_back(row);
      }
      j["duals"] = rows;
    }
    if (!certificates.empty()) j["certificates"] = certificates;
    if (!simulation.empty()) j["simulation"] = simulation;
    if (solver) {
      j["solver"] = {{"status", solver->status},
                     {"iterations", solver->iterations},
                     {"gap", solver->gap},
                     {"primal_infeas", solver->primal_infeas},
                     {"dual_infeas", solver->dual_infeas}};
    }
    return j;
  }

  static Report from_json(const json& j) {
    Report r;
    r.inputs = j.value("inputs", json::object());
    r.tolerances = j.value("tolerances", json::object());
    if (j.contains("sdp_optimum")) r.sdp_optimum = j["sdp_optimum"].get<double>();
    if (j.contains("analytic_bound")) r.analytic_bound = j["analytic_bound"].get<double>();
    if (j.contains("bound_gap")) r.bound_gap = j["bound_gap"].get<double>();
    if (j.contains("duals"))
      for (const auto& row : j["duals"]) {
        DualRow d;
        d.tag = row["tag"].get<std::string>();
        d.value = row["value"].get<double>();
        if (row.contains("closed_form")) d.closed_form = row["closed_form"].get<double>();
        if (row.contains("abs_diff")) d.abs_diff = row["abs_diff"].get<double>();
        r.duals.push_back(d);
      }
    if (j.contains("certificates"))
      r.certificates = j["certificates"].get<std::map<std::string, std::string>>();
    if (j.contains("simulation")) r.simulation = j["simulation"];
    if (j.contains("solver")) {
      SolverDiagnostics d;
      d.status = j["solver"]["status"].get<std::string>();
      d.iterations = j["solver"]["iterations"].get<int>();
      d.gap = j["solver"]["gap"].get<double>();
      d.primal_infeas = j["solver"]["primal_infeas"].get<double>();
      d.dual_infeas = j["solver"]["dual_infeas"].get<double>();
      r.solver = d;
    }
    return r;
  }

  void print(std::ostream& os) const {
    os << std::setprecision(12);
    if (!inputs.empty()) os << "inputs:          " << inputs.dump() << "\n";
    if (sdp_optimum) os << "sdp optimum:     " << *sdp_optimum << "\n";
    if (analytic_bound) os << "analytic bound:  " << *analytic_bound << "\n";
    if (bound_gap) os << "gap to bound:    " << *bound_gap << "\n";
    if (solver)
      os << "solver:          " << solver->status << " (" << solver->iterations
         << " iters, gap " << solver->gap << ", pinf " << solver->primal_infeas << ", dinf "
         << solver->dual_infeas << ")\n";
    if (!duals.empty()) {
      os << "duals:\n";
      for (const auto& r : duals) {
        os << "  " << std::left << std::setw(18) << r.tag << std::right << std::setw(16)
           << r.value;
        if (r.closed_form) os << "  closed-form " << std::setw(16) << *r.closed_form;
        if (r.abs_diff) os << "  |diff| " << *r.abs_diff;
        os << "\n";
      }
    }
    for (const auto& [name, verdict] : certificates)
      os << "certificate " << name << ": " << verdict << "\n";
    if (!simulation.empty()) os << "simulation:      " << simulation.dump() << "\n";
    if (!tolerances.empty()) os << "tolerances:      " << tolerances.dump() << "\n";
  }

  friend bool operator==(const Report& a, const Report& b) {
    return a.to_json() == b.to_json();
  }
};

inline SolverDiagnostics diagnostics_of(const SdpProblem& problem, const SdpSolution& sol) {
  const SdpResiduals r = residuals(problem, sol);
  SolverDiagnostics d;
  d.status = to_string(sol.status);
  d.iterations = sol.iterations;
  d.gap = r.gap;
  d.primal_infeas = r.primal_infeas;
  d.dual_infeas = r.dual_infeas;
  return d;
}

// --- trajectory export ---

inline json trajectory_json(const Trajectory& t) {
  json j;
  json iters = json::array();
  for (const auto& x : t.iterates) iters.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  j["iterates"] = iters;
  j["values"] = t.values;
  j["steps"] = t.steps;
  j["ratios"] = t.ratios();
  return j;
}

// --- exact-arithmetic dumps; rationals serialize as "num/den" strings ---

inline json rational_json(const Rational& q) { return to_string(q); }

inline json qform_json(const QForm& q) {
  json m = json::array();
  for (int a = 0; a < 4; ++a) {
    json row = json::array();
    for (int b = 0; b < 4; ++b) row.push_back(rational_json(q.m[a][b]));
    m.push_back(row);
  }
  return {{"basis", {"x0-x*", "x1-x*", "g0", "g1"}},
          {"matrix", m},
          {"f_coeffs", {rational_json(q.lin[0]), rational_json(q.lin[1])}},
          {"constant", rational_json(q.cst)},
          {"is_zero", q.is_zero()}};
}

inline json combivec_json(const CombiVec& v) {
  json out = json::array();
  for (const auto& c : v) out.push_back(rational_json(c));
  return out;
}

inline json certificate_json(const CertificateExactLS& c) {
  return {{"y", {rational_json(c.y1), rational_json(c.y2), rational_json(c.y3),
                 rational_json(c.y4), rational_json(c.y5)}},
          {"rho", rational_json(c.rho)},
          {"slack_coeffs", {rational_json(c.c1), rational_json(c.c2)}},
          {"slack_vectors", {combivec_json(c.slack1), combivec_json(c.slack2)}}};
}

inline json certificate_json(const CertificateNoisy& c) {
  // explicit arrays: a brace list of [string, string] rows would be taken
  // for an object by the JSON library
  json multiplier = json::array();
  multiplier.push_back(
      json::array({rational_json(c.multiplier[0][0]), rational_json(c.multiplier[0][1])}));
  multiplier.push_back(
      json::array({rational_json(c.multiplier[1][0]), rational_json(c.multiplier[1][1])}));
  return {{"L_eps", rational_json(c.L_eps)},
          {"mu_eps", rational_json(c.mu_eps)},
          {"kappa_eps", rational_json(c.kappa_eps)},
          {"rho_eps", rational_json(c.rho_eps)},
          {"y", {rational_json(c.y1), rational_json(c.y2), rational_json(c.y3),
                 rational_json(c.y4)}},
          {"a", rational_json(c.a)},
          {"matrix_multiplier", multiplier},
          {"alpha",
           {rational_json(c.alpha1), rational_json(c.alpha2), rational_json(c.alpha3),
            rational_json(c.alpha4), rational_json(c.alpha5)}},
          {"slack_coeffs", {rational_json(c.slack_coeff1), rational_json(c.slack_coeff2)}},
          {"slack_vectors", {combivec_json(c.slack1), combivec_json(c.slack2)}}};
}

// --- problem/solution schema used by the CLI ---

inline json matrix_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline json problem_json(const SdpProblem& p) {
  json cons = json::array();
  for (const auto& con : p.constraints) {
    json c = {{"name", con.name},
              {"b", con.b},
              {"rel", con.rel == Relation::Eq ? "=" : "<="},
              {"a_free", vector_json(con.a_free)}};
    json ap = json::array();
    for (const auto& A : con.A_psd) ap.push_back(matrix_json(A));
    json ad = json::array();
    for (const auto& A : con.A_diag) ad.push_back(vector_json(A));
    c["A_psd"] = ap;
    c["A_diag"] = ad;
    cons.push_back(c);
  }
  json cp = json::array();
  for (const auto& C : p.C_psd) cp.push_back(matrix_json(C));
  json cd = json::array();
  for (const auto& C : p.C_diag) cd.push_back(vector_json(C));
  return {{"psd_sizes", p.psd_sizes}, {"diag_sizes", p.diag_sizes},
          {"C_psd", cp},             {"C_diag", cd},
          {"c_free", vector_json(p.c_free)}, {"constraints", cons}};
}

inline json solution_json(const SdpSolution& s) {
  json xp = json::array(), sp = json::array();
  for (const auto& X : s.X_psd) xp.push_back(matrix_json(X));
  for (const auto& S : s.S_psd) sp.push_back(matrix_json(S));
  json xd = json::array(), sd = json::array();
  for (const auto& X : s.X_diag) xd.push_back(vector_json(X));
  for (const auto& S : s.S_diag) sd.push_back(vector_json(S));
  return {{"status", to_string(s.status)},
          {"iterations", s.iterations},
          {"objective_primal", s.objective_primal},
          {"objective_dual", s.objective_dual},
          {"gap", s.gap},
          {"X_psd", xp},
          {"X_diag", xd},
          {"u", vector_json(s.u)},
          {"y", vector_json(s.y)},
          {"S_psd", sp},
          {"S_diag", sd}};
}

inline json gram_index_json(const GramIndex& g) {
  return {{"labels", g.labels()}, {"x_eliminated", g.x_eliminated}, {"dim", g.dim()}};
}

}  // namespace pepls
