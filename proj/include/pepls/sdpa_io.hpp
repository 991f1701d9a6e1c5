#pragma once

// Sparse SDPA ".dat-s" writer and parser, for cross-checking problems with
// external solvers. The exported file describes the canonical all-equality
// form: inequality rows gain slack entries in a diagonal block, free scalar
// variables are split u = u+ - u- into a nonnegative diagonal block. In SDPA
// terms the file encodes  max tr(F0 Y) s.t. tr(Fk Y) = ck, Y >= 0,  so the
// external optimum equals this problem's optimum directly.

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "pepls/errors.hpp"
#include "pepls/sdp.hpp"

namespace pepls {

// The canonical form the exporter writes: PSD blocks unchanged, one diagonal
// block per original diagonal block, plus (when needed) a slack block and a
// split block for free variables. All constraints equalities, no free vars.
inline SdpProblem sdpa_canonical_form(const SdpProblem& p) {
  p.validate();
  const int m = p.num_constraints();
  std::vector<int> ineq_rows;
  for (int k = 0; k < m; ++k)
    if (p.constraints[k].rel == Relation::Le) ineq_rows.push_back(k);
  const int nslack = static_cast<int>(ineq_rows.size());
  const int nfree = p.num_free();

  std::vector<int> diag = p.diag_sizes;
  if (nslack > 0) diag.push_back(nslack);
  if (nfree > 0) diag.push_back(2 * nfree);

  SdpProblem out = SdpProblem::with_blocks(p.psd_sizes, diag, 0);
  out.C_psd = p.C_psd;
  for (std::size_t i = 0; i < p.diag_sizes.size(); ++i) out.C_diag[i] = p.C_diag[i];
  if (nfree > 0) {
    VectorXd& split = out.C_diag.back();
    for (int t = 0; t < nfree; ++t) {
      split(t) = p.c_free(t);
      split(nfree + t) = -p.c_free(t);
    }
  }
  for (int k = 0; k < m; ++k) {
    auto con = out.blank_constraint();
    con.A_psd = p.constraints[k].A_psd;
    for (std::size_t i = 0; i < p.diag_sizes.size(); ++i)
      con.A_diag[i] = p.constraints[k].A_diag[i];
    int extra = static_cast<int>(p.diag_sizes.size());
    if (nslack > 0) {
      for (std::size_t t = 0; t < ineq_rows.size(); ++t)
        if (ineq_rows[t] == k) con.A_diag[extra](static_cast<int>(t)) = 1.0;
      ++extra;
    }
    if (nfree > 0) {
      for (int t = 0; t < nfree; ++t) {
        con.A_diag[extra](t) = p.constraints[k].a_free(t);
        con.A_diag[extra](nfree + t) = -p.constraints[k].a_free(t);
      }
    }
    con.b = p.constraints[k].b;
    con.rel = Relation::Eq;
    con.name = p.constraints[k].name;
    out.constraints.push_back(std::move(con));
  }
  return out;
}

inline std::string export_sdpa(const SdpProblem& problem) {
  const SdpProblem p = sdpa_canonical_form(problem);
  const int m = p.num_constraints();
  std::ostringstream out;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "* pepls export\n";
  out << m << "\n";
  out << (p.psd_sizes.size() + p.diag_sizes.size()) << "\n";
  for (std::size_t i = 0; i < p.psd_sizes.size(); ++i)
    out << p.psd_sizes[i] << (i + 1 < p.psd_sizes.size() + p.diag_sizes.size() ? " " : "");
  for (std::size_t i = 0; i < p.diag_sizes.size(); ++i)
    out << -p.diag_sizes[i] << (p.psd_sizes.size() + i + 1 < p.psd_sizes.size() + p.diag_sizes.size() ? " " : "");
  out << "\n";
  for (int k = 0; k < m; ++k) out << num(p.constraints[k].b) << (k + 1 < m ? " " : "");
  out << "\n";

  const auto emit_block = [&](int matno, int blk1, const MatrixXd& M) {
    for (int r = 0; r < M.rows(); ++r)
      for (int c = r; c < M.cols(); ++c)
        if (M(r, c) != 0.0)
          out << matno << ' ' << blk1 << ' ' << (r + 1) << ' ' << (c + 1) << ' '
              << num(M(r, c)) << "\n";
  };
  const auto emit_diag = [&](int matno, int blk1, const VectorXd& v) {
    for (int t = 0; t < v.size(); ++t)
      if (v(t) != 0.0)
        out << matno << ' ' << blk1 << ' ' << (t + 1) << ' ' << (t + 1) << ' ' << num(v(t))
            << "\n";
  };
  for (std::size_t i = 0; i < p.psd_sizes.size(); ++i)
    emit_block(0, static_cast<int>(i) + 1, p.C_psd[i]);
  for (std::size_t i = 0; i < p.diag_sizes.size(); ++i)
    emit_diag(0, static_cast<int>(p.psd_sizes.size() + i) + 1, p.C_diag[i]);
  for (int k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < p.psd_sizes.size(); ++i)
      emit_block(k + 1, static_cast<int>(i) + 1, p.constraints[k].A_psd[i]);
    for (std::size_t i = 0; i < p.diag_sizes.size(); ++i)
      emit_diag(k + 1, static_cast<int>(p.psd_sizes.size() + i) + 1, p.constraints[k].A_diag[i]);
  }
  return out.str();
}

inline SdpProblem parse_sdpa(const std::string& text) {
  // strip comment lines, map SDPA punctuation to spaces
  std::istringstream in(text);
  std::string line, plain;
  while (std::getline(in, line)) {
    if (!line.empty() && (line[0] == '*' || line[0] == '"')) continue;
    for (char& ch : line)
      if (ch == ',' || ch == '(' || ch == ')' || ch == '{' || ch == '}') ch = ' ';
    plain += line + "\n";
  }
  std::istringstream ts(plain);
  long m = 0, nblocks = 0;
  if (!(ts >> m >> nblocks) || m < 0 || nblocks <= 0)
    throw InputError("parse_sdpa: bad header");
  std::vector<long> sizes(nblocks);
  std::vector<int> psd_sizes, diag_sizes;
  std::vector<int> block_of(nblocks), psd_or_diag(nblocks);
  for (long i = 0; i < nblocks; ++i) {
    if (!(ts >> sizes[i]) || sizes[i] == 0) throw InputError("parse_sdpa: bad block size");
    if (sizes[i] > 0) {
      block_of[i] = static_cast<int>(psd_sizes.size());
      psd_or_diag[i] = 0;
      psd_sizes.push_back(static_cast<int>(sizes[i]));
    } else {
      block_of[i] = static_cast<int>(diag_sizes.size());
      psd_or_diag[i] = 1;
      diag_sizes.push_back(static_cast<int>(-sizes[i]));
    }
  }
  SdpProblem p = SdpProblem::with_blocks(psd_sizes, diag_sizes, 0);
  for (long k = 0; k < m; ++k) {
    auto con = p.blank_constraint();
    if (!(ts >> con.b)) throw InputError("parse_sdpa: missing right-hand side");
    con.rel = Relation::Eq;
    p.constraints.push_back(std::move(con));
  }
  long matno, blk, ii, jj;
  double val;
  while (ts >> matno >> blk >> ii >> jj >> val) {
    if (blk < 1 || blk > nblocks || matno < 0 || matno > m)
      throw InputError("parse_sdpa: entry out of range");
    const long s = std::abs(sizes[blk - 1]);
    if (ii < 1 || jj < 1 || ii > s || jj > s) throw InputError("parse_sdpa: index out of range");
    const int bi = block_of[blk - 1];
    const bool diag = psd_or_diag[blk - 1] == 1;
    if (diag && ii != jj) throw InputError("parse_sdpa: off-diagonal entry in diagonal block");
    const auto put = [&](std::vector<MatrixXd>& Ms, std::vector<VectorXd>& vs) {
      if (diag)
        vs[bi](ii - 1) = val;
      else {
        Ms[bi](ii - 1, jj - 1) = val;
        Ms[bi](jj - 1, ii - 1) = val;
      }
    };
    if (matno == 0)
      put(p.C_psd, p.C_diag);
    else
      put(p.constraints[matno - 1].A_psd, p.constraints[matno - 1].A_diag);
  }
  return p;
}

}  // namespace pepls
