#pragma once

// Semidefinite relaxation of the range-localization problem and a dense
// primal-dual interior-point solver for it.
//
// The matrix variable is Z = [[I2, X], [X^T, Y]] of order 2 + m, where the
// columns of X are the blind-node positions and Y relaxes X^T X. Every range
// measurement becomes a rank-one row g^T Z g + u - v = d^2 with
//   g = e_i - e_j        (blind-blind, in the Y block)
//   g = (a_r, -e_i)      (blind-anchor; the I2 block supplies |a_r|^2)
// and the objective is the L1 slack sum(u + v). Three extra rows pin the
// leading 2x2 block to the identity.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>
#include <Eigen/Dense>

#include "coloc/channel.hpp"
#include "coloc/geometry.hpp"

namespace coloc {

class EmptyProblem : public std::runtime_error {
 public:
  EmptyProblem() : std::runtime_error("relaxation has no range measurements") {}
};

/// Sparse vector with at most three non-zeros, indexed into the Z variable.
struct SparseVec3 {
  std::array<std::uint32_t, 3> index{};
  std::array<double, 3> value{};
  std::uint8_t nnz = 0;

  void push(std::uint32_t i, double v) {
    index[nnz] = i;
    value[nnz] = v;
    ++nnz;
  }
};

/// weight * h^T Z h
struct RankOneTerm {
  double weight = 1.0;
  SparseVec3 h;
};

enum class RowKind { BlindBlind, BlindAnchor, Pin };

/// One linear functional on Z: sum over terms of weight * h^T Z h.
/// Measurement rows carry an elastic slack pair (u, v); pin rows do not.
struct ConstraintRow {
  RowKind kind = RowKind::Pin;
  std::size_t i = 0;  // blind node
  std::size_t j = 0;  // second blind node or anchor index
  double rhs = 0.0;
  std::vector<RankOneTerm> terms;

  bool has_slack() const { return kind != RowKind::Pin; }
};

struct SdpProblem {
  std::size_t m = 0;
  Points anchors;
  std::vector<ConstraintRow> rows;  // measurement rows, then the 3 pin rows

  std::size_t dim() const { return m + 2; }
  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_measurement_rows() const { return rows.size() - 3; }

  /// Length used to bring the problem to unit scale inside the solver.
  double length_scale() const {
    double scale = 0.0;
    for (const auto& a : anchors) scale = std::max(scale, norm(a));
    for (const auto& row : rows) {
      if (row.has_slack()) scale = std::max(scale, std::sqrt(row.rhs));
    }
    return scale > 0.0 ? scale : 1.0;
  }

  /// Row value at a given matrix (meters).
  double evaluate(const ConstraintRow& row, const Eigen::MatrixXd& z) const {
    double acc = 0.0;
    for (const auto& t : row.terms) {
      double q = 0.0;
      for (int a = 0; a < t.h.nnz; ++a) {
        for (int b = 0; b < t.h.nnz; ++b) q += t.h.value[a] * t.h.value[b] * z(t.h.index[a], t.h.index[b]);
      }
      acc += t.weight * q;
    }
    return acc;
  }
};

/// Builds Z-space rows from measurements. Every measured distance enters
/// squared.
inline SdpProblem build_relaxation(const RangeMeasurements& measurements, const Points& anchors,
                                   std::size_t m) {
  if (measurements.empty()) throw EmptyProblem();
  SdpProblem prob;
  prob.m = m;
  prob.anchors = anchors;
  prob.rows.reserve(measurements.size() + 3);
  auto blind_index = [](std::size_t i) { return static_cast<std::uint32_t>(i + 2); };
  for (const auto& rec : measurements.records) {
    if (rec.i >= m) throw std::out_of_range("build_relaxation: blind index out of range");
    ConstraintRow row;
    row.i = rec.i;
    row.j = rec.j;
    row.rhs = rec.measured_distance * rec.measured_distance;
    RankOneTerm term;
    if (rec.kind == EdgeKind::BlindBlind) {
      if (rec.j >= m || rec.j == rec.i) throw std::out_of_range("build_relaxation: bad blind-blind pair");
      row.kind = RowKind::BlindBlind;
      term.h.push(blind_index(rec.i), 1.0);
      term.h.push(blind_index(rec.j), -1.0);
    } else {
      if (rec.j >= anchors.size()) throw std::out_of_range("build_relaxation: anchor index out of range");
      row.kind = RowKind::BlindAnchor;
      const Point2 a = anchors[rec.j];
      term.h.push(0, a.x);
      term.h.push(1, a.y);
      term.h.push(blind_index(rec.i), -1.0);
    }
    row.terms.push_back(term);
    prob.rows.push_back(std::move(row));
  }
  // Z00 = 1, Z11 = 1, Z01 = 0; the off-diagonal pin is written as
  // (1/4)(e0+e1)(e0+e1)^T - (1/4)(e0-e1)(e0-e1)^T.
  for (std::uint32_t d = 0; d < 2; ++d) {
    ConstraintRow pin;
    pin.rhs = 1.0;
    RankOneTerm t;
    t.h.push(d, 1.0);
    pin.terms.push_back(t);
    prob.rows.push_back(std::move(pin));
  }
  ConstraintRow off;
  off.rhs = 0.0;
  RankOneTerm plus, minus;
  plus.weight = 0.25;
  plus.h.push(0, 1.0);
  plus.h.push(1, 1.0);
  minus.weight = -0.25;
  minus.h.push(0, 1.0);
  minus.h.push(1, -1.0);
  off.terms = {plus, minus};
  prob.rows.push_back(std::move(off));
  return prob;
}

enum class SolverStatus { Optimal, MaxIter, NumericalTrouble };

inline std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::MaxIter: return "max_iter";
    default: return "numerical_trouble";
  }
}

struct SolverOptions {
  int max_iter = 100;
  double gap_tol = 1e-7;   // relative duality gap
  double feas_tol = 1e-8;  // relative primal and dual residuals
  double max_step_fraction = 0.99;
};

struct SolverStats {
  int iterations = 0;
  double duality_gap = 0.0;  // relative
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  SolverStatus status = SolverStatus::NumericalTrouble;
  double seconds = 0.0;
};

struct SdpSolution {
  Points estimated_positions;
  Eigen::MatrixXd z;           // full (2+m) matrix, meters
  Eigen::MatrixXd gram_block;  // Y
  std::vector<double> trace_indicator;
  double slack_l1 = 0.0;
  double objective_value = 0.0;  // squared-distance objective at the X block
  double min_eigenvalue = 0.0;
  SolverStats stats;

  bool psd_certified() const {
    const double znorm = z.norm();
    return min_eigenvalue >= -1e-7 * std::max(znorm, 1.0);
  }
};

/// Squared-distance objective of rows in `prob` at the given positions.
inline double relaxation_objective(const SdpProblem& prob, const Points& positions) {
  double f = 0.0;
  for (const auto& row : prob.rows) {
    if (!row.has_slack()) continue;
    const Point2 other = row.kind == RowKind::BlindBlind ? positions[row.j] : prob.anchors[row.j];
    const double r = row.rhs - squared_distance(positions[row.i], other);
    f += r * r;
  }
  return f;
}

struct ExtractedPositions {
  Points positions;
  std::vector<double> trace_indicator;  // Y_ii - |x_i|^2
};

/// Reads the X block out of a (2+m) matrix and reports per-node rank gaps.
inline ExtractedPositions extract_positions(const Eigen::MatrixXd& z) {
  const auto m = static_cast<std::size_t>(z.rows() - 2);
  ExtractedPositions out;
  out.positions.resize(m);
  out.trace_indicator.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto c = static_cast<Eigen::Index>(i + 2);
    out.positions[i] = {z(0, c), z(1, c)};
    out.trace_indicator[i] = z(c, c) - squared_norm(out.positions[i]);
  }
  return out;
}

inline ExtractedPositions extract_positions(const SdpSolution& sol) { return extract_positions(sol.z); }

namespace detail {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Problem data in unit-scale coordinates, flattened for the iteration.
struct ScaledProblem {
  Eigen::Index n = 0;        // matrix order
  Eigen::Index q = 0;        // rows
  Eigen::Index p = 0;        // rows with slacks (they come first)
  std::vector<SparseVec3> factors;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> row_terms;  // (factor, weight)
  Vec b;
  double length = 1.0;
  Point2 center;
};

inline ScaledProblem scale_problem(const SdpProblem& prob) {
  ScaledProblem sp;
  // Work in coordinates centered on the anchors and scaled to unit size;
  // this is a congruence on Z and is undone after the solve.
  for (const auto& a : prob.anchors) sp.center = sp.center + a;
  if (!prob.anchors.empty()) sp.center = (1.0 / static_cast<double>(prob.anchors.size())) * sp.center;
  {
    double len = 0.0;
    for (const auto& a : prob.anchors) len = std::max(len, distance(a, sp.center));
    for (const auto& row : prob.rows) {
      if (row.has_slack()) len = std::max(len, std::sqrt(row.rhs));
    }
    sp.length = len > 0.0 ? len : 1.0;
  }
  sp.n = static_cast<Eigen::Index>(prob.dim());
  sp.q = static_cast<Eigen::Index>(prob.num_rows());
  sp.b.resize(sp.q);
  sp.row_terms.resize(prob.num_rows());
  const double inv_l = 1.0 / sp.length;
  Eigen::Index k = 0;
  bool slack_block = true;
  for (const auto& row : prob.rows) {
    if (row.has_slack()) {
      if (!slack_block) throw std::invalid_argument("solve_sdp: measurement rows must precede pin rows");
      ++sp.p;
    } else {
      slack_block = false;
    }
    // Z' = D Z D with D = diag(1, 1, 1/L, ...); measurement rows are divided
    // by L^2 so g' = D^{-1} g / L.
    for (const auto& t : row.terms) {
      SparseVec3 h = t.h;
      if (row.kind == RowKind::BlindAnchor) {
        h.value[0] -= sp.center.x;
        h.value[1] -= sp.center.y;
      }
      for (int a = 0; a < h.nnz; ++a) {
        const bool position_coord = h.index[a] >= 2;
        if (row.has_slack()) {
          h.value[a] = position_coord ? h.value[a] : h.value[a] * inv_l;
        } else if (position_coord) {
          h.value[a] *= sp.length;
        }
      }
      sp.row_terms[k].emplace_back(static_cast<Eigen::Index>(sp.factors.size()), t.weight);
      sp.factors.push_back(h);
    }
    sp.b(k) = row.has_slack() ? row.rhs * inv_l * inv_l : row.rhs;
    ++k;
  }
  return sp;
}

// Adjoint-style helpers over the rank-one factors.
inline Vec apply_rows(const ScaledProblem& sp, const Mat& w) {
  Vec out(sp.q);
  for (Eigen::Index k = 0; k < sp.q; ++k) {
    double acc = 0.0;
    for (const auto& [t, weight] : sp.row_terms[k]) {
      const auto& h = sp.factors[t];
      double qf = 0.0;
      for (int a = 0; a < h.nnz; ++a) {
        double inner = 0.0;
        for (int c = 0; c < h.nnz; ++c) inner += w(h.index[a], h.index[c]) * h.value[c];
        qf += h.value[a] * inner;
      }
      acc += weight * qf;
    }
    out(k) = acc;
  }
  return out;
}

inline Mat apply_adjoint(const ScaledProblem& sp, const Vec& y) {
  Mat out = Mat::Zero(sp.n, sp.n);
  for (Eigen::Index k = 0; k < sp.q; ++k) {
    for (const auto& [t, weight] : sp.row_terms[k]) {
      const auto& h = sp.factors[t];
      const double s = weight * y(k);
      for (int a = 0; a < h.nnz; ++a) {
        for (int c = 0; c < h.nnz; ++c) out(h.index[a], h.index[c]) += s * h.value[a] * h.value[c];
      }
    }
  }
  return out;
}

// Columns W h_t for every factor, stored row-major as n x f.
inline RowMat factor_products(const ScaledProblem& sp, const Mat& w) {
  const auto f = static_cast<Eigen::Index>(sp.factors.size());
  RowMat out(sp.n, f);
  for (Eigen::Index t = 0; t < f; ++t) {
    const auto& h = sp.factors[t];
    auto col = out.col(t);
    col = h.value[0] * w.col(h.index[0]);
    for (int a = 1; a < h.nnz; ++a) col += h.value[a] * w.col(h.index[a]);
  }
  return out;
}

// Upper triangle of (H^T Z H) .* (H^T W H), the Schur complement over the
// rank-one factors, from the products Z H and W H.
inline Mat factor_schur(const ScaledProblem& sp, const RowMat& zh, const RowMat& wh) {
  const auto f = static_cast<Eigen::Index>(sp.factors.size());
  Mat out(f, f);
  Eigen::RowVectorXd pz(f), pw(f);
  for (Eigen::Index t = 0; t < f; ++t) {
    const auto& h = sp.factors[t];
    const Eigen::Index len = t + 1;
    pz.head(len) = h.value[0] * zh.row(h.index[0]).head(len);
    pw.head(len) = h.value[0] * wh.row(h.index[0]).head(len);
    for (int a = 1; a < h.nnz; ++a) {
      pz.head(len) += h.value[a] * zh.row(h.index[a]).head(len);
      pw.head(len) += h.value[a] * wh.row(h.index[a]).head(len);
    }
    out.col(t).head(len) = pz.head(len).cwiseProduct(pw.head(len)).transpose();
  }
  return out;
}

// Largest alpha with D + alpha dX psd, D = diag(d) positive.
inline double max_scaled_psd_step(const Vec& d, const Mat& dx) {
  const Vec inv_sqrt = d.cwiseSqrt().cwiseInverse();
  const Mat w = inv_sqrt.asDiagonal() * (0.5 * (dx + dx.transpose())) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> eig(w, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

// Symmetric square-root factor F with F F^T = A, from the eigendecomposition.
inline Mat sqrt_factor(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

// Nesterov-Todd scaling: G with G^-1 Z G^-T = G^T S G = diag(d).
struct NtScaling {
  Mat g;
  Vec d;
  bool ok = false;
};

inline NtScaling nt_scaling(const Mat& z, const Mat& s) {
  NtScaling nt;
  const Mat lz = sqrt_factor(z);
  const Mat ls = sqrt_factor(s);
  Eigen::BDCSVD<Mat> svd(ls.transpose() * lz, Eigen::ComputeThinU | Eigen::ComputeThinV);
  nt.d = svd.singularValues();
  if (!(nt.d.minCoeff() > 0.0) || !nt.d.allFinite()) return nt;
  nt.g = lz * svd.matrixV() * nt.d.cwiseSqrt().cwiseInverse().asDiagonal();
  nt.ok = nt.g.allFinite();
  return nt;
}

inline double max_ratio_step(const Vec& x, const Vec& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
  }
  return alpha;
}

}  // namespace detail

/// Primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start) for
///   min sum(u + v)  s.t.  A(Z) + u - v = b,  pins,  Z psd,  u, v >= 0.
inline SdpSolution solve_sdp(const SdpProblem& problem, const SolverOptions& opts = {}) {
  using namespace detail;
  const auto started = std::chrono::steady_clock::now();
  if (problem.rows.size() <= 3) throw EmptyProblem();

  const ScaledProblem sp = scale_problem(problem);
  const Eigen::Index n = sp.n, q = sp.q, p = sp.p;

  // Starting point: Z = I (the data length scale squared, in meters),
  // S = I, y = 0, slacks sized to the initial residual.
  Mat z = Mat::Identity(n, n);
  Mat s = Mat::Identity(n, n);
  Vec y = Vec::Zero(q);
  Vec u(p), v(p), su = Vec::Ones(p), sv = Vec::Ones(p);
  {
    const Vec r0 = sp.b - apply_rows(sp, z);
    for (Eigen::Index k = 0; k < p; ++k) u(k) = v(k) = std::max(1.0, std::abs(r0(k)));
  }
  const double bnorm = sp.b.norm();
  const double cnorm = std::sqrt(2.0 * static_cast<double>(p));
  const double nvars = static_cast<double>(n + 2 * p);

  SolverStats stats;
  stats.status = SolverStatus::MaxIter;
  double step_fraction = 0.9;

  for (int iter = 0;; ++iter) {
    // Residuals and convergence measures.
    const Vec az = apply_rows(sp, z);
    Vec rp = sp.b - az;
    rp.head(p) -= u - v;
    const Mat aty = apply_adjoint(sp, y);
    const Mat rd = -aty - s;
    const Vec rdu = Vec::Ones(p) - y.head(p) - su;
    const Vec rdv = Vec::Ones(p) + y.head(p) - sv;

    const double pobj = u.sum() + v.sum();
    const double dobj = sp.b.dot(y);
    const double compl_gap = (z.cwiseProduct(s)).sum() + u.dot(su) + v.dot(sv);
    const double mu = compl_gap / nvars;
    stats.iterations = iter;
    stats.duality_gap = std::max(compl_gap, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));
    stats.primal_infeasibility = rp.norm() / (1.0 + bnorm);
    stats.dual_infeasibility =
        std::sqrt(rd.squaredNorm() + rdu.squaredNorm() + rdv.squaredNorm()) / (1.0 + cnorm);

    if (!std::isfinite(stats.duality_gap) || !std::isfinite(stats.primal_infeasibility)) {
      stats.status = SolverStatus::NumericalTrouble;
      break;
    }
    if (stats.duality_gap <= opts.gap_tol && stats.primal_infeasibility <= opts.feas_tol &&
        stats.dual_infeasibility <= opts.feas_tol) {
      stats.status = SolverStatus::Optimal;
      break;
    }
    if (iter >= opts.max_iter) {
      stats.status = SolverStatus::MaxIter;
      break;
    }

    const NtScaling nt = nt_scaling(z, s);
    if (!nt.ok) {
      stats.status = SolverStatus::NumericalTrouble;
      break;
    }
    const Mat w = nt.g * nt.g.transpose();

    // Schur complement: M_kl = tr(A_k W A_l W) plus the slack diagonal. For
    // rank-one factors this is the Hadamard square of H^T W H.
    const RowMat wh = factor_products(sp, w);
    const Mat h = factor_schur(sp, wh, wh);
    Mat schur(q, q);
    Eigen::Index simple = 0;
    while (simple < q && sp.row_terms[simple].size() == 1 && sp.row_terms[simple][0].first == simple &&
           sp.row_terms[simple][0].second == 1.0) {
      ++simple;
    }
    schur.topLeftCorner(simple, simple).triangularView<Eigen::Upper>() =
        h.topLeftCorner(simple, simple).triangularView<Eigen::Upper>();
    auto h_at = [&](Eigen::Index t, Eigen::Index r) { return t <= r ? h(t, r) : h(r, t); };
    for (Eigen::Index k = simple; k < q; ++k) {
      for (Eigen::Index l = 0; l <= k; ++l) {
        double acc = 0.0;
        for (const auto& [t, wt] : sp.row_terms[k]) {
          for (const auto& [r, wr] : sp.row_terms[l]) acc += wt * wr * h_at(t, r);
        }
        schur(l, k) = acc;
      }
    }
    schur.diagonal().head(p) += u.cwiseQuotient(su) + v.cwiseQuotient(sv);

    Eigen::LLT<Mat, Eigen::Upper> chol_m(schur);
    if (chol_m.info() != Eigen::Success) {
      // Tiny diagonal shift for near-singular late iterates.
      schur.diagonal().array() += 1e-13 * schur.diagonal().cwiseAbs().maxCoeff();
      chol_m.compute(schur);
      if (chol_m.info() != Eigen::Success) {
        stats.status = SolverStatus::NumericalTrouble;
        break;
      }
    }

    // Directions live in the scaled space: dX~ = G^-1 dZ G^-T, dS~ = G^T dS G.
    struct Direction {
      Mat dz_scaled, ds_scaled, ds;
      Vec dy, du, dv, dsu, dsv;
    };
    const Mat w_rd_w = w * rd * w;
    const Vec a_wrdw = apply_rows(sp, w_rd_w);
    const Vec& dvec = nt.d;
    const Mat jordan = 0.5 * (dvec.replicate(1, n) + dvec.transpose().replicate(n, 1));
    auto solve_direction = [&](const Mat& rc_scaled, const Vec& rcu, const Vec& rcv) {
      Direction d;
      const Mat y_scaled = rc_scaled.cwiseQuotient(jordan);  // dX~ + dS~
      const Mat r = nt.g * y_scaled * nt.g.transpose();
      Vec rhs = rp - apply_rows(sp, r) + a_wrdw;
      rhs.head(p) += (-rcu + u.cwiseProduct(rdu)).cwiseQuotient(su) + (rcv - v.cwiseProduct(rdv)).cwiseQuotient(sv);
      d.dy = chol_m.solve(rhs);
      d.dy += chol_m.solve(rhs - schur.selfadjointView<Eigen::Upper>() * d.dy);
      d.ds = rd - apply_adjoint(sp, d.dy);
      d.ds_scaled = nt.g.transpose() * d.ds * nt.g;
      d.ds_scaled = 0.5 * (d.ds_scaled + d.ds_scaled.transpose()).eval();
      d.dz_scaled = y_scaled - d.ds_scaled;
      d.dsu = rdu - d.dy.head(p);
      d.dsv = rdv + d.dy.head(p);
      d.du = (rcu - u.cwiseProduct(d.dsu)).cwiseQuotient(su);
      d.dv = (rcv - v.cwiseProduct(d.dsv)).cwiseQuotient(sv);
      return d;
    };
    auto step_lengths = [&](const Direction& d, double fraction) {
      double ap = std::min({max_scaled_psd_step(dvec, d.dz_scaled), max_ratio_step(u, d.du), max_ratio_step(v, d.dv)});
      double ad = std::min({max_scaled_psd_step(dvec, d.ds_scaled), max_ratio_step(su, d.dsu), max_ratio_step(sv, d.dsv)});
      return std::pair{std::min(1.0, fraction * ap), std::min(1.0, fraction * ad)};
    };

    // Predictor.
    const Mat d_diag = dvec.asDiagonal();
    const Mat d_sq = dvec.cwiseAbs2().asDiagonal();
    const Direction aff = solve_direction(-d_sq, -u.cwiseProduct(su), -v.cwiseProduct(sv));
    const auto [ap_aff, ad_aff] = step_lengths(aff, 1.0);
    const double mu_aff = (((d_diag + ap_aff * aff.dz_scaled).cwiseProduct(d_diag + ad_aff * aff.ds_scaled)).sum() +
                           (u + ap_aff * aff.du).dot(su + ad_aff * aff.dsu) +
                           (v + ap_aff * aff.dv).dot(sv + ad_aff * aff.dsv)) /
                          nvars;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term.
    const Mat cross = aff.dz_scaled * aff.ds_scaled;
    Mat rc = -d_sq - 0.5 * (cross + cross.transpose());
    rc.diagonal().array() += sigma * mu;
    const Vec rcu = Vec::Constant(p, sigma * mu) - u.cwiseProduct(su) - aff.du.cwiseProduct(aff.dsu);
    const Vec rcv = Vec::Constant(p, sigma * mu) - v.cwiseProduct(sv) - aff.dv.cwiseProduct(aff.dsv);
    const Direction dir = solve_direction(rc, rcu, rcv);
    const auto [ap, ad] = step_lengths(dir, step_fraction);
    if (!(ap > 0.0) || !(ad > 0.0) || !std::isfinite(ap) || !std::isfinite(ad)) {
      stats.status = SolverStatus::NumericalTrouble;
      break;
    }

    const Mat dz = nt.g * dir.dz_scaled * nt.g.transpose();
    z += ap * dz;
    u += ap * dir.du;
    v += ap * dir.dv;
    y += ad * dir.dy;
    s += ad * dir.ds;
    su += ad * dir.dsu;
    sv += ad * dir.dsv;
    z = 0.5 * (z + z.transpose()).eval();
    s = 0.5 * (s + s.transpose()).eval();
    step_fraction = std::clamp(0.9 + 0.09 * std::min(ap, ad), 0.9, opts.max_step_fraction);
  }

  // Back to meters.
  SdpSolution sol;
  const double len = sp.length;
  Vec unscale = Vec::Constant(n, len);
  unscale(0) = unscale(1) = 1.0;
  Mat shift = Mat::Identity(n, n);
  shift.bottomLeftCorner(n - 2, 1).setConstant(sp.center.x);
  shift.bottomLeftCorner(n - 2, 2).col(1).setConstant(sp.center.y);
  sol.z = shift * unscale.asDiagonal() * z * unscale.asDiagonal() * shift.transpose();
  sol.z = 0.5 * (sol.z + sol.z.transpose()).eval();
  sol.gram_block = sol.z.bottomRightCorner(n - 2, n - 2);
  auto ext = extract_positions(sol.z);
  sol.estimated_positions = std::move(ext.positions);
  sol.trace_indicator = std::move(ext.trace_indicator);
  sol.slack_l1 = (u.sum() + v.sum()) * len * len;
  sol.objective_value = relaxation_objective(problem, sol.estimated_positions);
  Eigen::SelfAdjointEigenSolver<Mat> eig(sol.z, Eigen::EigenvaluesOnly);
  sol.min_eigenvalue = eig.eigenvalues()(0);
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  sol.stats = stats;
  return sol;
}

}  // namespace coloc
