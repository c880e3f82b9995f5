#pragma once

// Local minimization of the squared-distance objective
//   f(s) = sum over measured edges of (d^2 - |s_i - s_j|^2)^2
// starting from the relaxation estimate.

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coloc/channel.hpp"
#include "coloc/geometry.hpp"

namespace coloc {

enum class RefineMethod { GradientDescent, GaussNewton };

struct RefineOptions {
  RefineMethod method = RefineMethod::GradientDescent;
  int max_iter = 500;
  double grad_tol = 1e-9;  // relative to max(1, f)
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  bool record_trace = false;
};

enum class RefineStatus { Converged, MaxIter, Stalled };

inline std::string_view to_string(RefineStatus s) {
  switch (s) {
    case RefineStatus::Converged: return "converged";
    case RefineStatus::MaxIter: return "max_iter";
    default: return "stalled";
  }
}

struct RefineTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
};

struct RefineResult {
  Points positions;
  double initial_objective = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  RefineStatus status = RefineStatus::MaxIter;
  std::vector<RefineTraceRow> trace;
};

namespace detail {

inline Point2 other_end(const RangeRecord& rec, const Points& positions, const Points& anchors) {
  return rec.kind == EdgeKind::BlindBlind ? positions[rec.j] : anchors[rec.j];
}

}  // namespace detail

inline double objective(const Points& positions, const RangeMeasurements& measurements, const Points& anchors) {
  double f = 0.0;
  for (const auto& rec : measurements.records) {
    const double d2 = rec.measured_distance * rec.measured_distance;
    const double r = d2 - squared_distance(positions[rec.i], detail::other_end(rec, positions, anchors));
    f += r * r;
  }
  return f;
}

/// Gradient laid out as (x_0, y_0, x_1, y_1, ...).
inline Eigen::VectorXd gradient(const Points& positions, const RangeMeasurements& measurements,
                                const Points& anchors) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * positions.size()));
  for (const auto& rec : measurements.records) {
    const Point2 delta = positions[rec.i] - detail::other_end(rec, positions, anchors);
    const double r = rec.measured_distance * rec.measured_distance - squared_norm(delta);
    const auto i = static_cast<Eigen::Index>(2 * rec.i);
    g(i) += -4.0 * r * delta.x;
    g(i + 1) += -4.0 * r * delta.y;
    if (rec.kind == EdgeKind::BlindBlind) {
      const auto j = static_cast<Eigen::Index>(2 * rec.j);
      g(j) += 4.0 * r * delta.x;
      g(j + 1) += 4.0 * r * delta.y;
    }
  }
  return g;
}

namespace detail {

// Gauss-Newton normal matrix J^T J for residuals r_e = d^2 - |delta|^2.
inline Eigen::MatrixXd gauss_newton_matrix(const Points& positions, const RangeMeasurements& measurements,
                                           const Points& anchors) {
  const auto dim = static_cast<Eigen::Index>(2 * positions.size());
  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& rec : measurements.records) {
    const Point2 delta = positions[rec.i] - other_end(rec, positions, anchors);
    const Eigen::Vector2d grad_i(-2.0 * delta.x, -2.0 * delta.y);
    const Eigen::Matrix2d outer = grad_i * grad_i.transpose();
    const auto i = static_cast<Eigen::Index>(2 * rec.i);
    jtj.block<2, 2>(i, i) += outer;
    if (rec.kind == EdgeKind::BlindBlind) {
      const auto j = static_cast<Eigen::Index>(2 * rec.j);
      jtj.block<2, 2>(j, j) += outer;
      jtj.block<2, 2>(i, j) -= outer;
      jtj.block<2, 2>(j, i) -= outer;
    }
  }
  return jtj;
}

inline Points moved(const Points& base, const Eigen::VectorXd& step, double t) {
  Points out = base;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].x += t * step(static_cast<Eigen::Index>(2 * k));
    out[k].y += t * step(static_cast<Eigen::Index>(2 * k + 1));
  }
  return out;
}

}  // namespace detail

/// Steepest descent (or damped Gauss-Newton) with Armijo backtracking.
/// Gradient steps restart from twice the last accepted length.
/// The objective never increases; nodes without measurements do not move.
inline RefineResult refine(const Points& initial, const RangeMeasurements& measurements, const Points& anchors,
                           const RefineOptions& opts = {}) {
  RefineResult res;
  res.positions = initial;
  double f = objective(res.positions, measurements, anchors);
  res.initial_objective = f;
  double last_step = 0.5;
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd g = gradient(res.positions, measurements, anchors);
    res.objective = f;
    res.grad_norm = g.norm();
    res.iterations = iter;
    if (opts.record_trace) res.trace.push_back({iter, f, res.grad_norm});
    if (res.grad_norm <= opts.grad_tol * std::max(1.0, f)) {
      res.status = RefineStatus::Converged;
      break;
    }
    if (iter >= opts.max_iter) {
      res.status = RefineStatus::MaxIter;
      break;
    }

    Eigen::VectorXd step = -g;
    double slope = -g.squaredNorm();
    double t = std::min(1.0, 2.0 * last_step);
    if (opts.method == RefineMethod::GaussNewton) {
      Eigen::MatrixXd jtj = detail::gauss_newton_matrix(res.positions, measurements, anchors);
      jtj.diagonal().array() += 1e-10 * std::max(1.0, jtj.diagonal().maxCoeff());
      // grad f = 2 J^T r, so the Gauss-Newton step solves (J^T J) p = -g / 2.
      Eigen::VectorXd gn = jtj.ldlt().solve(-0.5 * g);
      const double gn_slope = g.dot(gn);
      if (gn.allFinite() && gn_slope < 0.0) {
        step = std::move(gn);
        slope = gn_slope;
        t = 1.0;
      }
    }

    bool accepted = false;
    while (t > 1e-20) {
      Points trial = detail::moved(res.positions, step, t);
      const double ft = objective(trial, measurements, anchors);
      if (ft <= f + opts.sufficient_decrease * t * slope) {
        res.positions = std::move(trial);
        f = ft;
        last_step = t;
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted) {
      res.status = RefineStatus::Stalled;
      break;
    }
  }
  return res;
}

}  // namespace coloc
