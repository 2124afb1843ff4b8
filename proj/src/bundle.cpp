#include "spherefda/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace spherefda {

namespace {

void check_same_grid(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw GridMismatch(std::string(who) + ": grid sizes differ");
}

double clamp_theta(double t) { return std::clamp(t, -M_PI / 2, M_PI / 2); }

}  // namespace

double inner_product(const TangentElement& a, const TangentElement& b) {
  if (std::abs(dot(a.u.base(), b.u.base()) - 1.0) > 1e-9)
    throw BaseMismatch("inner_product: elements live at different base points");
  check_same_grid(a.size(), b.size(), "inner_product");
  const auto w = kernels::trapezoid_weights(a.size());
  return dot(a.u.vec(), b.u.vec()) + kernels::weighted_dot(a.w, b.w, w);
}

double dist_beta_squared(const Tsrvc& a, const Tsrvc& b, double theta) {
  check_same_grid(a.size(), b.size(), "dist_beta_squared");
  const CircularArc arc = arc_between(a.start, b.start, theta);
  const double len = arc_length(arc);
  const Mat3 m = transport_matrix_along_arc(arc, 1.0);
  kernels::VectorField moved;
  kernels::rotate_batch(m, a.field, moved);
  const auto w = kernels::trapezoid_weights(a.size());
  return len * len + kernels::active().weighted_sqdiff(moved, b.field, w.data(), w.size());
}

double dist_beta_squared(const Curve& p0, const Curve& p, double theta) {
  return dist_beta_squared(to_tsrvc(p0), to_tsrvc(p), theta);
}

double grad_theta(const Tsrvc& a, const Tsrvc& b, double theta) {
  const double h = tol::kFdStep;
  const double hi = std::min(theta + h, M_PI / 2);
  const double lo = std::max(theta - h, -M_PI / 2);
  return (dist_beta_squared(a, b, hi) - dist_beta_squared(a, b, lo)) / (hi - lo);
}

double grad_theta(const Curve& p0, const Curve& p, double theta) {
  return grad_theta(to_tsrvc(p0), to_tsrvc(p), theta);
}

namespace {

/// Local vertex refinement: successive parabolic fits through three points.
/// Recovers the flat-basin slack the slope threshold leaves behind.
void polish_theta(const Tsrvc& a, const Tsrvc& b, ThetaResult& r, double tol) {
  double delta = 0.05;
  for (int round = 0; round < 8; ++round) {
    const double tl = std::max(r.theta - delta, -M_PI / 2);
    const double tr = std::min(r.theta + delta, M_PI / 2);
    const double fl = dist_beta_squared(a, b, tl);
    const double fr = dist_beta_squared(a, b, tr);
    const double denom =
        (tl - r.theta) * (fr - r.dist_sq) - (tr - r.theta) * (fl - r.dist_sq);
    if (std::abs(denom) > 1e-300) {
      const double num = (tl - r.theta) * (tl - r.theta) * (fr - r.dist_sq) -
                         (tr - r.theta) * (tr - r.theta) * (fl - r.dist_sq);
      const double vertex = clamp_theta(r.theta - 0.5 * num / denom);
      const double fv = dist_beta_squared(a, b, vertex);
      if (fv < r.dist_sq) {
        r.theta = vertex;
        r.dist_sq = fv;
      }
    }
    if (fl < r.dist_sq) {
      r.theta = tl;
      r.dist_sq = fl;
    }
    if (fr < r.dist_sq) {
      r.theta = tr;
      r.dist_sq = fr;
    }
    delta *= 0.35;
  }
  r.grad = grad_theta(a, b, r.theta);
  if (std::abs(r.grad) < tol) r.converged = true;
}

/// Single descent run of the angle search: step, accept if in range and
/// decreasing, halve otherwise; a parabolic polish tightens the result.
ThetaResult descend_theta(const Tsrvc& a, const Tsrvc& b, double theta0,
                          const OptimizerOptions& opts) {
  ThetaResult r;
  r.theta = clamp_theta(theta0);
  r.dist_sq = dist_beta_squared(a, b, r.theta);
  double lambda = opts.step;
  r.grad = grad_theta(a, b, r.theta);
  while (r.iterations < opts.max_iter) {
    if (std::abs(r.grad) < opts.tol) {
      r.converged = true;
      break;
    }
    if (lambda < tol::kStepFloor) break;
    const double cand = r.theta - lambda * r.grad;
    ++r.iterations;
    if (cand >= -M_PI / 2 && cand <= M_PI / 2) {
      const double d2 = dist_beta_squared(a, b, cand);
      if (d2 < r.dist_sq) {
        r.theta = cand;
        r.dist_sq = d2;
        r.grad = grad_theta(a, b, r.theta);
        continue;
      }
    }
    lambda *= 0.5;
  }
  polish_theta(a, b, r, opts.tol);
  return r;
}

}  // namespace

ThetaResult optimal_theta(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts) {
  ThetaResult best = descend_theta(a, b, opts.theta0, opts);

  // Restart policy: near-coincident starts, a stalled run, or a sweep angle
  // that already beats the returned iterate all trigger extra descents.
  bool stalled = !best.converged || std::abs(dot(a.start, b.start)) > 0.999;
  double sweep_theta = 0.0, sweep_d2 = best.dist_sq;
  for (int i = 0; i < 13; ++i) {
    const double t = -M_PI / 2 + M_PI * (i + 0.5) / 13.0;
    const double d2 = dist_beta_squared(a, b, t);
    if (d2 < sweep_d2 - 1e-12) {
      sweep_d2 = d2;
      sweep_theta = t;
      stalled = true;
    }
  }
  if (stalled) {
    double seeds[] = {-M_PI / 4, 0.0, M_PI / 4, sweep_theta};
    for (double t : seeds) {
      ThetaResult cand = descend_theta(a, b, t, opts);
      cand.iterations += best.iterations;
      if (cand.dist_sq < best.dist_sq) {
        cand.converged = cand.converged || best.converged;
        best = cand;
      } else {
        best.iterations = cand.iterations;
      }
    }
  }
  return best;
}

ThetaResult optimal_theta(const Curve& p0, const Curve& p, const OptimizerOptions& opts) {
  return optimal_theta(to_tsrvc(p0), to_tsrvc(p), opts);
}

GeodesicPath geodesic_path(const Tsrvc& a, const Tsrvc& b, double theta, int steps) {
  check_same_grid(a.size(), b.size(), "geodesic_path");
  GeodesicPath path;
  path.arc = arc_between(a.start, b.start, theta);
  path.steps = std::max(1, steps);
  path.points.reserve(path.steps + 1);

  const double phi = path.arc.turn;
  const double c = dot(path.arc.axis, path.arc.start.vec());
  for (int j = 0; j <= path.steps; ++j) {
    const double s = static_cast<double>(j) / path.steps;
    Tsrvc pt;
    pt.start = evaluate(path.arc, s);

    // forward transport of the source field to beta(s)
    kernels::VectorField fwd;
    kernels::rotate_batch(transport_matrix_along_arc(path.arc, s), a.field, fwd);

    // backward transport of the target field from beta(1) to beta(s):
    // inverse of the sub-arc transport covering the remaining swing.
    const double rest = (1.0 - s) * phi;
    Mat3 back = Mat3::identity();
    if (!path.arc.is_zero()) {
      const Mat3 frame = rotation_about(path.arc.axis, rest);
      const Mat3 comp = rotation_about(evaluate(path.arc, 1.0).vec(), -rest * c);
      back = (comp * frame).transposed();
    }
    kernels::VectorField bwd;
    kernels::rotate_batch(back, b.field, bwd);

    kernels::mix(fwd, bwd, s, pt.field);
    path.points.push_back(std::move(pt));
  }
  return path;
}

GeodesicPath geodesic_path(const Curve& p0, const Curve& p, double theta, int steps) {
  return geodesic_path(to_tsrvc(p0), to_tsrvc(p), theta, steps);
}

double dist_bundle(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts) {
  return std::sqrt(std::max(0.0, optimal_theta(a, b, opts).dist_sq));
}

double dist_bundle(const Curve& p0, const Curve& p, const OptimizerOptions& opts) {
  return dist_bundle(to_tsrvc(p0), to_tsrvc(p), opts);
}

TangentElement inverse_exp(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts) {
  const ThetaResult tr = optimal_theta(a, b, opts);
  const CircularArc arc = arc_between(a.start, b.start, tr.theta);
  TangentElement v;
  v.u = arc_velocity(arc, 0.0);
  const Mat3 back = transport_matrix_along_arc(arc, 1.0).transposed();
  kernels::rotate_batch(back, b.field, v.w);
  kernels::accumulate_scaled(a.field, -1.0, v.w);
  return v;
}

TangentElement inverse_exp(const Curve& p0, const Curve& p, const OptimizerOptions& opts) {
  return inverse_exp(to_tsrvc(p0), to_tsrvc(p), opts);
}

namespace {

/// Candidate endpoint reached along the direction-family arc at vartheta.
Tsrvc exp_candidate(const Tsrvc& a, const TangentElement& v, double vartheta) {
  const CircularArc arc = arc_from_direction(a.start, v.u, vartheta);
  Tsrvc out;
  out.start = evaluate(arc, 1.0);
  kernels::VectorField total = a.field;
  kernels::accumulate_scaled(v.w, 1.0, total);
  kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), total, out.field);
  return out;
}

/// Optimality gap of the candidate at vartheta: the constructed path always
/// has energy |u|^2 + int |w|^2, and that value is attainable as the pair's
/// squared distance exactly when the constructed arc is the optimal one.
/// The gap is nonnegative and vanishes at the sought vartheta.
double exp_gap(const Tsrvc& a, const TangentElement& v, double vartheta,
               double target_sq, const OptimizerOptions& opts) {
  const Tsrvc cand = exp_candidate(a, v, vartheta);
  OptimizerOptions inner = opts;
  inner.theta0 = theta_from_vartheta(a.start, cand.start, vartheta);
  const ThetaResult tr = optimal_theta(a, cand, inner);
  return target_sq - tr.dist_sq;
}

}  // namespace

Tsrvc exp_map_tsrvc(const Tsrvc& a, const TangentElement& v, const OptimizerOptions& opts) {
  check_same_grid(a.size(), v.size(), "exp_map");
  const double speed = v.u.length();
  if (speed > M_PI) throw SpeedTooLarge("exp_map: |u| exceeds pi");
  if (speed < tol::kZeroSpeed) {
    Tsrvc out;
    out.start = a.start;
    out.field = a.field;
    kernels::accumulate_scaled(v.w, 1.0, out.field);
    return out;
  }

  const double margin = tol::kDomainMargin;
  const double lo = std::asin(std::min(1.0, speed / M_PI)) + margin;
  const double hi = M_PI - std::asin(std::min(1.0, speed / M_PI)) - margin;
  const auto w = kernels::trapezoid_weights(a.size());
  const double target_sq =
      speed * speed + kernels::active().weighted_dot(v.w, v.w, w.data(), w.size());

  // Coarse scan, then backtracking descent with a finite-difference slope.
  const int scan = 25;
  double best_t = M_PI / 2, best_g = exp_gap(a, v, M_PI / 2, target_sq, opts);
  for (int i = 0; i < scan; ++i) {
    const double t = lo + (hi - lo) * (i + 0.5) / scan;
    const double g = exp_gap(a, v, t, target_sq, opts);
    if (g < best_g) {
      best_g = g;
      best_t = t;
    }
  }

  double lambda = opts.step;
  const double h = 1e-6;
  for (int it = 0; it < opts.max_iter && best_g > 1e-12; ++it) {
    const double tp = std::min(best_t + h, hi), tm = std::max(best_t - h, lo);
    const double slope =
        (exp_gap(a, v, tp, target_sq, opts) - exp_gap(a, v, tm, target_sq, opts)) /
        (tp - tm);
    if (std::abs(slope) < opts.tol || lambda < tol::kStepFloor) break;
    const double cand = std::clamp(best_t - lambda * slope, lo, hi);
    const double g = exp_gap(a, v, cand, target_sq, opts);
    if (g < best_g) {
      best_g = g;
      best_t = cand;
    } else {
      lambda *= 0.5;
    }
  }

  // The gap is locally a shallow parabola; successive parabolic fits pin
  // the vertex far more precisely than the slope threshold can.
  double delta = 0.02;
  for (int round = 0; round < 8 && best_g > 1e-14; ++round) {
    const double tl = std::max(best_t - delta, lo), tr = std::min(best_t + delta, hi);
    const double gl = exp_gap(a, v, tl, target_sq, opts);
    const double gr = exp_gap(a, v, tr, target_sq, opts);
    const double denom = (tl - best_t) * (gr - best_g) - (tr - best_t) * (gl - best_g);
    if (std::abs(denom) > 1e-300) {
      const double num = (tl - best_t) * (tl - best_t) * (gr - best_g) -
                         (tr - best_t) * (tr - best_t) * (gl - best_g);
      const double vertex = std::clamp(best_t - 0.5 * num / denom, lo, hi);
      const double gv = exp_gap(a, v, vertex, target_sq, opts);
      if (gv < best_g) {
        best_g = gv;
        best_t = vertex;
      }
    }
    if (gl < best_g) {
      best_g = gl;
      best_t = tl;
    }
    if (gr < best_g) {
      best_g = gr;
      best_t = tr;
    }
    delta *= 0.35;
  }
  return exp_candidate(a, v, best_t);
}

Curve exp_map(const Curve& p0, const TangentElement& v, const OptimizerOptions& opts) {
  return from_tsrvc(exp_map_tsrvc(to_tsrvc(p0), v, opts));
}

Mat3 chained_transport_matrix(const CircularArc& arc, int n_segments) {
  Mat3 m = Mat3::identity();
  if (arc.is_zero()) return m;
  SpherePoint prev = evaluate(arc, 0.0);
  for (int j = 1; j <= n_segments; ++j) {
    const SpherePoint next = evaluate(arc, static_cast<double>(j) / n_segments);
    m = transport_geodesic_matrix(prev, next) * m;
    prev = next;
  }
  return m;
}

double chained_arc_length(const CircularArc& arc, int n_segments) {
  if (arc.is_zero()) return 0.0;
  double len = 0.0;
  SpherePoint prev = evaluate(arc, 0.0);
  for (int j = 1; j <= n_segments; ++j) {
    const SpherePoint next = evaluate(arc, static_cast<double>(j) / n_segments);
    len += std::acos(std::clamp(dot(prev, next), -1.0, 1.0));
    prev = next;
  }
  return len;
}

double baseline_dist(const Tsrvc& a, const Tsrvc& b, const BaselineParams& params) {
  check_same_grid(a.size(), b.size(), "baseline_dist");
  const auto w = kernels::trapezoid_weights(a.size());
  double best = std::numeric_limits<double>::infinity();
  kernels::VectorField moved;
  for (int i = 0; i < params.n_angles; ++i) {
    const double theta =
        -M_PI / 2 + M_PI * (i + 0.5) / static_cast<double>(params.n_angles);
    const CircularArc arc = arc_between(a.start, b.start, theta);
    const double len = chained_arc_length(arc, params.n_segments);
    kernels::rotate_batch(chained_transport_matrix(arc, params.n_segments), a.field, moved);
    const double d2 =
        len * len + kernels::active().weighted_sqdiff(moved, b.field, w.data(), w.size());
    best = std::min(best, d2);
  }
  return best;
}

double baseline_dist(const Curve& p0, const Curve& p, const BaselineParams& params) {
  return baseline_dist(to_tsrvc(p0), to_tsrvc(p), params);
}

}  // namespace spherefda
