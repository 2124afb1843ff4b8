#include "spherefda/sphere.hpp"

#include <algorithm>
#include <cmath>

namespace spherefda {

SpherePoint exp_sphere(const SpherePoint& x, const TangentVector& v) {
  const double nv = v.length();
  if (nv < tol::kZeroVector) return x;
  return SpherePoint(x.vec() * std::cos(nv) + v.vec() * (std::sin(nv) / nv));
}

TangentVector log_sphere(const SpherePoint& x, const SpherePoint& y) {
  const double c = std::clamp(dot(x, y), -1.0, 1.0);
  if (c <= -1.0 + tol::kAntipodal)
    throw AntipodalPoints("log_sphere: points are antipodal");
  const Vec3 w = y.vec() - x.vec() * c;
  const double nw = norm(w);
  if (nw < tol::kZeroVector) return TangentVector(x, Vec3{0, 0, 0});
  return TangentVector(x, w * (std::acos(c) / nw));
}

CircularArc arc_from_theta(const SpherePoint& x0, const SpherePoint& x, double theta) {
  const Vec3 cr = cross(x0.vec(), x.vec());
  const double ncr = norm(cr);
  if (ncr < tol::kDegenerateCross)
    throw DegenerateEndpoints("arc_from_theta: coincident or antipodal endpoints");
  const Vec3 mid = normalized(x0.vec() + x.vec());
  const Vec3 n = mid * std::sin(theta) + cr * (std::cos(theta) / ncr);
  const double c = std::clamp(dot(x0, x), -1.0, 1.0);
  const double ndot = dot(n, x0.vec());
  const double arg =
      0.5 * std::sqrt(std::max(0.0, (2.0 - 2.0 * c) / std::max(1e-300, 1.0 - ndot * ndot)));
  CircularArc arc;
  arc.start = x0;
  arc.axis = normalized(n);
  arc.turn = 2.0 * std::asin(std::min(1.0, arg));
  arc.theta = theta;
  return arc;
}

CircularArc arc_between(const SpherePoint& x0, const SpherePoint& x, double theta) {
  const double c = dot(x0, x);
  const double ncr = norm(cross(x0.vec(), x.vec()));
  if (ncr >= tol::kDegenerateCross) return arc_from_theta(x0, x, theta);
  if (c > 0.0) return CircularArc::zero(x0);
  // Antipodal: nudge the far endpoint toward a fixed orthogonal direction.
  const auto basis = tangent_basis(x0);
  const SpherePoint x_nudged(x.vec() + basis[0].vec() * tol::kAntipodalNudge);
  CircularArc arc = arc_from_theta(x0, x_nudged, theta);
  arc.degenerate_fixup = true;
  return arc;
}

CircularArc arc_from_direction(const SpherePoint& x0, const TangentVector& u,
                               double vartheta) {
  const double speed = u.length();
  if (speed < tol::kZeroSpeed)
    throw ZeroVelocity("arc_from_direction: zero initial velocity");
  const double lo = std::asin(std::min(1.0, speed / M_PI));
  if (!(vartheta > lo && vartheta < M_PI - lo))
    throw OutOfDomain("arc_from_direction: vartheta outside the admissible interval");
  const Vec3 cu = cross(x0.vec(), u.vec());
  CircularArc arc;
  arc.start = x0;
  arc.axis =
      normalized(x0.vec() * std::cos(vartheta) + cu * (std::sin(vartheta) / norm(cu)));
  arc.turn = speed / std::sin(vartheta);
  arc.vartheta = vartheta;
  return arc;
}

SpherePoint evaluate(const CircularArc& arc, double s) {
  if (arc.is_zero()) return arc.start;
  return SpherePoint(rotate_about(arc.axis, s * arc.turn, arc.start.vec()));
}

TangentVector arc_velocity(const CircularArc& arc, double s) {
  if (arc.is_zero()) return TangentVector(arc.start, Vec3{0, 0, 0});
  const SpherePoint p = evaluate(arc, s);
  return TangentVector(p, cross(arc.axis, p.vec()) * arc.turn);
}

double arc_length(const CircularArc& arc) {
  if (arc.is_zero()) return 0.0;
  const double c = dot(arc.axis, arc.start.vec());
  return arc.turn * std::sqrt(std::max(0.0, 1.0 - c * c));
}

Mat3 transport_matrix_along_arc(const CircularArc& arc, double s) {
  if (arc.is_zero()) return Mat3::identity();
  const double swing = s * arc.turn;
  const SpherePoint end = evaluate(arc, s);
  const Mat3 frame = rotation_about(arc.axis, swing);
  const Mat3 comp =
      rotation_about(end.vec(), -swing * dot(arc.axis, arc.start.vec()));
  return comp * frame;
}

TangentVector transport_along_arc(const CircularArc& arc, const TangentVector& v,
                                  double s) {
  const Mat3 m = transport_matrix_along_arc(arc, s);
  return TangentVector(evaluate(arc, s), m * v.vec());
}

Mat3 transport_geodesic_matrix(const SpherePoint& x, const SpherePoint& y) {
  const double c = std::clamp(dot(x, y), -1.0, 1.0);
  if (c <= -1.0 + tol::kAntipodal)
    throw AntipodalPoints("transport_geodesic: points are antipodal");
  const Vec3 cr = cross(x.vec(), y.vec());
  const double ncr = norm(cr);
  if (ncr < tol::kZeroVector) return Mat3::identity();
  return rotation_about(cr * (1.0 / ncr), std::acos(c));
}

TangentVector transport_geodesic(const SpherePoint& x, const SpherePoint& y,
                                 const TangentVector& v) {
  return TangentVector(y, transport_geodesic_matrix(x, y) * v.vec());
}

std::array<TangentVector, 2> tangent_basis(const SpherePoint& x) {
  Vec3 seed{1, 0, 0};
  Vec3 e1 = seed - x.vec() * dot(seed, x.vec());
  if (norm(e1) < 1e-6) {
    seed = Vec3{0, 1, 0};
    e1 = seed - x.vec() * dot(seed, x.vec());
  }
  e1 = normalized(e1);
  const Vec3 e2 = cross(x.vec(), e1);
  return {TangentVector(x, e1), TangentVector(x, e2)};
}

double theta_from_vartheta(const SpherePoint& x0, const SpherePoint& x, double vartheta) {
  const double c = std::clamp(dot(x0, x), -1.0, 1.0);
  const double arg = std::sqrt(2.0 / (1.0 + c)) * std::cos(vartheta);
  return std::asin(std::clamp(arg, -1.0, 1.0));
}

}  // namespace spherefda
