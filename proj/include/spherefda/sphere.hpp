#pragma once

#include <array>
#include <optional>

#include "spherefda/config.hpp"
#include "spherefda/errors.hpp"
#include "spherefda/vec3.hpp"

namespace spherefda {

/// Point on the unit 2-sphere. Renormalized on construction.
class SpherePoint {
 public:
  SpherePoint() : v_(1, 0, 0) {}
  explicit SpherePoint(const Vec3& v) : v_(normalized(v)) {}
  SpherePoint(double x, double y, double z) : SpherePoint(Vec3{x, y, z}) {}

  const Vec3& vec() const { return v_; }

 private:
  Vec3 v_;
};

inline double dot(const SpherePoint& a, const SpherePoint& b) {
  return dot(a.vec(), b.vec());
}

/// Tangent vector at a base point; the normal component is projected out
/// on construction.
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(const SpherePoint& base, const Vec3& v)
      : base_(base), v_(v - base.vec() * dot(v, base.vec())) {}

  const SpherePoint& base() const { return base_; }
  const Vec3& vec() const { return v_; }
  double length() const { return norm(v_); }

 private:
  SpherePoint base_;
  Vec3 v_;
};

/// Circular arc on the sphere: the trace of rotating `start` about the
/// unit `axis` by `turn` radians. `turn` is in (0, pi] except for the
/// sanctioned zero-length degenerate arc.
struct CircularArc {
  SpherePoint start;
  Vec3 axis{0, 0, 1};
  double turn = 0.0;
  std::optional<double> theta;     // plane angle against start x end
  std::optional<double> vartheta;  // plane angle against the start point
  bool degenerate_fixup = false;   // endpoints were nudged apart or collapsed

  static CircularArc zero(const SpherePoint& x0) {
    CircularArc a;
    a.start = x0;
    a.axis = x0.vec();
    a.turn = 0.0;
    a.degenerate_fixup = true;
    return a;
  }

  bool is_zero() const { return turn == 0.0; }
};

SpherePoint exp_sphere(const SpherePoint& x, const TangentVector& v);
TangentVector log_sphere(const SpherePoint& x, const SpherePoint& y);

/// Arc through x0 and x whose plane normal makes angle theta with
/// x0 x x inside the (x0 + x, x0 x x) plane. Throws DegenerateEndpoints
/// when the pair is coincident or antipodal.
CircularArc arc_from_theta(const SpherePoint& x0, const SpherePoint& x, double theta);

/// arc_from_theta with the degenerate-pair rules applied: coincident
/// endpoints give the zero arc, antipodal endpoints are nudged by a fixed
/// 1e-8 perturbation and the result is flagged.
CircularArc arc_between(const SpherePoint& x0, const SpherePoint& x, double theta);

/// Arc leaving x0 with initial velocity u; vartheta in
/// (asin(|u|/pi), pi - asin(|u|/pi)) selects the plane, turn = |u|/sin(vartheta).
CircularArc arc_from_direction(const SpherePoint& x0, const TangentVector& u,
                               double vartheta);

SpherePoint evaluate(const CircularArc& arc, double s);
TangentVector arc_velocity(const CircularArc& arc, double s);
double arc_length(const CircularArc& arc);

/// Parallel transport along the arc from evaluate(arc, 0) to evaluate(arc, s):
/// rotation about the axis by s*turn composed with the in-plane holonomy
/// compensation by -s*turn*<axis, start>.
TangentVector transport_along_arc(const CircularArc& arc, const TangentVector& v, double s);

/// Same transport as a 3x3 rotation matrix (applies to whole fields).
Mat3 transport_matrix_along_arc(const CircularArc& arc, double s);

/// Parallel transport along the minimizing great circle from x to y.
TangentVector transport_geodesic(const SpherePoint& x, const SpherePoint& y,
                                 const TangentVector& v);
Mat3 transport_geodesic_matrix(const SpherePoint& x, const SpherePoint& y);

/// Deterministic orthonormal basis of the tangent plane at x.
std::array<TangentVector, 2> tangent_basis(const SpherePoint& x);

/// Plane angle of the theta-family matching a direction-family arc with
/// the given vartheta, for endpoints x0 and x.
double theta_from_vartheta(const SpherePoint& x0, const SpherePoint& x, double vartheta);

}  // namespace spherefda
