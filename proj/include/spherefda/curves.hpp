#pragma once

#include <vector>

#include "spherefda/kernels.hpp"
#include "spherefda/sphere.hpp"

namespace spherefda {

/// Sampled trajectory on the sphere over the uniform grid t_k = k/(T-1).
struct Curve {
  std::vector<Vec3> pts;

  Curve() = default;
  explicit Curve(std::vector<Vec3> p) : pts(std::move(p)) {
    for (auto& v : pts) v = normalized(v);
  }

  std::size_t size() const { return pts.size(); }
  SpherePoint point(std::size_t k) const { return SpherePoint(pts[k]); }
  SpherePoint start() const { return SpherePoint(pts.front()); }
};

/// Start point plus the square-root velocity field transported to the
/// start's tangent plane, sampled on the same grid as the curve.
struct Tsrvc {
  SpherePoint start;
  kernels::VectorField field;

  std::size_t size() const { return field.size(); }
};

/// Boundary-preserving non-decreasing reparameterization of [0,1],
/// sampled on the uniform grid.
struct WarpingFunction {
  std::vector<double> values;

  static WarpingFunction identity(std::size_t n);
  std::size_t size() const { return values.size(); }
  bool valid(double slack = 1e-9) const;
};

/// Numerical inverse of a monotone warping function on the same grid.
WarpingFunction invert_warp(const WarpingFunction& g);

/// Spherical linear interpolation between unit vectors.
Vec3 slerp(const Vec3& a, const Vec3& b, double t);

/// Evaluate a curve at fractional time in [0,1] by slerp between samples.
Vec3 curve_at(const Curve& p, double t);

Tsrvc to_tsrvc(const Curve& p);
Curve from_tsrvc(const Tsrvc& r);

Curve warp_curve(const Curve& p, const WarpingFunction& g);
Tsrvc warp_tsrvc(const Tsrvc& r, const WarpingFunction& g);

Curve resample_uniform(const Curve& p, std::size_t t_new);

/// Linear interpolation of a tangent field at fractional grid position.
Vec3 field_at(const kernels::VectorField& f, double pos);

}  // namespace spherefda
