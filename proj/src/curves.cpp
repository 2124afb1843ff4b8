#include "spherefda/curves.hpp"

#include <algorithm>
#include <cmath>

namespace spherefda {

WarpingFunction WarpingFunction::identity(std::size_t n) {
  WarpingFunction g;
  g.values.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    g.values[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

bool WarpingFunction::valid(double slack) const {
  if (values.size() < 2) return false;
  if (std::abs(values.front()) > slack || std::abs(values.back() - 1.0) > slack)
    return false;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] < values[k - 1] - slack) return false;
  return true;
}

WarpingFunction invert_warp(const WarpingFunction& g) {
  const std::size_t n = g.size();
  WarpingFunction inv;
  inv.values.resize(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n - 1);
    while (j + 1 < n && g.values[j + 1] < t) ++j;
    const double a = g.values[j], b = g.values[std::min(j + 1, n - 1)];
    const double frac = (b > a) ? (t - a) / (b - a) : 0.0;
    inv.values[k] =
        (static_cast<double>(j) + std::clamp(frac, 0.0, 1.0)) / static_cast<double>(n - 1);
  }
  inv.values.front() = 0.0;
  inv.values.back() = 1.0;
  return inv;
}

Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  const double c = std::clamp(dot(a, b), -1.0, 1.0);
  const double ang = std::acos(c);
  if (ang < 1e-12) return normalized(a * (1.0 - t) + b * t);
  const double s = std::sin(ang);
  return normalized(a * (std::sin((1.0 - t) * ang) / s) + b * (std::sin(t * ang) / s));
}

Vec3 curve_at(const Curve& p, double t) {
  const std::size_t n = p.size();
  const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return p.pts.back();
  return slerp(p.pts[lo], p.pts[lo + 1], pos - static_cast<double>(lo));
}

Vec3 field_at(const kernels::VectorField& f, double pos) {
  const std::size_t n = f.size();
  const double c = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  const auto lo = static_cast<std::size_t>(c);
  if (lo + 1 >= n) return f.get(n - 1);
  const double frac = c - static_cast<double>(lo);
  return f.get(lo) * (1.0 - frac) + f.get(lo + 1) * frac;
}

Tsrvc to_tsrvc(const Curve& p) {
  const std::size_t n = p.size();
  if (n < 3) throw TooFewSamples("to_tsrvc: need at least 3 samples");
  const double dt = 1.0 / static_cast<double>(n - 1);

  Tsrvc r;
  r.start = p.start();
  r.field.resize(n);

  Mat3 to_start = Mat3::identity();  // transport p_k -> p_0 accumulated
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0)
      to_start = to_start * transport_geodesic_matrix(p.point(k), p.point(k - 1));
    Vec3 d;
    if (k == 0)
      d = (p.pts[1] - p.pts[0]) * (1.0 / dt);
    else if (k == n - 1)
      d = (p.pts[k] - p.pts[k - 1]) * (1.0 / dt);
    else
      d = (p.pts[k + 1] - p.pts[k - 1]) * (0.5 / dt);
    d -= p.pts[k] * dot(d, p.pts[k]);
    const double nd = norm(d);
    if (nd < tol::kZeroDerivative) {
      r.field.set(k, Vec3{0, 0, 0});
    } else {
      r.field.set(k, to_start * (d * (1.0 / std::sqrt(nd))));
    }
  }
  return r;
}

Curve from_tsrvc(const Tsrvc& r) {
  const std::size_t n = r.size();
  std::vector<Vec3> pts;
  pts.reserve(n);
  pts.push_back(r.start.vec());
  const double dt = 1.0 / static_cast<double>(n - 1);

  Mat3 from_start = Mat3::identity();  // transport p_0 -> p_k accumulated
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec3 q = r.field.get(k);
    const double nq = norm(q);
    const SpherePoint here(pts.back());
    SpherePoint next = here;
    if (nq >= tol::kZeroVector) {
      const Vec3 vel = (from_start * q) * nq;  // |pdot| = |q|^2
      next = exp_sphere(here, TangentVector(here, vel * dt));
      from_start = transport_geodesic_matrix(here, next) * from_start;
    }
    pts.push_back(next.vec());
  }
  return Curve(std::move(pts));
}

Curve warp_curve(const Curve& p, const WarpingFunction& g) {
  if (g.size() != p.size()) throw GridMismatch("warp_curve: grid sizes differ");
  std::vector<Vec3> pts(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) pts[k] = curve_at(p, g.values[k]);
  return Curve(std::move(pts));
}

Tsrvc warp_tsrvc(const Tsrvc& r, const WarpingFunction& g) {
  const std::size_t n = r.size();
  if (g.size() != n) throw GridMismatch("warp_tsrvc: grid sizes differ");
  const double dt = 1.0 / static_cast<double>(n - 1);
  Tsrvc out;
  out.start = r.start;
  out.field.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double gdot;
    if (k == 0)
      gdot = (g.values[1] - g.values[0]) / dt;
    else if (k == n - 1)
      gdot = (g.values[k] - g.values[k - 1]) / dt;
    else
      gdot = (g.values[k + 1] - g.values[k - 1]) / (2.0 * dt);
    gdot = std::max(0.0, gdot);
    const Vec3 q = field_at(r.field, g.values[k] * static_cast<double>(n - 1));
    out.field.set(k, q * std::sqrt(gdot));
  }
  return out;
}

Curve resample_uniform(const Curve& p, std::size_t t_new) {
  if (t_new < 2) throw TooFewSamples("resample_uniform: need at least 2 samples");
  if (t_new == p.size()) return p;
  std::vector<Vec3> pts(t_new);
  for (std::size_t k = 0; k < t_new; ++k)
    pts[k] = curve_at(p, static_cast<double>(k) / static_cast<double>(t_new - 1));
  pts.front() = p.pts.front();
  pts.back() = p.pts.back();
  return Curve(std::move(pts));
}

}  // namespace spherefda
