#include "spherefda/kernels.hpp"

namespace spherefda::kernels {

namespace {

void rotate_batch_scalar(const Mat3& m, const VectorField& in, VectorField& out) {
  const std::size_t n = in.size();
  if (out.size() != n) out.resize(n);
  const double m00 = m.m[0][0], m01 = m.m[0][1], m02 = m.m[0][2];
  const double m10 = m.m[1][0], m11 = m.m[1][1], m12 = m.m[1][2];
  const double m20 = m.m[2][0], m21 = m.m[2][1], m22 = m.m[2][2];
  for (std::size_t k = 0; k < n; ++k) {
    const double x = in.x[k], y = in.y[k], z = in.z[k];
    out.x[k] = m00 * x + m01 * y + m02 * z;
    out.y[k] = m10 * x + m11 * y + m12 * z;
    out.z[k] = m20 * x + m21 * y + m22 * z;
  }
}

double weighted_sqdiff_scalar(const VectorField& a, const VectorField& b,
                              const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = a.x[k] - b.x[k];
    const double dy = a.y[k] - b.y[k];
    const double dz = a.z[k] - b.z[k];
    acc += w[k] * (dx * dx + dy * dy + dz * dz);
  }
  return acc;
}

double weighted_dot_scalar(const VectorField& a, const VectorField& b,
                           const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    acc += w[k] * (a.x[k] * b.x[k] + a.y[k] * b.y[k] + a.z[k] * b.z[k]);
  return acc;
}

void mix_scalar(const VectorField& a, const VectorField& b, double s, VectorField& out) {
  const std::size_t n = a.size();
  if (out.size() != n) out.resize(n);
  const double r = 1.0 - s;
  for (std::size_t k = 0; k < n; ++k) {
    out.x[k] = r * a.x[k] + s * b.x[k];
    out.y[k] = r * a.y[k] + s * b.y[k];
    out.z[k] = r * a.z[k] + s * b.z[k];
  }
}

void accumulate_scaled_scalar(const VectorField& in, double c, VectorField& out) {
  const std::size_t n = in.size();
  for (std::size_t k = 0; k < n; ++k) {
    out.x[k] += c * in.x[k];
    out.y[k] += c * in.y[k];
    out.z[k] += c * in.z[k];
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{"scalar", rotate_batch_scalar, weighted_sqdiff_scalar,
                         weighted_dot_scalar, mix_scalar, accumulate_scaled_scalar};
  return b;
}

}  // namespace spherefda::kernels
