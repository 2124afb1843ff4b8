#pragma once

#include <cstddef>
#include <vector>

#include "spherefda/vec3.hpp"

namespace spherefda::kernels {

/// Structure-of-arrays storage for a sampled field of 3-vectors.
/// The split layout keeps the hot loops (batch rotation, weighted
/// reductions) straight-line vectorizable.
struct VectorField {
  std::vector<double> x, y, z;

  VectorField() = default;
  explicit VectorField(std::size_t n) : x(n, 0.0), y(n, 0.0), z(n, 0.0) {}

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }

  Vec3 get(std::size_t k) const { return {x[k], y[k], z[k]}; }
  void set(std::size_t k, const Vec3& v) { x[k] = v.x; y[k] = v.y; z[k] = v.z; }

  void resize(std::size_t n) { x.assign(n, 0.0); y.assign(n, 0.0); z.assign(n, 0.0); }
};

/// One table per instruction set. All entries must produce the same
/// results as the scalar reference up to reassociation round-off.
struct Backend {
  const char* name;

  /// out[k] = m * in[k]
  void (*rotate_batch)(const Mat3& m, const VectorField& in, VectorField& out);

  /// sum_k w[k] * |a[k] - b[k]|^2
  double (*weighted_sqdiff)(const VectorField& a, const VectorField& b,
                            const double* w, std::size_t n);

  /// sum_k w[k] * <a[k], b[k]>
  double (*weighted_dot)(const VectorField& a, const VectorField& b,
                         const double* w, std::size_t n);

  /// out[k] = (1 - s) * a[k] + s * b[k]
  void (*mix)(const VectorField& a, const VectorField& b, double s, VectorField& out);

  /// out[k] += c * in[k]
  void (*accumulate_scaled)(const VectorField& in, double c, VectorField& out);
};

const Backend& scalar_backend();
bool avx2_supported();
const Backend& avx2_backend();  // valid only when avx2_supported()

/// Backend selected at startup (AVX2 when the CPU has it, scalar otherwise).
const Backend& active();

/// Override the active backend; returns the previous one. Used by the
/// equivalence tests and by the SPHEREFDA_FORCE_SCALAR=1 escape hatch.
const Backend& set_active(const Backend& b);

// Convenience wrappers through the active backend.

inline void rotate_batch(const Mat3& m, const VectorField& in, VectorField& out) {
  active().rotate_batch(m, in, out);
}

inline double weighted_sqdiff(const VectorField& a, const VectorField& b,
                              const std::vector<double>& w) {
  return active().weighted_sqdiff(a, b, w.data(), w.size());
}

inline double weighted_dot(const VectorField& a, const VectorField& b,
                           const std::vector<double>& w) {
  return active().weighted_dot(a, b, w.data(), w.size());
}

inline void mix(const VectorField& a, const VectorField& b, double s, VectorField& out) {
  active().mix(a, b, s, out);
}

inline void accumulate_scaled(const VectorField& in, double c, VectorField& out) {
  active().accumulate_scaled(in, c, out);
}

/// Trapezoid weights for the uniform grid on [0,1] with n samples.
std::vector<double> trapezoid_weights(std::size_t n);

}  // namespace spherefda::kernels
