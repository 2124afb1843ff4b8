// AVX2 variants of the field kernels. This translation unit is the only
// one compiled with -mavx2; callers reach it through the dispatch table.

#include "spherefda/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace spherefda::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void rotate_batch_avx2(const Mat3& m, const VectorField& in, VectorField& out) {
  const std::size_t n = in.size();
  if (out.size() != n) out.resize(n);
  const __m256d m00 = _mm256_set1_pd(m.m[0][0]), m01 = _mm256_set1_pd(m.m[0][1]),
                m02 = _mm256_set1_pd(m.m[0][2]);
  const __m256d m10 = _mm256_set1_pd(m.m[1][0]), m11 = _mm256_set1_pd(m.m[1][1]),
                m12 = _mm256_set1_pd(m.m[1][2]);
  const __m256d m20 = _mm256_set1_pd(m.m[2][0]), m21 = _mm256_set1_pd(m.m[2][1]),
                m22 = _mm256_set1_pd(m.m[2][2]);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x = _mm256_loadu_pd(&in.x[k]);
    const __m256d y = _mm256_loadu_pd(&in.y[k]);
    const __m256d z = _mm256_loadu_pd(&in.z[k]);
    _mm256_storeu_pd(&out.x[k],
                     _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(m00, x), _mm256_mul_pd(m01, y)),
                                   _mm256_mul_pd(m02, z)));
    _mm256_storeu_pd(&out.y[k],
                     _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(m10, x), _mm256_mul_pd(m11, y)),
                                   _mm256_mul_pd(m12, z)));
    _mm256_storeu_pd(&out.z[k],
                     _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(m20, x), _mm256_mul_pd(m21, y)),
                                   _mm256_mul_pd(m22, z)));
  }
  for (; k < n; ++k) {
    const double x = in.x[k], y = in.y[k], z = in.z[k];
    out.x[k] = m.m[0][0] * x + m.m[0][1] * y + m.m[0][2] * z;
    out.y[k] = m.m[1][0] * x + m.m[1][1] * y + m.m[1][2] * z;
    out.z[k] = m.m[2][0] * x + m.m[2][1] * y + m.m[2][2] * z;
  }
}

double weighted_sqdiff_avx2(const VectorField& a, const VectorField& b,
                            const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(&a.x[k]), _mm256_loadu_pd(&b.x[k]));
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(&a.y[k]), _mm256_loadu_pd(&b.y[k]));
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(&a.z[k]), _mm256_loadu_pd(&b.z[k]));
    const __m256d ss = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(&w[k]), ss));
  }
  double tail = 0.0;
  for (; k < n; ++k) {
    const double dx = a.x[k] - b.x[k], dy = a.y[k] - b.y[k], dz = a.z[k] - b.z[k];
    tail += w[k] * (dx * dx + dy * dy + dz * dz);
  }
  return hsum(acc) + tail;
}

double weighted_dot_avx2(const VectorField& a, const VectorField& b,
                         const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d px = _mm256_mul_pd(_mm256_loadu_pd(&a.x[k]), _mm256_loadu_pd(&b.x[k]));
    const __m256d py = _mm256_mul_pd(_mm256_loadu_pd(&a.y[k]), _mm256_loadu_pd(&b.y[k]));
    const __m256d pz = _mm256_mul_pd(_mm256_loadu_pd(&a.z[k]), _mm256_loadu_pd(&b.z[k]));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(&w[k]),
                                           _mm256_add_pd(_mm256_add_pd(px, py), pz)));
  }
  double tail = 0.0;
  for (; k < n; ++k)
    tail += w[k] * (a.x[k] * b.x[k] + a.y[k] * b.y[k] + a.z[k] * b.z[k]);
  return hsum(acc) + tail;
}

void mix_avx2(const VectorField& a, const VectorField& b, double s, VectorField& out) {
  const std::size_t n = a.size();
  if (out.size() != n) out.resize(n);
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vr = _mm256_set1_pd(1.0 - s);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(&out.x[k], _mm256_add_pd(_mm256_mul_pd(vr, _mm256_loadu_pd(&a.x[k])),
                                              _mm256_mul_pd(vs, _mm256_loadu_pd(&b.x[k]))));
    _mm256_storeu_pd(&out.y[k], _mm256_add_pd(_mm256_mul_pd(vr, _mm256_loadu_pd(&a.y[k])),
                                              _mm256_mul_pd(vs, _mm256_loadu_pd(&b.y[k]))));
    _mm256_storeu_pd(&out.z[k], _mm256_add_pd(_mm256_mul_pd(vr, _mm256_loadu_pd(&a.z[k])),
                                              _mm256_mul_pd(vs, _mm256_loadu_pd(&b.z[k]))));
  }
  const double r = 1.0 - s;
  for (; k < n; ++k) {
    out.x[k] = r * a.x[k] + s * b.x[k];
    out.y[k] = r * a.y[k] + s * b.y[k];
    out.z[k] = r * a.z[k] + s * b.z[k];
  }
}

void accumulate_scaled_avx2(const VectorField& in, double c, VectorField& out) {
  const std::size_t n = in.size();
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(&out.x[k], _mm256_add_pd(_mm256_loadu_pd(&out.x[k]),
                                              _mm256_mul_pd(vc, _mm256_loadu_pd(&in.x[k]))));
    _mm256_storeu_pd(&out.y[k], _mm256_add_pd(_mm256_loadu_pd(&out.y[k]),
                                              _mm256_mul_pd(vc, _mm256_loadu_pd(&in.y[k]))));
    _mm256_storeu_pd(&out.z[k], _mm256_add_pd(_mm256_loadu_pd(&out.z[k]),
                                              _mm256_mul_pd(vc, _mm256_loadu_pd(&in.z[k]))));
  }
  for (; k < n; ++k) {
    out.x[k] += c * in.x[k];
    out.y[k] += c * in.y[k];
    out.z[k] += c * in.z[k];
  }
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend b{"avx2", rotate_batch_avx2, weighted_sqdiff_avx2,
                         weighted_dot_avx2, mix_avx2, accumulate_scaled_avx2};
  return b;
}

}  // namespace spherefda::kernels

#else

namespace spherefda::kernels {

const Backend& avx2_backend() { return scalar_backend(); }

}  // namespace spherefda::kernels

#endif
