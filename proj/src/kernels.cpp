#include "spherefda/kernels.hpp"

#include <cstdlib>

namespace spherefda::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

const Backend* pick_default() {
  if (const char* force = std::getenv("SPHEREFDA_FORCE_SCALAR");
      force && force[0] == '1')
    return &scalar_backend();
  if (avx2_supported()) return &avx2_backend();
  return &scalar_backend();
}

const Backend*& active_slot() {
  static const Backend* slot = pick_default();
  return slot;
}

}  // namespace

const Backend& active() { return *active_slot(); }

const Backend& set_active(const Backend& b) {
  const Backend* prev = active_slot();
  active_slot() = &b;
  return *prev;
}

std::vector<double> trapezoid_weights(std::size_t n) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  const double dt = 1.0 / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) w[k] = dt;
  w.front() = 0.5 * dt;
  w.back() = 0.5 * dt;
  return w;
}

}  // namespace spherefda::kernels
