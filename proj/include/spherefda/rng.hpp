#pragma once

#include <cmath>
#include <cstdint>

namespace spherefda {

/// SplitMix64. Used both as a generator and to derive independent
/// per-(seed, index) streams so samples can be produced in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for item `index` of the stream named `tag`.
  static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    Rng r(seed);
    r.state_ ^= 0x9e3779b97f4a7c15ull * (tag + 1);
    r.next_u64();
    r.state_ ^= 0xbf58476d1ce4e5b9ull * (index + 1);
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no library distribution, so the
  /// stream is identical across standard libraries).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spherefda
