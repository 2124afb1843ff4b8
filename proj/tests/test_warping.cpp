#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "spherefda/warping.hpp"
#include "test_util.hpp"

using namespace spherefda;
using testutil::random_smooth_curve;
using testutil::random_warp;

namespace {

constexpr std::pair<int, int> kMoves[] = {{1, 1}, {1, 2}, {1, 3}, {2, 1},
                                          {3, 1}, {2, 3}, {3, 2}};

/// Exhaustive minimum over every monotone lattice path built from the same
/// move set, cost evaluated by the library's own segment rule.
double brute_force_min(const kernels::VectorField& q_src,
                       const kernels::VectorField& q_dst, int grid) {
  double best = 1e300;
  std::vector<std::pair<int, int>> nodes{{0, 0}};
  std::function<void(int, int)> walk = [&](int i, int j) {
    if (i == grid - 1 && j == grid - 1) {
      best = std::min(best, dp_path_cost(q_src, q_dst, nodes, grid));
      return;
    }
    for (const auto& [a, b] : kMoves) {
      if (i + a > grid - 1 || j + b > grid - 1) continue;
      nodes.emplace_back(i + a, j + b);
      walk(i + a, j + b);
      nodes.pop_back();
    }
  };
  walk(0, 0);
  return best;
}

kernels::VectorField random_field(Rng& rng, const SpherePoint& base, std::size_t t) {
  kernels::VectorField f(t);
  const auto basis = tangent_basis(base);
  for (std::size_t k = 0; k < t; ++k) {
    const double tt = static_cast<double>(k) / static_cast<double>(t - 1);
    f.set(k, basis[0].vec() * std::sin(2.0 * M_PI * tt + rng.uniform(0.0, 0.3)) +
                 basis[1].vec() * (0.5 * std::cos(M_PI * tt) + 0.1 * rng.normal()));
  }
  return f;
}

}  // namespace

TEST_CASE("dp_align on identical fields returns the identity warp") {
  Rng rng(51);
  const SpherePoint x(0, 0, 1);
  const kernels::VectorField f = random_field(rng, x, 40);
  const WarpingFunction g = dp_align(f, f, 40);
  CHECK(g.valid());
  for (std::size_t k = 0; k < g.size(); ++k)
    CHECK(std::abs(g.values[k] -
                   static_cast<double>(k) / static_cast<double>(g.size() - 1)) < 1e-12);
}

TEST_CASE("dp_align equals exhaustive enumeration on 10x10 grids") {
  Rng rng(52);
  const SpherePoint x(0, 0, 1);
  for (int trial = 0; trial < 6; ++trial) {
    const kernels::VectorField a = random_field(rng, x, 10);
    const kernels::VectorField b = random_field(rng, x, 10);
    const double dp_cost = dp_path_cost(a, b, dp_align_path(a, b, 10), 10);
    const double brute = brute_force_min(a, b, 10);
    CHECK(dp_cost == brute);  // same arithmetic, equality is exact
  }
}

TEST_CASE("dp_align recovers a lattice-representable warp") {
  Rng rng(53);
  const SpherePoint x(0, 0, 1);
  const std::size_t t = 101;
  const kernels::VectorField base = random_field(rng, x, t);

  // gamma0 made of lattice slopes 1/2, 2 and 2/3, integrating to 1
  WarpingFunction g0;
  g0.values.resize(t);
  for (std::size_t k = 0; k < t; ++k) {
    const double tt = static_cast<double>(k) / static_cast<double>(t - 1);
    double v;
    if (tt < 0.4) v = 0.5 * tt;
    else if (tt < 0.7) v = 0.2 + 2.0 * (tt - 0.4);
    else v = 0.8 + (2.0 / 3.0) * (tt - 0.7);
    g0.values[k] = std::clamp(v, 0.0, 1.0);
  }
  g0.values.back() = 1.0;

  // warp the field by g0, then ask DP to undo it
  Tsrvc src;
  src.start = x;
  src.field = base;
  const Tsrvc warped = warp_tsrvc(src, g0);
  const WarpingFunction rec = dp_align(base, warped.field, static_cast<int>(t));
  const double cell = 1.0 / static_cast<double>(t - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < t; ++k)
    worst = std::max(worst, std::abs(rec.values[k] - g0.values[k]));
  CHECK(worst <= 2.0 * cell + 1e-9);
}

TEST_CASE("amplitude_geodesic: same-orbit pairs collapse") {
  Rng rng(54);
  for (int trial = 0; trial < 3; ++trial) {
    const Curve p0 = random_smooth_curve(rng, 150, 0.35);
    const WarpingFunction g0 = random_warp(rng, 150, 0.35);
    const Curve p1 = warp_curve(p0, g0);

    const AlignmentResult ar = amplitude_geodesic(p0, p1, {});
    CHECK(ar.dist_sq <= 1e-3);

    // recovered warp tracks g0, i.e. composes with its inverse to identity
    double worst = 0.0;
    for (std::size_t k = 0; k < 150; ++k)
      worst = std::max(worst, std::abs(ar.gamma_star.values[k] - g0.values[k]));
    CHECK(worst <= 2.0 / 149.0 + 0.02);
  }
}

TEST_CASE("amplitude distance never exceeds the bundle distance") {
  Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const Curve p0 = random_smooth_curve(rng, 120, 0.5);
    const Curve p1 = random_smooth_curve(rng, 120, 0.5);
    const AlignmentResult ar = amplitude_geodesic(p0, p1, {});
    const double bundle = optimal_theta(to_tsrvc(p0), to_tsrvc(p1), {}).dist_sq;
    CHECK(ar.dist_sq <= bundle + 1e-8);
    // reported value matches its definition exactly
    const double direct =
        dist_beta_squared(warp_curve(p0, ar.gamma_star), p1, ar.theta_star);
    CHECK(ar.dist_sq == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("dist_amplitude is approximately symmetric") {
  Rng rng(56);
  for (int trial = 0; trial < 5; ++trial) {
    const Curve p0 = random_smooth_curve(rng, 120, 0.45);
    const Curve p1 = random_smooth_curve(rng, 120, 0.45);
    const double ab = dist_amplitude(p0, p1, {});
    const double ba = dist_amplitude(p1, p0, {});
    CHECK(std::abs(ab - ba) <= 5e-2);
  }
}

TEST_CASE("amplitude distance is invariant to independent warps") {
  Rng rng(57);
  for (int trial = 0; trial < 3; ++trial) {
    const Curve p0 = random_smooth_curve(rng, 200, 0.45);
    const Curve p1 = random_smooth_curve(rng, 200, 0.45);
    const double plain = dist_amplitude(p0, p1, {});
    const Curve w0 = warp_curve(p0, random_warp(rng, 200, 0.35));
    const Curve w1 = warp_curve(p1, random_warp(rng, 200, 0.35));
    const double warped = dist_amplitude(w0, w1, {});
    CHECK(std::abs(plain - warped) <= 5e-2);
  }
}

TEST_CASE("amplitude geodesic dominates the baseline comparator") {
  Rng rng(58);
  BaselineParams params{60, 120};
  int wins = 0, total = 0;
  double improvement = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    Curve p0 = random_smooth_curve(rng, 100, 0.5);
    Curve p1 = random_smooth_curve(rng, 100, 0.5);
    p0 = warp_curve(p0, random_warp(rng, 100, 0.3));
    p1 = warp_curve(p1, random_warp(rng, 100, 0.3));
    const double exact = amplitude_geodesic(p0, p1, {}).dist_sq;
    const double base = baseline_amplitude_dist_sq(p0, p1, params);
    ++total;
    if (exact <= base + 1e-6) ++wins;
    if (base > 0.0) improvement += 100.0 * (base - exact) / base;
  }
  CHECK(wins * 100 >= total * 90);
  CHECK(improvement > 0.0);
}
