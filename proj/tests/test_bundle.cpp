#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using namespace spherefda;
using testutil::random_point;
using testutil::random_smooth_curve;
using testutil::sup_distance;

namespace {

constexpr std::size_t kT = 120;

/// A pair whose field q is exactly the great-circle transport of q0: the
/// theta = 0 arc then makes the integral term vanish.
std::pair<Tsrvc, Tsrvc> transported_pair(Rng& rng) {
  const Curve p0 = random_smooth_curve(rng, kT, 0.5);
  Tsrvc a = to_tsrvc(p0);
  SpherePoint x = random_point(rng);
  while (std::abs(dot(a.start, x)) > 0.95) x = random_point(rng);
  Tsrvc b;
  b.start = x;
  kernels::rotate_batch(transport_geodesic_matrix(a.start, x), a.field, b.field);
  return {a, b};
}

double grid_min_d2(const Tsrvc& a, const Tsrvc& b, int points = 721) {
  double best = 1e300;
  for (int i = 0; i < points; ++i) {
    const double theta = -M_PI / 2 + M_PI * i / static_cast<double>(points - 1);
    best = std::min(best, dist_beta_squared(a, b, theta));
  }
  return best;
}

/// Energy of a sampled path: sum of sub-segment metrics scaled by the step
/// count; every sub-arc shares the full arc's circle.
double path_energy(const GeodesicPath& path, const std::vector<double>& w, int from,
                   int to) {
  const double phi = path.arc.turn;
  const double c = dot(path.arc.axis, path.arc.start.vec());
  const double radius = std::sqrt(std::max(0.0, 1.0 - c * c));
  double energy = 0.0;
  for (int j = from; j < to; ++j) {
    const double swing = phi / path.steps;
    const double len = swing * radius;
    Mat3 move = Mat3::identity();
    if (!path.arc.is_zero()) {
      const Mat3 frame = rotation_about(path.arc.axis, swing);
      const Mat3 comp = rotation_about(
          evaluate(path.arc, static_cast<double>(j + 1) / path.steps).vec(), -swing * c);
      move = comp * frame;
    }
    kernels::VectorField moved;
    kernels::rotate_batch(move, path.points[static_cast<std::size_t>(j)].field, moved);
    energy += len * len + kernels::weighted_sqdiff(
                              moved, path.points[static_cast<std::size_t>(j + 1)].field, w);
  }
  return energy;
}

}  // namespace

TEST_CASE("inner_product: zero, u-only reduction, bilinearity") {
  const SpherePoint x(1, 0, 0);
  TangentElement zero;
  zero.u = TangentVector(x, Vec3{0, 0, 0});
  zero.w.resize(kT);
  CHECK(inner_product(zero, zero) == 0.0);

  TangentElement a = zero, b = zero;
  a.u = TangentVector(x, Vec3{0, 0.4, -0.3});
  b.u = TangentVector(x, Vec3{0, -0.1, 0.8});
  CHECK(inner_product(a, b) == doctest::Approx(dot(a.u.vec(), b.u.vec())).epsilon(1e-12));

  Rng rng(31);
  for (std::size_t k = 0; k < kT; ++k) {
    a.w.set(k, TangentVector(x, Vec3{0, rng.normal(), rng.normal()}).vec());
    b.w.set(k, TangentVector(x, Vec3{0, rng.normal(), rng.normal()}).vec());
  }
  TangentElement a2 = a;
  a2.u = TangentVector(x, a.u.vec() * 2.0);
  for (std::size_t k = 0; k < kT; ++k) a2.w.set(k, a.w.get(k) * 2.0);
  CHECK(inner_product(a2, b) == doctest::Approx(2.0 * inner_product(a, b)).epsilon(1e-12));

  TangentElement other = b;
  other.u = TangentVector(SpherePoint(0, 0, 1), Vec3{1, 0, 0});
  CHECK_THROWS_AS(inner_product(a, other), BaseMismatch);
}

TEST_CASE("dist_beta_squared: identical representations cost nothing") {
  Rng rng(32);
  const Curve p = random_smooth_curve(rng, kT, 0.5);
  const Tsrvc r = to_tsrvc(p);
  CHECK(dist_beta_squared(r, r, 0.7) < 1e-20);  // zero arc regardless of theta
}

TEST_CASE("dist_beta_squared: transported pair at theta=0 is the squared geodesic") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto [a, b] = transported_pair(rng);
    const double expect = std::acos(std::clamp(dot(a.start, b.start), -1.0, 1.0));
    CHECK(dist_beta_squared(a, b, 0.0) == doctest::Approx(expect * expect).epsilon(1e-9));
  }
}

TEST_CASE("dist_beta_squared matches a dense chained-transport evaluation") {
  Rng rng(34);
  for (int trial = 0; trial < 5; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const double theta = rng.uniform(-1.3, 1.3);
    const double exact = dist_beta_squared(a, b, theta);

    const CircularArc arc = arc_between(a.start, b.start, theta);
    const int segments = 10000;
    const double len = chained_arc_length(arc, segments);
    kernels::VectorField moved;
    kernels::rotate_batch(chained_transport_matrix(arc, segments), a.field, moved);
    const auto w = kernels::trapezoid_weights(kT);
    const double approx = len * len + kernels::weighted_sqdiff(moved, b.field, w);
    CHECK(std::abs(exact - approx) < 1e-6);
  }
}

TEST_CASE("grad_theta: FD consistency and the first-order condition") {
  Rng rng(35);
  const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));

  // step-halving (Richardson) agreement at a generic angle
  const double g1 = (dist_beta_squared(a, b, 0.2 + 1e-5) -
                     dist_beta_squared(a, b, 0.2 - 1e-5)) / 2e-5;
  const double g2 = (dist_beta_squared(a, b, 0.2 + 1e-6) -
                     dist_beta_squared(a, b, 0.2 - 1e-6)) / 2e-6;
  CHECK(g1 == doctest::Approx(g2).epsilon(1e-3));
  CHECK(grad_theta(a, b, 0.2) == doctest::Approx(g1).epsilon(1e-6));

  const ThetaResult tr = optimal_theta(a, b, {});
  CHECK(std::abs(grad_theta(a, b, tr.theta)) < 1e-4);
}

TEST_CASE("grad_theta vanishes at zero for a mirror-symmetric configuration") {
  // Reflecting both fields across the plane of the two starts flips the
  // sign of theta in the objective, so d2 is even and the slope at 0 is 0.
  Rng rng(46);
  const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  SpherePoint x = random_point(rng);
  while (std::abs(dot(a.start, x)) > 0.9) x = random_point(rng);

  const Vec3 nrm = normalized(cross(a.start.vec(), x.vec()));
  auto reflect = [&nrm](const Vec3& v) { return v - nrm * (2.0 * dot(v, nrm)); };

  Tsrvc b;
  b.start = x;
  b.field.resize(kT);
  // symmetric target: transport a's field, then average with its mirror image
  kernels::VectorField moved;
  kernels::rotate_batch(transport_geodesic_matrix(a.start, x), a.field, moved);
  for (std::size_t k = 0; k < kT; ++k) {
    const Vec3 v = moved.get(k);
    b.field.set(k, (v + reflect(v)) * 0.5);
  }
  Tsrvc a_sym = a;
  for (std::size_t k = 0; k < kT; ++k) {
    const Vec3 v = a.field.get(k);
    a_sym.field.set(k, (v + reflect(v)) * 0.5);
  }
  const double d2p = dist_beta_squared(a_sym, b, 0.37);
  const double d2m = dist_beta_squared(a_sym, b, -0.37);
  CHECK(d2p == doctest::Approx(d2m).epsilon(1e-9));
  CHECK(std::abs(grad_theta(a_sym, b, 0.0)) < 1e-6);
}

TEST_CASE("optimal_theta: transported pair optimizes at theta=0") {
  Rng rng(36);
  for (int trial = 0; trial < 5; ++trial) {
    const auto [a, b] = transported_pair(rng);
    const ThetaResult tr = optimal_theta(a, b, {});
    CHECK(std::abs(tr.theta) < 1e-3);
  }
}

TEST_CASE("optimal_theta beats a dense angle grid") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const ThetaResult tr = optimal_theta(a, b, {});
    CHECK(tr.dist_sq <= grid_min_d2(a, b) + 1e-4);
  }
}

TEST_CASE("descent iterates never increase the objective") {
  Rng rng(47);
  const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  OptimizerOptions opts;
  opts.theta0 = 0.9;
  const ThetaResult tr = optimal_theta(a, b, opts);
  CHECK(tr.dist_sq <= dist_beta_squared(a, b, 0.9) + 1e-15);
}

TEST_CASE("geodesic_path: endpoints, constant energy, degenerate cases") {
  Rng rng(38);
  const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  const ThetaResult tr = optimal_theta(a, b, {});

  const int steps = 8;
  const GeodesicPath path = geodesic_path(a, b, tr.theta, steps);
  REQUIRE(static_cast<int>(path.points.size()) == steps + 1);

  const auto w = kernels::trapezoid_weights(kT);
  CHECK(norm(path.points.front().start.vec() - a.start.vec()) < 1e-12);
  CHECK(norm(path.points.back().start.vec() - b.start.vec()) < 1e-8);
  CHECK(kernels::weighted_sqdiff(path.points.front().field, a.field, w) < 1e-16);
  CHECK(kernels::weighted_sqdiff(path.points.back().field, b.field, w) < 1e-16);

  const double energy = path_energy(path, w, 0, steps) * steps;
  CHECK(std::abs(energy - tr.dist_sq) < 1e-6);

  // midpoint splits the energy evenly
  const double half1 = path_energy(path, w, 0, steps / 2);
  const double half2 = path_energy(path, w, steps / 2, steps);
  CHECK(std::abs(half1 - half2) < 1e-4);

  const GeodesicPath two = geodesic_path(a, b, tr.theta, 1);
  CHECK(two.points.size() == 2);
  const GeodesicPath still = geodesic_path(a, a, 0.0, 4);
  for (const Tsrvc& pt : still.points)
    CHECK(norm(pt.start.vec() - a.start.vec()) < 1e-12);
}

TEST_CASE("dist_bundle: identity, symmetry, triangle inequality") {
  Rng rng(39);
  const Curve p = random_smooth_curve(rng, kT, 0.5);
  CHECK(dist_bundle(p, p, {}) < 1e-10);

  for (int trial = 0; trial < 10; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    CHECK(std::abs(dist_bundle(a, b, {}) - dist_bundle(b, a, {})) <= 2e-3);
  }

  for (int trial = 0; trial < 20; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.45));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.45));
    const Tsrvc c = to_tsrvc(random_smooth_curve(rng, kT, 0.45));
    const double ab = dist_bundle(a, b, {});
    const double bc = dist_bundle(b, c, {});
    const double ac = dist_bundle(a, c, {});
    CHECK(ac <= ab + bc + 1e-3);
  }
}

TEST_CASE("inverse_exp: zero element, norm compatibility") {
  Rng rng(40);
  const Curve p = random_smooth_curve(rng, kT, 0.5);
  const Tsrvc r = to_tsrvc(p);
  const TangentElement self = inverse_exp(r, r, {});
  CHECK(self.u.length() < 1e-12);
  CHECK(inner_product(self, self) < 1e-16);

  for (int trial = 0; trial < 8; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const ThetaResult tr = optimal_theta(a, b, {});
    const TangentElement v = inverse_exp(a, b, {});
    CHECK(inner_product(v, v) == doctest::Approx(tr.dist_sq).epsilon(1e-6));
  }
}

TEST_CASE("exp_map: zero vector, pure fiber displacement, speed guard") {
  Rng rng(41);
  const Curve p = random_smooth_curve(rng, kT, 0.5);
  const Tsrvc r = to_tsrvc(p);

  TangentElement zero;
  zero.u = TangentVector(r.start, Vec3{0, 0, 0});
  zero.w.resize(kT);
  const Tsrvc same = exp_map_tsrvc(r, zero, {});
  CHECK(norm(same.start.vec() - r.start.vec()) == 0.0);

  TangentElement fiber = zero;
  for (std::size_t k = 0; k < kT; ++k)
    fiber.w.set(k, TangentVector(r.start, Vec3{0.1, -0.2, 0.3}).vec());
  const Tsrvc shifted = exp_map_tsrvc(r, fiber, {});
  CHECK(norm(shifted.start.vec() - r.start.vec()) == 0.0);
  CHECK(norm(shifted.field.get(3) - (r.field.get(3) + fiber.w.get(3))) < 1e-14);

  TangentElement fast = zero;
  fast.u = TangentVector(r.start, tangent_basis(r.start)[0].vec() * 3.5);
  CHECK_THROWS_AS(exp_map_tsrvc(r, fast, {}), SpeedTooLarge);
}

TEST_CASE("exp_map on constant curves selects the great circle") {
  // zero fields: the optimality gap closes only on the geodesic arc
  const SpherePoint x0(1, 0, 0);
  Tsrvc a;
  a.start = x0;
  a.field.resize(60);
  TangentElement v;
  const Vec3 dir = tangent_basis(x0)[0].vec();
  v.u = TangentVector(x0, dir * 0.9);
  v.w.resize(60);
  const Tsrvc out = exp_map_tsrvc(a, v, {});
  const SpherePoint expect = exp_sphere(x0, v.u);
  CHECK(norm(out.start.vec() - expect.vec()) < 1e-3);

  // grid-search oracle over the admissible interval agrees
  double best_gap = 1e300, best_vt = 0.0;
  const double lo = std::asin(0.9 / M_PI) + 1e-6;
  for (int i = 0; i < 400; ++i) {
    const double vt = lo + (M_PI - 2 * lo) * i / 399.0;
    const CircularArc arc = arc_from_direction(x0, v.u, vt);
    Tsrvc cand;
    cand.start = evaluate(arc, 1.0);
    cand.field.resize(60);
    const double gap = 0.81 - optimal_theta(a, cand, {}).dist_sq;
    if (gap < best_gap) {
      best_gap = gap;
      best_vt = vt;
    }
  }
  CHECK(std::abs(best_vt - M_PI / 2) < 0.01);
}

TEST_CASE("exp_map round trip against inverse_exp") {
  Rng rng(42);
  for (int trial = 0; trial < 4; ++trial) {
    const Curve p0 = random_smooth_curve(rng, 200, 0.15);
    const Curve p1 = random_smooth_curve(rng, 200, 0.15);
    const Tsrvc r0 = to_tsrvc(p0), r1 = to_tsrvc(p1);
    const TangentElement v = inverse_exp(r0, r1, {});
    const Tsrvc out = exp_map_tsrvc(r0, v, {});

    // representation-level reproduction is tight
    CHECK(norm(out.start.vec() - r1.start.vec()) < 1e-3);
    const auto w = kernels::trapezoid_weights(r1.size());
    CHECK(kernels::weighted_sqdiff(out.field, r1.field, w) < 1e-6);

    // reconstructed curve carries the integrator's discretization floor
    const Curve back = exp_map(p0, v, {});
    CHECK(sup_distance(back, p1) < 1e-3);
  }
}

TEST_CASE("baseline_dist: zero at identity, monotone in the angle budget") {
  Rng rng(43);
  const Curve p = random_smooth_curve(rng, kT, 0.5);
  const Tsrvc r = to_tsrvc(p);
  BaselineParams params;
  CHECK(baseline_dist(r, r, params) < 1e-20);

  const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
  BaselineParams coarse{60, 60}, fine{60, 240};
  CHECK(baseline_dist(r, b, fine) <= baseline_dist(r, b, coarse) + 1e-9);
}

TEST_CASE("exact distance dominates the baseline on most random pairs") {
  Rng rng(45);
  BaselineParams params{60, 120};
  int wins = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Tsrvc a = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const Tsrvc b = to_tsrvc(random_smooth_curve(rng, kT, 0.5));
    const double exact = optimal_theta(a, b, {}).dist_sq;
    const double base = baseline_dist(a, b, params);
    ++total;
    if (exact <= base + 1e-6) ++wins;
  }
  CHECK(wins * 100 >= total * 95);
}
