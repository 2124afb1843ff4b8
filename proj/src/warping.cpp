#include "spherefda/warping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spherefda {

namespace {

// Monotone lattice moves: slopes b/a with 1 <= a,b <= 3 and gcd(a,b) = 1.
constexpr std::pair<int, int> kMoves[] = {{1, 1}, {1, 2}, {1, 3}, {2, 1},
                                          {3, 1}, {2, 3}, {3, 2}};

/// Additive cost of the lattice edge (i-a, j-b) -> (i, j). The warp is
/// linear on the segment, so the square-root slope factor is constant and
/// the integrand is summed at the unit steps of the time axis.
double edge_cost(const kernels::VectorField& q_src, const kernels::VectorField& q_dst,
                 int i, int j, int a, int b, int grid_size, double fine_scale) {
  const double slope = static_cast<double>(b) / static_cast<double>(a);
  const double sq = std::sqrt(slope);
  const double dt = 1.0 / static_cast<double>(grid_size - 1);
  double cost = 0.0;
  for (int step = 1; step <= a; ++step) {
    const double gi = static_cast<double>(i - a + step);
    const double gj = static_cast<double>(j - b) + slope * step;
    const Vec3 src = field_at(q_src, gj * fine_scale) * sq;
    const Vec3 dst = field_at(q_dst, gi * fine_scale);
    const Vec3 d = src - dst;
    cost += dt * dot(d, d);
  }
  return cost;
}

}  // namespace

double dp_path_cost(const kernels::VectorField& q_src, const kernels::VectorField& q_dst,
                    const std::vector<std::pair<int, int>>& nodes, int grid_size) {
  const double fine_scale = static_cast<double>(q_src.size() - 1) /
                            static_cast<double>(grid_size - 1);
  double cost = 0.0;
  for (std::size_t e = 1; e < nodes.size(); ++e) {
    const int a = nodes[e].first - nodes[e - 1].first;
    const int b = nodes[e].second - nodes[e - 1].second;
    cost += edge_cost(q_src, q_dst, nodes[e].first, nodes[e].second, a, b, grid_size,
                      fine_scale);
  }
  return cost;
}

std::vector<std::pair<int, int>> dp_align_path(const kernels::VectorField& q_src,
                                               const kernels::VectorField& q_dst,
                                               int grid_size) {
  const std::size_t t = q_src.size();
  if (q_dst.size() != t) throw GridMismatch("dp_align: grid sizes differ");
  const int g = std::clamp<int>(grid_size, 2, static_cast<int>(t));
  const double fine_scale = static_cast<double>(t - 1) / static_cast<double>(g - 1);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> value(static_cast<std::size_t>(g) * g, inf);
  std::vector<int> pred(static_cast<std::size_t>(g) * g, -1);
  auto at = [g](int i, int j) { return static_cast<std::size_t>(i) * g + j; };
  value[at(0, 0)] = 0.0;

  for (int i = 1; i < g; ++i) {
    for (int j = 1; j < g; ++j) {
      double best = inf;
      int best_move = -1;
      for (int mv = 0; mv < 7; ++mv) {
        const auto [a, b] = kMoves[mv];
        if (i - a < 0 || j - b < 0) continue;
        const double prev = value[at(i - a, j - b)];
        if (prev == inf) continue;
        const double c = prev + edge_cost(q_src, q_dst, i, j, a, b, g, fine_scale);
        if (c < best) {
          best = c;
          best_move = mv;
        }
      }
      value[at(i, j)] = best;
      pred[at(i, j)] = best_move;
    }
  }

  std::vector<std::pair<int, int>> nodes;
  int i = g - 1, j = g - 1;
  nodes.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const int mv = pred[at(i, j)];
    if (mv < 0) break;  // unreachable only on malformed lattices
    i -= kMoves[mv].first;
    j -= kMoves[mv].second;
    nodes.emplace_back(i, j);
  }
  std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

WarpingFunction dp_align(const kernels::VectorField& q_src,
                         const kernels::VectorField& q_dst, int grid_size) {
  const std::size_t t = q_src.size();
  const int g = std::clamp<int>(grid_size, 2, static_cast<int>(t));
  const double fine_scale = static_cast<double>(t - 1) / static_cast<double>(g - 1);
  const std::vector<std::pair<int, int>> nodes = dp_align_path(q_src, q_dst, grid_size);

  // Sample the piecewise-linear node polyline on the fields' grid.
  WarpingFunction gamma;
  gamma.values.resize(t);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < t; ++k) {
    const double gi = static_cast<double>(k) / fine_scale;  // position on the lattice axis
    while (seg + 1 < nodes.size() && nodes[seg + 1].first < gi) ++seg;
    const double i0 = nodes[seg].first, j0 = nodes[seg].second;
    const double i1 = nodes[std::min(seg + 1, nodes.size() - 1)].first;
    const double j1 = nodes[std::min(seg + 1, nodes.size() - 1)].second;
    double val;
    if (i1 > i0)
      val = j0 + (j1 - j0) * (gi - i0) / (i1 - i0);
    else
      val = j0;
    gamma.values[k] = std::clamp(val / static_cast<double>(g - 1), 0.0, 1.0);
  }
  gamma.values.front() = 0.0;
  gamma.values.back() = 1.0;
  return gamma;
}

kernels::VectorField apply_warp_action(const kernels::VectorField& f,
                                       const WarpingFunction& g) {
  const std::size_t n = f.size();
  const double dt = 1.0 / static_cast<double>(n - 1);
  kernels::VectorField out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double gdot;
    if (k == 0)
      gdot = (g.values[1] - g.values[0]) / dt;
    else if (k == n - 1)
      gdot = (g.values[k] - g.values[k - 1]) / dt;
    else
      gdot = (g.values[k + 1] - g.values[k - 1]) / (2.0 * dt);
    gdot = std::max(0.0, gdot);
    out.set(k, field_at(f, g.values[k] * static_cast<double>(n - 1)) * std::sqrt(gdot));
  }
  return out;
}

WarpingFunction refine_warp(const kernels::VectorField& q_src,
                            const kernels::VectorField& q_dst, WarpingFunction gamma,
                            int passes) {
  const std::size_t n = q_src.size();
  const auto w = kernels::trapezoid_weights(n);
  auto cost = [&](const WarpingFunction& g) {
    return kernels::weighted_sqdiff(apply_warp_action(q_src, g), q_dst, w);
  };
  double cur = cost(gamma);
  if (cur < 1e-14) return gamma;

  auto try_bump = [&](long center, long half, double amount) {
    WarpingFunction cand = gamma;
    for (long k = std::max<long>(1, center - half);
         k <= std::min<long>(static_cast<long>(n) - 2, center + half); ++k) {
      const double hat =
          1.0 - std::abs(static_cast<double>(k - center)) / static_cast<double>(half + 1);
      cand.values[static_cast<std::size_t>(k)] = std::clamp(
          cand.values[static_cast<std::size_t>(k)] + amount * hat, 0.0, 1.0);
    }
    for (std::size_t k = 1; k < n; ++k)
      if (cand.values[k] < cand.values[k - 1]) return;
    const double c = cost(cand);
    if (c < cur) {
      cur = c;
      gamma = std::move(cand);
    }
  };

  const long wide = std::max<long>(2, static_cast<long>(n) / 8);
  const long narrow = std::max<long>(2, static_cast<long>(n) / 24);
  double delta = 2.0 / static_cast<double>(n - 1);
  for (int pass = 0; pass < passes; ++pass) {
    for (int m = 1; m < 16; ++m) {
      const long center = m * static_cast<long>(n - 1) / 16;
      try_bump(center, wide, delta);
      try_bump(center, wide, -delta);
      try_bump(center, narrow, delta);
      try_bump(center, narrow, -delta);
    }
    delta *= 0.5;
  }
  return gamma;
}

namespace {

/// DP alignment of p0 toward p at a fixed plane angle: the source field is
/// transported along the arc into the destination tangent plane first, and
/// the lattice solution is polished in the continuum.
WarpingFunction align_at_theta(const Tsrvc& r0, const Tsrvc& r, double theta) {
  const CircularArc arc = arc_between(r0.start, r.start, theta);
  kernels::VectorField moved;
  kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), r0.field, moved);
  const WarpingFunction g = dp_align(moved, r.field, static_cast<int>(r.size()));
  return refine_warp(moved, r.field, g);
}

}  // namespace

namespace {

AlignmentResult amplitude_descent(const Curve& p0, const Tsrvc& r0, const Tsrvc& r,
                                  double theta_seed, const OptimizerOptions& opts) {
  AlignmentResult res;
  res.theta_star = std::clamp(theta_seed, -M_PI / 2, M_PI / 2);
  res.gamma_star = WarpingFunction::identity(p0.size());
  Tsrvc warped = r0;
  res.dist_sq = dist_beta_squared(warped, r, res.theta_star);

  auto try_warp = [&](const WarpingFunction& g, double theta) {
    const Tsrvc cand = to_tsrvc(warp_curve(p0, g));
    const double d2 = dist_beta_squared(cand, r, theta);
    if (d2 < res.dist_sq) {
      res.gamma_star = g;
      res.dist_sq = d2;
      warped = cand;
      return true;
    }
    return false;
  };

  // Initial alignment at theta0, then alternate angle and warp updates.
  try_warp(align_at_theta(r0, r, res.theta_star), res.theta_star);

  // Angle update: descent from the incumbent, with a coarse sweep as the
  // stall detector; a sweep point beating the iterate seeds a second run.
  auto best_theta = [&](double theta0) {
    OptimizerOptions topts = opts;
    topts.theta0 = theta0;
    ThetaResult tr = optimal_theta(warped, r, topts);
    double probe_theta = 0.0, probe_d2 = tr.dist_sq;
    for (int i = 0; i < 48; ++i) {
      const double th = -M_PI / 2 + M_PI * (i + 0.5) / 48.0;
      const double d2 = dist_beta_squared(warped, r, th);
      if (d2 < probe_d2 - 1e-12) {
        probe_d2 = d2;
        probe_theta = th;
      }
    }
    if (probe_d2 < tr.dist_sq - 1e-12) {
      topts.theta0 = probe_theta;
      const ThetaResult again = optimal_theta(warped, r, topts);
      if (again.dist_sq < tr.dist_sq) tr = again;
    }
    return tr;
  };

  const int kMaxRounds = 20;
  for (int round = 0; round < kMaxRounds; ++round) {
    ++res.iterations;
    const ThetaResult tr = best_theta(res.theta_star);
    bool improved = false;
    if (tr.dist_sq < res.dist_sq) {
      res.theta_star = tr.theta;
      res.dist_sq = tr.dist_sq;
      improved = true;
    }
    improved |= try_warp(align_at_theta(r0, r, res.theta_star), res.theta_star);
    if (std::abs(grad_theta(warped, r, res.theta_star)) < opts.tol) {
      res.converged = true;
      if (!improved) break;
    }
    if (!improved) break;
  }
  // Pin the reported value to the exact definition on the final pair.
  res.dist_sq = dist_beta_squared(to_tsrvc(warp_curve(p0, res.gamma_star)), r,
                                  res.theta_star);
  return res;
}

}  // namespace

AlignmentResult amplitude_geodesic(const Curve& p0, const Curve& p,
                                   const OptimizerOptions& opts) {
  const Tsrvc r0 = to_tsrvc(p0);
  const Tsrvc r = to_tsrvc(p);

  // The warp and angle updates couple; seeding from the best unwarped sweep
  // angle in addition to theta0 covers the basins a pure theta0 start misses.
  AlignmentResult best = amplitude_descent(p0, r0, r, opts.theta0, opts);
  double sweep_theta = opts.theta0, sweep_d2 = 1e300;
  for (int i = 0; i < 48; ++i) {
    const double th = -M_PI / 2 + M_PI * (i + 0.5) / 48.0;
    const double d2 = dist_beta_squared(r0, r, th);
    if (d2 < sweep_d2) {
      sweep_d2 = d2;
      sweep_theta = th;
    }
  }
  if (std::abs(sweep_theta - opts.theta0) > 0.05) {
    AlignmentResult alt = amplitude_descent(p0, r0, r, sweep_theta, opts);
    alt.iterations += best.iterations;
    if (alt.dist_sq < best.dist_sq) {
      alt.converged = alt.converged || best.converged;
      best = std::move(alt);
    } else {
      best.iterations = alt.iterations;
    }
  }
  return best;
}

double dist_amplitude(const Curve& p0, const Curve& p, const OptimizerOptions& opts) {
  return std::sqrt(std::max(0.0, amplitude_geodesic(p0, p, opts).dist_sq));
}

namespace {

double baseline_d2_at(const Tsrvc& a, const Tsrvc& b, double theta,
                      const BaselineParams& params,
                      const std::vector<double>& w) {
  const CircularArc arc = arc_between(a.start, b.start, theta);
  const double len = chained_arc_length(arc, params.n_segments);
  kernels::VectorField moved;
  kernels::rotate_batch(chained_transport_matrix(arc, params.n_segments), a.field, moved);
  return len * len +
         kernels::active().weighted_sqdiff(moved, b.field, w.data(), w.size());
}

}  // namespace

double baseline_amplitude_dist_sq(const Curve& p0, const Curve& p,
                                  const BaselineParams& params, int max_rounds) {
  const Tsrvc r0 = to_tsrvc(p0);
  const Tsrvc r = to_tsrvc(p);
  const auto w = kernels::trapezoid_weights(r.size());

  auto grid_best_theta = [&](const Tsrvc& a) {
    double best_theta = 0.0, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < params.n_angles; ++i) {
      const double theta =
          -M_PI / 2 + M_PI * (i + 0.5) / static_cast<double>(params.n_angles);
      const double d2 = baseline_d2_at(a, r, theta, params, w);
      if (d2 < best) {
        best = d2;
        best_theta = theta;
      }
    }
    return std::make_pair(best_theta, best);
  };

  Tsrvc warped = r0;
  auto [theta, best] = grid_best_theta(warped);
  for (int round = 0; round < max_rounds; ++round) {
    const CircularArc arc = arc_between(r0.start, r.start, theta);
    kernels::VectorField moved;
    kernels::rotate_batch(chained_transport_matrix(arc, params.n_segments), r0.field,
                          moved);
    WarpingFunction g = dp_align(moved, r.field, static_cast<int>(r.size()));
    g = refine_warp(moved, r.field, g);
    const Tsrvc cand = to_tsrvc(warp_curve(p0, g));
    bool improved = false;
    const double d2w = baseline_d2_at(cand, r, theta, params, w);
    if (d2w < best) {
      warped = cand;
      best = d2w;
      improved = true;
    }
    const auto [t2, b2] = grid_best_theta(warped);
    if (b2 < best) {
      theta = t2;
      best = b2;
      improved = true;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace spherefda
