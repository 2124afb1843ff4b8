#pragma once

#include "spherefda/bundle.hpp"

namespace spherefda {

struct AlignmentResult {
  double theta_star = 0.0;
  WarpingFunction gamma_star;
  double dist_sq = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Best warping of q_src toward q_dst over monotone lattice paths on a
/// grid_size x grid_size lattice with slope moves {(a,b): 1<=a,b<=3,
/// gcd(a,b)=1}. Both fields must already live in the same tangent plane.
/// The result is sampled back onto the fields' grid.
WarpingFunction dp_align(const kernels::VectorField& q_src,
                         const kernels::VectorField& q_dst, int grid_size);

/// The optimal lattice path itself (dp_align samples this polyline).
std::vector<std::pair<int, int>> dp_align_path(const kernels::VectorField& q_src,
                                               const kernels::VectorField& q_dst,
                                               int grid_size);

/// Cost of a particular warp under the same discretization dp_align uses
/// (exposed for the exhaustive-enumeration oracle).
double dp_path_cost(const kernels::VectorField& q_src, const kernels::VectorField& q_dst,
                    const std::vector<std::pair<int, int>>& nodes, int grid_size);

/// The group action on a bare field: f(gamma) * sqrt(gamma'), slope by
/// central differences.
kernels::VectorField apply_warp_action(const kernels::VectorField& f,
                                       const WarpingFunction& g);

/// Local continuum polish of a lattice warp: monotone hat-bump adjustments
/// accepted when they lower the alignment cost. Removes the slope
/// quantization the lattice move set imposes.
WarpingFunction refine_warp(const kernels::VectorField& q_src,
                            const kernels::VectorField& q_dst, WarpingFunction gamma,
                            int passes = 3);

/// Coordinate descent over (warp, plane angle): dynamic-programming
/// alignment at fixed angle alternated with the gradient angle search.
AlignmentResult amplitude_geodesic(const Curve& p0, const Curve& p,
                                   const OptimizerOptions& opts);

double dist_amplitude(const Curve& p0, const Curve& p, const OptimizerOptions& opts);

/// Comparator for the amplitude distance: exhaustive angle grid with chained
/// piecewise-geodesic transports, alternated with the same DP alignment.
/// Returns the squared amplitude distance under the comparator's own
/// discretization.
double baseline_amplitude_dist_sq(const Curve& p0, const Curve& p,
                                  const BaselineParams& params, int max_rounds = 20);

}  // namespace spherefda
