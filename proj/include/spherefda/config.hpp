#pragma once

namespace spherefda {

/// Numerical tolerances used across the library. Single source of truth:
/// tests assert against these same constants.
namespace tol {

inline constexpr double kUnitNorm = 1e-12;        // |x| = 1 slack for sphere points
inline constexpr double kTangentOrth = 1e-10;     // <v, x> = 0 slack for tangent vectors
inline constexpr double kFieldOrth = 1e-9;        // orthogonality slack for sampled fields
inline constexpr double kAntipodal = 1e-9;        // <x,y> <= -1 + this  =>  antipodal
inline constexpr double kDegenerateCross = 1e-9;  // |x0 x x| below this  =>  degenerate pair
inline constexpr double kCoincident = 1e-12;      // <x,y> >= 1 - this    =>  same point
inline constexpr double kZeroVector = 1e-14;      // exp map short-circuit
inline constexpr double kZeroSpeed = 1e-12;       // arc_from_direction speed guard
inline constexpr double kZeroDerivative = 1e-10;  // square-root velocity zero extension
inline constexpr double kAntipodalNudge = 1e-8;   // perturbation applied to antipodal endpoints

inline constexpr double kFdStep = 1e-5;           // finite-difference step for scalar gradients
inline constexpr double kStepFloor = 1e-12;       // backtracking abort threshold
inline constexpr double kDomainMargin = 1e-6;     // clamp margin for open parameter intervals

}  // namespace tol

/// Shared optimizer / run defaults (CLI exposes these as flags).
struct RunConfig {
  int grid_size = 200;      // common uniform grid T
  double lambda1 = 0.1;     // step size, angle block
  double lambda2 = 0.1;     // step size, start-point block
  double epsilon = 1e-5;    // gradient-norm stopping threshold
  int max_iter = 200;
  unsigned long long seed = 0;
  int min_track_points = 10;  // shorter real-data tracks are rejected
};

}  // namespace spherefda
