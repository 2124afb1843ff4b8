#pragma once

#include <optional>

#include "spherefda/warping.hpp"

namespace spherefda {

struct MeanOptions {
  double lambda1 = 0.1;  // angle-block step
  double lambda2 = 0.1;  // start-point step
  double eps1 = 1e-5;    // angle-gradient stopping threshold
  double eps2 = 1e-5;    // start-gradient stopping threshold
  int max_inner = 60;    // angle-descent iterations per outer round
  int max_outer = 60;
};

struct MeanResult {
  Curve mean;
  Tsrvc mean_tsrvc;
  std::vector<double> thetas;
  std::optional<std::vector<WarpingFunction>> gammas;
  double frechet_value = 0.0;
  std::vector<double> trace;  // objective after each accepted outer round
  bool converged = false;
  bool degenerate_init = false;
};

/// Pointwise arithmetic mean of transported fields sharing one base point.
Tsrvc mean_tsrvc(const std::vector<Tsrvc>& transported);

/// Mean objective: average of squared arc lengths plus integrated squared
/// deviation of each transported field from their mean.
double frechet_function(const std::vector<Curve>& curves, const SpherePoint& x,
                        const std::vector<double>& thetas);
double frechet_function(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                        const std::vector<double>& thetas);

struct ThetasResult {
  std::vector<double> thetas;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Joint gradient descent over the per-curve plane angles at fixed x.
ThetasResult optimal_thetas(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                            const std::vector<double>& theta0, const MeanOptions& opts);

/// Riemannian gradient of the mean objective in x (central differences
/// along an orthonormal tangent basis).
TangentVector grad_x_frechet(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                             const std::vector<double>& thetas);

MeanResult frechet_mean_bundle(const std::vector<Curve>& curves, const MeanOptions& opts);

struct AlignedThetasResult {
  std::vector<double> thetas;
  std::vector<Curve> aligned;
  std::vector<WarpingFunction> gammas;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Angle descent interleaved with per-curve DP alignment toward the running
/// mean field.
AlignedThetasResult aligned_optimal_thetas(const std::vector<Curve>& curves,
                                           const SpherePoint& x,
                                           const std::vector<double>& theta0,
                                           const MeanOptions& opts);

MeanResult frechet_mean_amplitude(const std::vector<Curve>& curves,
                                  const MeanOptions& opts);

}  // namespace spherefda
