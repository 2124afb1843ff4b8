#pragma once

#include <array>
#include <cstdint>

#include "spherefda/frechet.hpp"

namespace spherefda {

struct Mat2 {
  std::array<std::array<double, 2>, 2> m{};
  double trace() const { return m[0][0] + m[1][1]; }
};

/// Block tangent-space covariance at the mean start: start-vector block
/// kappa, cross blocks k(t), and field block K(s,t), expressed in the
/// deterministic orthonormal basis at the mean's start point.
struct CovarianceBlocks {
  Mat2 kappa;
  std::vector<Mat2> k;                // T blocks
  std::vector<std::vector<Mat2>> K;   // T x T blocks
  std::array<TangentVector, 2> basis;

  std::size_t grid_size() const { return k.size(); }
  std::size_t dim() const { return 2 + 2 * k.size(); }
};

/// Sequence of 2x2 tangent covariance tensors with the frame and base point
/// each tensor is expressed at.
struct TensorField {
  std::vector<Mat2> tensors;
  std::vector<std::array<Vec3, 2>> frames;
  std::vector<Vec3> base_points;

  std::size_t size() const { return tensors.size(); }
};

CovarianceBlocks sample_covariance(const std::vector<Curve>& curves,
                                   const MeanResult& mean,
                                   const OptimizerOptions& opts = {});

TensorField pointwise_covariance(const std::vector<Curve>& curves,
                                 const MeanResult& mean, bool aligned,
                                 const OptimizerOptions& opts = {});

/// Carry each tensor from the mean's start along the mean curve to its own
/// grid point (conjugation by the chained transport); `reverse` undoes it.
TensorField transport_covariance_along_mean(const TensorField& field, const Curve& mean,
                                            bool reverse = false);

std::vector<double> trace_profile(const TensorField& field);

/// Dense symmetric matrix of the blocks in the interleaved ordering
/// (u1, u2, w1(t0), w2(t0), w1(t1), ...), row-major.
std::vector<double> assembled_matrix(const CovarianceBlocks& blocks);

/// Zero-mean Gaussian draws in the tangent space at the mean start.
/// Deterministic per (seed, index); eigenvalues are clipped at zero.
std::vector<TangentElement> gp_sample_tangent(const CovarianceBlocks& blocks,
                                              std::size_t count, std::uint64_t seed);

std::vector<Curve> gp_sample(const Tsrvc& mean, const CovarianceBlocks& blocks,
                             std::size_t count, std::uint64_t seed,
                             const OptimizerOptions& opts = {});
std::vector<Curve> gp_sample(const Curve& mean, const CovarianceBlocks& blocks,
                             std::size_t count, std::uint64_t seed,
                             const OptimizerOptions& opts = {});

struct WarpParams {
  double strength = 0.6;  // coefficient range of the sine perturbations
  int harmonics = 3;
};

struct PhaseInjected {
  std::vector<Curve> curves;
  std::vector<WarpingFunction> gammas;
};

/// Compose each curve with an independent random diffeomorphism of [0,1].
PhaseInjected add_phase_variability(const std::vector<Curve>& curves,
                                    const WarpParams& params, std::uint64_t seed);

/// Smooth random blocks built from a low-rank loading expansion (positive
/// semidefinite by construction), rescaled to the given total trace.
CovarianceBlocks make_random_blocks(const SpherePoint& base, std::size_t grid,
                                    std::uint64_t seed, double trace_scale = 0.3,
                                    int rank = 4);

/// Analytic template curves used by the simulation driver.
Curve make_mean_shape(int shape_index, std::size_t grid);

struct SimulationConfig {
  int n_means = 8;
  int per_mean = 10;
  std::size_t grid = 100;
  double warp_strength = 0.6;
  double trace_scale = 0.3;
  std::uint64_t seed = 0;
};

struct SimulatedData {
  std::vector<Curve> curves;
  std::vector<int> mean_ids;
  std::vector<Curve> means;
  std::vector<WarpingFunction> gammas;  // empty when warp_strength == 0
};

SimulatedData simulate_dataset(const SimulationConfig& config);

}  // namespace spherefda
