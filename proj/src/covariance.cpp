#include "spherefda/covariance.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "spherefda/rng.hpp"

namespace spherefda {

namespace {

constexpr std::uint64_t kGpTag = 0x6770;     // "gp"
constexpr std::uint64_t kWarpTag = 0x7761;   // "wa"
constexpr std::uint64_t kBlockTag = 0x626b;  // "bk"

/// Components of a tangent element in the 2-D basis, per grid point.
struct Coords {
  std::array<double, 2> u;
  std::vector<std::array<double, 2>> w;
};

Coords to_coords(const TangentElement& v, const std::array<TangentVector, 2>& basis) {
  Coords c;
  c.u = {dot(v.u.vec(), basis[0].vec()), dot(v.u.vec(), basis[1].vec())};
  c.w.resize(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec3 wk = v.w.get(k);
    c.w[k] = {dot(wk, basis[0].vec()), dot(wk, basis[1].vec())};
  }
  return c;
}

}  // namespace

CovarianceBlocks sample_covariance(const std::vector<Curve>& curves,
                                   const MeanResult& mean,
                                   const OptimizerOptions& opts) {
  const std::size_t n = curves.size();
  if (n < 2) throw TooFewCurves("sample_covariance: need at least 2 curves");
  const std::size_t t = mean.mean_tsrvc.size();

  CovarianceBlocks blocks;
  blocks.basis = tangent_basis(mean.mean_tsrvc.start);
  blocks.k.assign(t, Mat2{});
  blocks.K.assign(t, std::vector<Mat2>(t, Mat2{}));

  std::vector<Coords> coords;
  coords.reserve(n);
  for (const Curve& c : curves)
    coords.push_back(to_coords(inverse_exp(mean.mean_tsrvc, to_tsrvc(c), opts),
                               blocks.basis));

  const double scale = 1.0 / static_cast<double>(n - 1);
  for (const Coords& c : coords) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) blocks.kappa.m[i][j] += scale * c.u[i] * c.u[j];
    for (std::size_t s = 0; s < t; ++s) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          blocks.k[s].m[i][j] += scale * c.u[i] * c.w[s][j];
      for (std::size_t r = 0; r < t; ++r)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            blocks.K[s][r].m[i][j] += scale * c.w[s][i] * c.w[r][j];
    }
  }
  return blocks;
}

TensorField pointwise_covariance(const std::vector<Curve>& curves,
                                 const MeanResult& mean, bool aligned,
                                 const OptimizerOptions& opts) {
  const std::size_t n = curves.size();
  if (n < 2) throw TooFewCurves("pointwise_covariance: need at least 2 curves");
  if (aligned && !mean.gammas)
    throw Error("pointwise_covariance: aligned mode needs an amplitude mean");

  const std::size_t t = mean.mean_tsrvc.size();
  const auto basis = tangent_basis(mean.mean_tsrvc.start);

  TensorField field;
  field.tensors.assign(t, Mat2{});
  field.frames.assign(t, {basis[0].vec(), basis[1].vec()});
  field.base_points.assign(t, mean.mean_tsrvc.start.vec());

  const double scale = 1.0 / static_cast<double>(n - 1);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Curve& src = curves[idx];
    const Curve warped = aligned ? warp_curve(src, (*mean.gammas)[idx]) : src;
    const Coords c =
        to_coords(inverse_exp(mean.mean_tsrvc, to_tsrvc(warped), opts), basis);
    for (std::size_t k = 0; k < t; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          field.tensors[k].m[i][j] += scale * c.w[k][i] * c.w[k][j];
  }
  return field;
}

TensorField transport_covariance_along_mean(const TensorField& field, const Curve& mean,
                                            bool reverse) {
  const std::size_t t = field.size();
  if (mean.size() != t)
    throw GridMismatch("transport_covariance_along_mean: grid sizes differ");

  TensorField out;
  out.tensors.resize(t);
  out.frames.resize(t);
  out.base_points.resize(t);

  Mat3 chain = Mat3::identity();  // transport mean(0) -> mean(t_k)
  for (std::size_t k = 0; k < t; ++k) {
    if (k > 0) chain = transport_geodesic_matrix(mean.point(k - 1), mean.point(k)) * chain;
    const Mat3 move = reverse ? chain.transposed() : chain;
    const SpherePoint target = reverse ? mean.start() : mean.point(k);
    const auto canon = tangent_basis(target);

    // Ambient tensor from the stored frame, conjugated by the transport,
    // re-expressed in the canonical frame at the target point.
    const Vec3 f0 = move * field.frames[k][0];
    const Vec3 f1 = move * field.frames[k][1];
    const Mat2& kk = field.tensors[k];
    // rows of R: canonical basis against the moved frame
    const double r00 = dot(canon[0].vec(), f0), r01 = dot(canon[0].vec(), f1);
    const double r10 = dot(canon[1].vec(), f0), r11 = dot(canon[1].vec(), f1);
    Mat2 res;
    // R * K * R^T
    const double a = kk.m[0][0], b = kk.m[0][1], c = kk.m[1][0], d = kk.m[1][1];
    res.m[0][0] = r00 * (a * r00 + b * r01) + r01 * (c * r00 + d * r01);
    res.m[0][1] = r00 * (a * r10 + b * r11) + r01 * (c * r10 + d * r11);
    res.m[1][0] = r10 * (a * r00 + b * r01) + r11 * (c * r00 + d * r01);
    res.m[1][1] = r10 * (a * r10 + b * r11) + r11 * (c * r10 + d * r11);
    out.tensors[k] = res;
    out.frames[k] = {canon[0].vec(), canon[1].vec()};
    out.base_points[k] = target.vec();
  }
  return out;
}

std::vector<double> trace_profile(const TensorField& field) {
  std::vector<double> p(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) p[k] = field.tensors[k].trace();
  return p;
}

std::vector<double> assembled_matrix(const CovarianceBlocks& blocks) {
  const std::size_t t = blocks.grid_size();
  const std::size_t d = blocks.dim();
  std::vector<double> m(d * d, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * d + c]; };

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) at(i, j) = blocks.kappa.m[i][j];
  for (std::size_t s = 0; s < t; ++s) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        at(i, 2 + 2 * s + j) = blocks.k[s].m[i][j];
        at(2 + 2 * s + j, i) = blocks.k[s].m[i][j];
      }
    for (std::size_t r = 0; r < t; ++r)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) at(2 + 2 * s + i, 2 + 2 * r + j) = blocks.K[s][r].m[i][j];
  }
  return m;
}

namespace {

/// Eigen-decomposed sampler state shared by all draws of one call.
struct SamplerBasis {
  Eigen::MatrixXd directions;  // columns scaled by sqrt(eigenvalue)
  std::size_t dim;
};

SamplerBasis decompose(const CovarianceBlocks& blocks) {
  const std::size_t d = blocks.dim();
  const std::vector<double> m = assembled_matrix(blocks);
  Eigen::MatrixXd sigma(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) sigma(r, c) = m[r * d + c];
  sigma = 0.5 * (sigma + sigma.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.eigenvalues().minCoeff() < -1e-6)
    throw NotPSD("gp_sample: covariance has a significantly negative eigenvalue");

  SamplerBasis sb;
  sb.dim = d;
  sb.directions = eig.eigenvectors();
  for (std::size_t j = 0; j < d; ++j) {
    const double lam = std::max(0.0, eig.eigenvalues()(static_cast<Eigen::Index>(j)));
    sb.directions.col(static_cast<Eigen::Index>(j)) *= std::sqrt(lam);
  }
  return sb;
}

TangentElement draw_tangent(const SamplerBasis& sb, const CovarianceBlocks& blocks,
                            std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, kGpTag, index);
  Eigen::VectorXd xi(sb.dim);
  for (std::size_t j = 0; j < sb.dim; ++j)
    xi(static_cast<Eigen::Index>(j)) = rng.normal();
  const Eigen::VectorXd z = sb.directions * xi;

  const std::size_t t = blocks.grid_size();
  const SpherePoint base = blocks.basis[0].base();
  TangentElement v;
  v.u = TangentVector(base, blocks.basis[0].vec() * z(0) + blocks.basis[1].vec() * z(1));
  v.w.resize(t);
  for (std::size_t k = 0; k < t; ++k)
    v.w.set(k, blocks.basis[0].vec() * z(static_cast<Eigen::Index>(2 + 2 * k)) +
                   blocks.basis[1].vec() * z(static_cast<Eigen::Index>(2 + 2 * k + 1)));
  return v;
}

}  // namespace

std::vector<TangentElement> gp_sample_tangent(const CovarianceBlocks& blocks,
                                              std::size_t count, std::uint64_t seed) {
  const SamplerBasis sb = decompose(blocks);
  std::vector<TangentElement> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(draw_tangent(sb, blocks, seed, i));
  return out;
}

std::vector<Curve> gp_sample(const Tsrvc& mean, const CovarianceBlocks& blocks,
                             std::size_t count, std::uint64_t seed,
                             const OptimizerOptions& opts) {
  const SamplerBasis sb = decompose(blocks);
  std::vector<Curve> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TangentElement v = draw_tangent(sb, blocks, seed, i);
    const double speed = v.u.length();
    if (speed > M_PI)  // extreme draw; shrink onto the admissible ball
      v.u = TangentVector(v.u.base(), v.u.vec() * ((M_PI * (1.0 - 1e-9)) / speed));
    out.push_back(from_tsrvc(exp_map_tsrvc(mean, v, opts)));
  }
  return out;
}

std::vector<Curve> gp_sample(const Curve& mean, const CovarianceBlocks& blocks,
                             std::size_t count, std::uint64_t seed,
                             const OptimizerOptions& opts) {
  return gp_sample(to_tsrvc(mean), blocks, count, seed, opts);
}

PhaseInjected add_phase_variability(const std::vector<Curve>& curves,
                                    const WarpParams& params, std::uint64_t seed) {
  PhaseInjected out;
  out.curves.reserve(curves.size());
  out.gammas.reserve(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::size_t t = curves[i].size();
    WarpingFunction g = WarpingFunction::identity(t);
    if (params.strength > 0.0) {
      Rng rng = Rng::stream(seed, kWarpTag, i);
      std::vector<double> a(params.harmonics);
      double mag = 0.0;
      for (double& c : a) {
        c = rng.uniform(-params.strength, params.strength);
        mag += std::abs(c);
      }
      if (mag > 0.95)  // keep gamma' >= 0.05
        for (double& c : a) c *= 0.95 / mag;
      for (std::size_t k = 0; k < t; ++k) {
        const double tt = static_cast<double>(k) / static_cast<double>(t - 1);
        double val = tt;
        for (int j = 0; j < params.harmonics; ++j) {
          const double jp = (j + 1) * M_PI;
          val += a[static_cast<std::size_t>(j)] * std::sin(jp * tt) / jp;
        }
        g.values[k] = std::clamp(val, 0.0, 1.0);
      }
      g.values.front() = 0.0;
      g.values.back() = 1.0;
      out.curves.push_back(warp_curve(curves[i], g));
    } else {
      out.curves.push_back(curves[i]);
    }
    out.gammas.push_back(std::move(g));
  }
  return out;
}

CovarianceBlocks make_random_blocks(const SpherePoint& base, std::size_t grid,
                                    std::uint64_t seed, double trace_scale, int rank) {
  CovarianceBlocks blocks;
  blocks.basis = tangent_basis(base);
  blocks.k.assign(grid, Mat2{});
  blocks.K.assign(grid, std::vector<Mat2>(grid, Mat2{}));

  // Low-rank expansion: each factor is a start-vector pair plus a smooth
  // loading function pair; the assembled matrix is a Gram sum.
  Rng rng = Rng::stream(seed, kBlockTag, 0);
  std::vector<std::array<double, 2>> a(rank);
  std::vector<std::vector<std::array<double, 2>>> load(
      rank, std::vector<std::array<double, 2>>(grid));
  for (int r = 0; r < rank; ++r) {
    const double decay = 1.0 / (1.0 + r);
    a[r] = {decay * rng.uniform(-1.0, 1.0), decay * rng.uniform(-1.0, 1.0)};
    const double freq = (r + 1) * M_PI;
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp0 = decay * rng.uniform(0.3, 1.0);
    const double amp1 = decay * rng.uniform(0.3, 1.0);
    for (std::size_t kk = 0; kk < grid; ++kk) {
      const double tt = static_cast<double>(kk) / static_cast<double>(grid - 1);
      load[r][kk] = {amp0 * std::sin(freq * tt + phase), amp1 * std::cos(freq * tt + phase)};
    }
  }

  for (int r = 0; r < rank; ++r) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) blocks.kappa.m[i][j] += a[r][i] * a[r][j];
    for (std::size_t s = 0; s < grid; ++s) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) blocks.k[s].m[i][j] += a[r][i] * load[r][s][j];
      for (std::size_t t2 = 0; t2 < grid; ++t2)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            blocks.K[s][t2].m[i][j] += load[r][s][i] * load[r][t2][j];
    }
  }

  // Rescale so the assembled trace hits the target.
  double tr = blocks.kappa.trace();
  for (std::size_t s = 0; s < grid; ++s) tr += blocks.K[s][s].trace();
  if (tr > 0.0) {
    const double c = trace_scale / tr;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) blocks.kappa.m[i][j] *= c;
    for (std::size_t s = 0; s < grid; ++s) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) blocks.k[s].m[i][j] *= c;
      for (std::size_t t2 = 0; t2 < grid; ++t2)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) blocks.K[s][t2].m[i][j] *= c;
    }
  }
  return blocks;
}

Curve make_mean_shape(int shape_index, std::size_t grid) {
  // Small family of analytic templates: varied headings, curls and wiggles.
  const int s = ((shape_index % 8) + 8) % 8;
  std::vector<Vec3> pts(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(grid - 1);
    double lat = 0.0, lon = 0.0;
    switch (s) {
      case 0: lat = 0.3 * std::sin(M_PI * t); lon = 1.2 * t; break;
      case 1: lat = 0.8 * t - 0.4; lon = 0.5 * std::sin(2.0 * M_PI * t); break;
      case 2: lat = 0.5 * std::sin(2.0 * M_PI * t); lon = 0.9 * t + 0.2 * std::sin(M_PI * t); break;
      case 3: lat = 0.4 * std::cos(M_PI * t) - 0.1; lon = 0.7 * t + 0.3 * std::sin(3.0 * M_PI * t) / 3.0; break;
      case 4: lat = 0.2 + 0.5 * t * t; lon = 1.0 * t - 0.4 * std::sin(M_PI * t); break;
      case 5: lat = -0.3 + 0.6 * std::sin(M_PI * t * 0.5); lon = 0.8 * t + 0.25 * std::cos(2.0 * M_PI * t) - 0.25; break;
      case 6: lat = 0.35 * std::sin(3.0 * M_PI * t) / 1.5; lon = 1.1 * t; break;
      default: lat = 0.6 * t - 0.3 + 0.2 * std::sin(2.0 * M_PI * t); lon = 0.6 * t + 0.2 * t * t; break;
    }
    pts[k] = Vec3{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                  std::sin(lat)};
  }
  return Curve(std::move(pts));
}

SimulatedData simulate_dataset(const SimulationConfig& config) {
  SimulatedData data;
  for (int m = 0; m < config.n_means; ++m) {
    const Curve mean = make_mean_shape(m, config.grid);
    data.means.push_back(mean);
    const Tsrvc mean_rep = to_tsrvc(mean);
    const CovarianceBlocks blocks =
        make_random_blocks(mean_rep.start, config.grid,
                           config.seed ^ (0x5eedull + m), config.trace_scale);
    std::vector<Curve> draws = gp_sample(mean_rep, blocks, config.per_mean,
                                         config.seed ^ (0xd7a3ull * (m + 1)));
    for (auto& c : draws) {
      data.curves.push_back(std::move(c));
      data.mean_ids.push_back(m);
    }
  }
  if (config.warp_strength > 0.0) {
    WarpParams wp;
    wp.strength = config.warp_strength;
    PhaseInjected inj = add_phase_variability(data.curves, wp, config.seed ^ 0x9a5eull);
    data.curves = std::move(inj.curves);
    data.gammas = std::move(inj.gammas);
  }
  return data;
}

}  // namespace spherefda
