#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "spherefda/covariance.hpp"
#include "test_util.hpp"

using namespace spherefda;
using testutil::random_smooth_curve;
using testutil::random_warp;

namespace {

constexpr std::size_t kT = 40;

Eigen::MatrixXd to_eigen(const std::vector<double>& m, std::size_t d) {
  Eigen::MatrixXd out(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r * d + c];
  return out;
}

MeanResult quick_mean(const std::vector<Curve>& curves) {
  MeanOptions opts;
  opts.max_outer = 30;
  return frechet_mean_bundle(curves, opts);
}

}  // namespace

TEST_CASE("sample_covariance: identical curves give zero blocks") {
  Rng rng(81);
  const Curve p = random_smooth_curve(rng, kT, 0.4);
  const std::vector<Curve> batch{p, p, p};
  const MeanResult mean = quick_mean(batch);
  const CovarianceBlocks blocks = sample_covariance(batch, mean);
  CHECK(std::abs(blocks.kappa.m[0][0]) < 1e-8);
  CHECK(std::abs(blocks.kappa.m[1][1]) < 1e-8);
  double worst = 0.0;
  for (const auto& row : blocks.K)
    for (const Mat2& m : row)
      worst = std::max({worst, std::abs(m.m[0][0]), std::abs(m.m[0][1]),
                        std::abs(m.m[1][0]), std::abs(m.m[1][1])});
  CHECK(worst < 1e-8);
  CHECK_THROWS_AS(sample_covariance({p}, mean), TooFewCurves);
}

TEST_CASE("sample_covariance: antipodal tangent pair gives a rank-1 matrix") {
  Rng rng(82);
  const Curve base = random_smooth_curve(rng, kT, 0.3);
  const Tsrvc rep = to_tsrvc(base);

  // displace the base curve by +v and -v in the bundle tangent space
  TangentElement v;
  const auto basis = tangent_basis(rep.start);
  v.u = TangentVector(rep.start, basis[0].vec() * 0.2);
  v.w.resize(kT);
  for (std::size_t k = 0; k < kT; ++k) {
    const double tt = static_cast<double>(k) / (kT - 1);
    v.w.set(k, basis[1].vec() * (0.1 * std::sin(M_PI * tt)));
  }
  TangentElement nv = v;
  nv.u = TangentVector(rep.start, v.u.vec() * -1.0);
  for (std::size_t k = 0; k < kT; ++k) nv.w.set(k, v.w.get(k) * -1.0);

  const Curve plus = from_tsrvc(exp_map_tsrvc(rep, v, {}));
  const Curve minus = from_tsrvc(exp_map_tsrvc(rep, nv, {}));

  // the sample mean of {exp(+v), exp(-v)} is the base curve itself
  const std::vector<Curve> batch{plus, minus};
  const MeanResult mean = quick_mean(batch);
  CHECK(inner_product(inverse_exp(mean.mean_tsrvc, rep, {}),
                      inverse_exp(mean.mean_tsrvc, rep, {})) < 1e-3);

  const CovarianceBlocks blocks = sample_covariance(batch, mean);
  const auto m = assembled_matrix(blocks);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_eigen(m, blocks.dim()));
  int significant = 0;
  const double top = eig.eigenvalues().maxCoeff();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    if (eig.eigenvalues()(i) > 1e-3 * top) ++significant;
  CHECK(significant == 1);
  // kappa tracks 2 * outer(u)/(n-1) = outer(u) for n=2
  CHECK(blocks.kappa.m[0][0] ==
        doctest::Approx(2.0 * 0.2 * 0.2 / 1.0).epsilon(0.05));
}

TEST_CASE("assembled sample covariance is symmetric PSD") {
  Rng rng(83);
  std::vector<Curve> curves;
  for (int i = 0; i < 6; ++i) curves.push_back(random_smooth_curve(rng, kT, 0.4));
  const MeanResult mean = quick_mean(curves);
  const CovarianceBlocks blocks = sample_covariance(curves, mean);

  const auto m = assembled_matrix(blocks);
  const Eigen::MatrixXd sigma = to_eigen(m, blocks.dim());
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);

  // blockwise symmetry K(s,t) = K(t,s)^T
  for (std::size_t s = 0; s < kT; s += 7)
    for (std::size_t t = 0; t < kT; t += 5)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(blocks.K[s][t].m[i][j] ==
                doctest::Approx(blocks.K[t][s].m[j][i]).epsilon(1e-12));
}

TEST_CASE("pointwise_covariance: identical curves, trace identity") {
  Rng rng(84);
  const Curve p = random_smooth_curve(rng, kT, 0.4);
  std::vector<Curve> batch{p, p, p};
  MeanResult mean = quick_mean(batch);
  const TensorField zero = pointwise_covariance(batch, mean, false);
  for (double v : trace_profile(zero)) CHECK(std::abs(v) < 1e-8);

  std::vector<Curve> curves;
  for (int i = 0; i < 5; ++i) curves.push_back(random_smooth_curve(rng, kT, 0.4));
  mean = quick_mean(curves);
  const TensorField field = pointwise_covariance(curves, mean, false);
  const auto prof = trace_profile(field);
  for (std::size_t k = 0; k < kT; ++k) {
    Eigen::Matrix2d m;
    m << field.tensors[k].m[0][0], field.tensors[k].m[0][1], field.tensors[k].m[1][0],
        field.tensors[k].m[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
    CHECK(prof[k] ==
          doctest::Approx(eig.eigenvalues()(0) + eig.eigenvalues()(1)).epsilon(1e-12));
    CHECK(eig.eigenvalues()(0) >= -1e-9);
  }
}

TEST_CASE("transport_covariance_along_mean: t=0 fixed, eigenvalues kept, invertible") {
  Rng rng(85);
  std::vector<Curve> curves;
  for (int i = 0; i < 5; ++i) curves.push_back(random_smooth_curve(rng, kT, 0.4));
  const MeanResult mean = quick_mean(curves);
  const TensorField field = pointwise_covariance(curves, mean, false);
  const TensorField moved = transport_covariance_along_mean(field, mean.mean);

  // the first tensor is expressed at the same point and frame
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(moved.tensors[0].m[i][j] ==
            doctest::Approx(field.tensors[0].m[i][j]).epsilon(1e-10));

  for (std::size_t k = 0; k < kT; ++k) {
    Eigen::Matrix2d a, b;
    a << field.tensors[k].m[0][0], field.tensors[k].m[0][1], field.tensors[k].m[1][0],
        field.tensors[k].m[1][1];
    b << moved.tensors[k].m[0][0], moved.tensors[k].m[0][1], moved.tensors[k].m[1][0],
        moved.tensors[k].m[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ea(a), eb(b);
    CHECK(ea.eigenvalues()(0) == doctest::Approx(eb.eigenvalues()(0)).epsilon(1e-9));
    CHECK(ea.eigenvalues()(1) == doctest::Approx(eb.eigenvalues()(1)).epsilon(1e-9));
    // frames stay tangent and orthonormal
    CHECK(std::abs(dot(moved.frames[k][0], moved.base_points[k])) < 1e-9);
    CHECK(std::abs(dot(moved.frames[k][0], moved.frames[k][1])) < 1e-9);
  }

  // round trip back to the start
  const TensorField back = transport_covariance_along_mean(moved, mean.mean, true);
  double worst = 0.0;
  for (std::size_t k = 0; k < kT; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        worst = std::max(worst,
                         std::abs(back.tensors[k].m[i][j] - field.tensors[k].m[i][j]));
  CHECK(worst < 1e-8);
}

TEST_CASE("gp_sample: zero covariance reproduces the mean, fixed seed repeats") {
  Rng rng(86);
  const Curve mean_curve = random_smooth_curve(rng, kT, 0.3);
  const Tsrvc mean_rep = to_tsrvc(mean_curve);

  CovarianceBlocks zero;
  zero.basis = tangent_basis(mean_rep.start);
  zero.k.assign(kT, Mat2{});
  zero.K.assign(kT, std::vector<Mat2>(kT, Mat2{}));
  const auto same = gp_sample(mean_rep, zero, 3, 7);
  for (const Curve& c : same)
    CHECK(testutil::sup_distance(c, from_tsrvc(mean_rep)) < 1e-12);

  const CovarianceBlocks blocks = make_random_blocks(mean_rep.start, kT, 11, 0.3);
  const auto a = gp_sample(mean_rep, blocks, 4, 99);
  const auto b = gp_sample(mean_rep, blocks, 4, 99);
  for (int i = 0; i < 4; ++i)
    CHECK(testutil::sup_distance(a[static_cast<std::size_t>(i)],
                                 b[static_cast<std::size_t>(i)]) == 0.0);
  const auto c = gp_sample(mean_rep, blocks, 4, 100);
  CHECK(testutil::sup_distance(a[0], c[0]) > 0.0);
}

TEST_CASE("gp_sample rejects an indefinite covariance") {
  Rng rng(87);
  const Curve mean_curve = random_smooth_curve(rng, kT, 0.3);
  const Tsrvc mean_rep = to_tsrvc(mean_curve);
  CovarianceBlocks bad = make_random_blocks(mean_rep.start, kT, 3, 0.3);
  bad.kappa.m[0][0] = -0.5;  // forces a strongly negative eigenvalue
  CHECK_THROWS_AS(gp_sample(mean_rep, bad, 1, 0), NotPSD);
}

TEST_CASE("tangent draws reproduce the blocks at large n") {
  Rng rng(88);
  const Curve mean_curve = random_smooth_curve(rng, kT, 0.3);
  const Tsrvc mean_rep = to_tsrvc(mean_curve);
  const CovarianceBlocks blocks = make_random_blocks(mean_rep.start, kT, 5, 0.3);

  const auto draws = gp_sample_tangent(blocks, 2000, 42);
  const auto& basis = blocks.basis;
  const std::size_t d = blocks.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
  for (const TangentElement& v : draws) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    z(0) = dot(v.u.vec(), basis[0].vec());
    z(1) = dot(v.u.vec(), basis[1].vec());
    for (std::size_t k = 0; k < kT; ++k) {
      z(static_cast<Eigen::Index>(2 + 2 * k)) = dot(v.w.get(k), basis[0].vec());
      z(static_cast<Eigen::Index>(2 + 2 * k + 1)) = dot(v.w.get(k), basis[1].vec());
    }
    acc += z * z.transpose();
  }
  acc /= static_cast<double>(draws.size());
  const Eigen::MatrixXd truth = to_eigen(assembled_matrix(blocks), d);
  const double rel = (acc - truth).norm() / truth.norm();
  CHECK(rel < 0.10);
}

TEST_CASE("blocks re-estimated through the exponential maps stay close") {
  // end-to-end: sample curves, invert them at the known mean, re-assemble
  Rng rng(92);
  const std::size_t grid = 80;
  const Curve mean_curve = random_smooth_curve(rng, grid, 0.3);
  const Tsrvc mean_rep = to_tsrvc(mean_curve);
  const CovarianceBlocks blocks = make_random_blocks(mean_rep.start, grid, 5, 0.25);

  const std::size_t n = 500;
  const auto curves = gp_sample(mean_rep, blocks, n, 17);
  const std::size_t d = blocks.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
  for (const Curve& c : curves) {
    const TangentElement v = inverse_exp(mean_rep, to_tsrvc(c), {});
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    z(0) = dot(v.u.vec(), blocks.basis[0].vec());
    z(1) = dot(v.u.vec(), blocks.basis[1].vec());
    for (std::size_t k = 0; k < grid; ++k) {
      z(static_cast<Eigen::Index>(2 + 2 * k)) = dot(v.w.get(k), blocks.basis[0].vec());
      z(static_cast<Eigen::Index>(2 + 2 * k + 1)) = dot(v.w.get(k), blocks.basis[1].vec());
    }
    acc += z * z.transpose();
  }
  acc /= static_cast<double>(n);
  const Eigen::MatrixXd truth = to_eigen(assembled_matrix(blocks), d);
  CHECK((acc - truth).norm() / truth.norm() < 0.25);
}

TEST_CASE("add_phase_variability: zero strength is the identity") {
  Rng rng(89);
  std::vector<Curve> curves;
  for (int i = 0; i < 3; ++i) curves.push_back(random_smooth_curve(rng, kT, 0.4));
  const PhaseInjected same = add_phase_variability(curves, {0.0, 3}, 5);
  for (std::size_t i = 0; i < curves.size(); ++i)
    CHECK(testutil::sup_distance(same.curves[i], curves[i]) == 0.0);

  const PhaseInjected warped = add_phase_variability(curves, {0.5, 3}, 5);
  for (const WarpingFunction& g : warped.gammas) {
    CHECK(g.valid());
    // slopes stay positive
    for (std::size_t k = 1; k < g.size(); ++k)
      CHECK(g.values[k] >= g.values[k - 1] - 1e-12);
  }
}

TEST_CASE("warped curves stay in the same amplitude class") {
  Rng rng(90);
  const Curve p = random_smooth_curve(rng, 150, 0.35);
  const PhaseInjected warped = add_phase_variability({p}, {0.45, 3}, 21);
  const double amp = amplitude_geodesic(warped.curves[0], p, {}).dist_sq;
  CHECK(amp <= 1e-2);
  const double bundle = optimal_theta(to_tsrvc(warped.curves[0]), to_tsrvc(p), {}).dist_sq;
  CHECK(amp <= bundle + 1e-9);
}

TEST_CASE("alignment deflates phase-dominated variance") {
  Rng rng(91);
  const Curve base = random_smooth_curve(rng, 80, 0.35);
  std::vector<Curve> warped;
  for (int i = 0; i < 6; ++i)
    warped.push_back(warp_curve(base, random_warp(rng, 80, 0.35)));

  MeanOptions mopts;
  mopts.max_outer = 30;
  const MeanResult bundle_mean = frechet_mean_bundle(warped, mopts);
  const MeanResult amp_mean = frechet_mean_amplitude(warped, mopts);

  const auto raw = trace_profile(pointwise_covariance(warped, bundle_mean, false));
  const auto aligned = trace_profile(pointwise_covariance(warped, amp_mean, true));
  double raw_mean = 0.0, aligned_mean = 0.0;
  for (double v : raw) raw_mean += v;
  for (double v : aligned) aligned_mean += v;
  raw_mean /= static_cast<double>(raw.size());
  aligned_mean /= static_cast<double>(aligned.size());
  CHECK(aligned_mean <= 0.2 * raw_mean);
}

TEST_CASE("simulate_dataset produces the configured design") {
  SimulationConfig config;
  config.n_means = 3;
  config.per_mean = 4;
  config.grid = 50;
  config.seed = 9;
  config.warp_strength = 0.4;
  const SimulatedData data = simulate_dataset(config);
  CHECK(data.curves.size() == 12);
  CHECK(data.means.size() == 3);
  CHECK(data.gammas.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(data.mean_ids[static_cast<std::size_t>(i)] == i / 4);

  const SimulatedData again = simulate_dataset(config);
  for (std::size_t i = 0; i < data.curves.size(); ++i)
    CHECK(testutil::sup_distance(data.curves[i], again.curves[i]) == 0.0);
}
