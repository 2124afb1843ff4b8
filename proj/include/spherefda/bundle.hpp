#pragma once

#include "spherefda/curves.hpp"

namespace spherefda {

/// Element of the tangent space at a bundle point: a tangent vector at the
/// start plus a tangent field over the grid, both in the same plane.
struct TangentElement {
  TangentVector u;
  kernels::VectorField w;

  std::size_t size() const { return w.size(); }
};

/// Sampled geodesic: the base arc plus S+1 bundle points along it.
struct GeodesicPath {
  CircularArc arc;
  int steps = 0;
  std::vector<Tsrvc> points;
};

struct OptimizerOptions {
  double theta0 = 0.0;
  double step = 0.1;
  double tol = 1e-5;
  int max_iter = 200;
};

/// Result of the 1-D angle search. `converged` is false when the iteration
/// budget or the step floor was hit; the best iterate is still returned.
struct ThetaResult {
  double theta = 0.0;
  double dist_sq = 0.0;
  double grad = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct BaselineParams {
  int n_segments = 60;  // discrete points along each candidate arc
  int n_angles = 120;   // candidate plane angles
};

double inner_product(const TangentElement& a, const TangentElement& b);

double dist_beta_squared(const Tsrvc& a, const Tsrvc& b, double theta);
double dist_beta_squared(const Curve& p0, const Curve& p, double theta);

double grad_theta(const Tsrvc& a, const Tsrvc& b, double theta);
double grad_theta(const Curve& p0, const Curve& p, double theta);

ThetaResult optimal_theta(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts);
ThetaResult optimal_theta(const Curve& p0, const Curve& p, const OptimizerOptions& opts);

GeodesicPath geodesic_path(const Tsrvc& a, const Tsrvc& b, double theta, int steps);
GeodesicPath geodesic_path(const Curve& p0, const Curve& p, double theta, int steps);

double dist_bundle(const Curve& p0, const Curve& p, const OptimizerOptions& opts);
double dist_bundle(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts);

TangentElement inverse_exp(const Tsrvc& a, const Tsrvc& b, const OptimizerOptions& opts);
TangentElement inverse_exp(const Curve& p0, const Curve& p, const OptimizerOptions& opts);

/// Endpoint of the geodesic leaving `a` with initial data `v`. The plane
/// angle of the base arc is chosen so that the constructed arc is the
/// distance-optimal one for the pair (a, result); see bundle.cpp.
Tsrvc exp_map_tsrvc(const Tsrvc& a, const TangentElement& v, const OptimizerOptions& opts);
Curve exp_map(const Curve& p0, const TangentElement& v, const OptimizerOptions& opts);

/// Comparator: squared distance minimized over n_angles plane angles with
/// parallel transport approximated by chaining great-circle transports over
/// n_segments pieces of each candidate arc.
double baseline_dist(const Tsrvc& a, const Tsrvc& b, const BaselineParams& params);
double baseline_dist(const Curve& p0, const Curve& p, const BaselineParams& params);

/// Chained piecewise-geodesic transport matrix along an arc (baseline building
/// block, also used by its amplitude variant).
Mat3 chained_transport_matrix(const CircularArc& arc, int n_segments);

/// Piecewise-geodesic length approximation of an arc.
double chained_arc_length(const CircularArc& arc, int n_segments);

}  // namespace spherefda
