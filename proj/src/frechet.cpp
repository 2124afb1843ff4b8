#include "spherefda/frechet.hpp"

#include <algorithm>
#include <cmath>

namespace spherefda {

namespace {

/// Cached per-angle state for the fast objective path. The objective
/// decomposes as  const + mean of squared arc lengths - |mean field|^2,
/// since parallel transport preserves each field's norm.
struct MeanState {
  std::vector<double> lengths;             // per-curve arc length
  std::vector<kernels::VectorField> moved; // per-curve transported field
  kernels::VectorField mean;               // running mean field
  double const_term = 0.0;                 // (1/n) sum int |q_i|^2
  std::vector<double> weights;

  double value(std::size_t n) const {
    double len2 = 0.0;
    for (double l : lengths) len2 += l * l;
    const double mean_norm =
        kernels::active().weighted_dot(mean, mean, weights.data(), weights.size());
    return len2 / static_cast<double>(n) + const_term - mean_norm;
  }
};

MeanState build_state(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                      const std::vector<double>& thetas) {
  const std::size_t n = reps.size();
  const std::size_t t = reps.front().size();
  MeanState st;
  st.weights = kernels::trapezoid_weights(t);
  st.lengths.resize(n);
  st.moved.resize(n);
  st.mean.resize(t);
  for (std::size_t i = 0; i < n; ++i) {
    const CircularArc arc = arc_between(reps[i].start, x, thetas[i]);
    st.lengths[i] = arc_length(arc);
    kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), reps[i].field,
                          st.moved[i]);
    kernels::accumulate_scaled(st.moved[i], 1.0 / static_cast<double>(n), st.mean);
    st.const_term += kernels::active().weighted_dot(reps[i].field, reps[i].field,
                                                    st.weights.data(), t) /
                     static_cast<double>(n);
  }
  return st;
}

/// Angle gradient by per-component central differences; only one curve's
/// transported field changes per component, so each entry is O(T).
std::vector<double> theta_gradient(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                                   const std::vector<double>& thetas,
                                   const MeanState& st) {
  const std::size_t n = reps.size();
  const double h = tol::kFdStep;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> grad(n, 0.0);
  kernels::VectorField moved, shifted;
  for (std::size_t i = 0; i < n; ++i) {
    double f[2];
    const double bounds[2] = {std::min(thetas[i] + h, M_PI / 2),
                              std::max(thetas[i] - h, -M_PI / 2)};
    for (int side = 0; side < 2; ++side) {
      const CircularArc arc = arc_between(reps[i].start, x, bounds[side]);
      const double len = arc_length(arc);
      kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), reps[i].field, moved);
      shifted = st.mean;
      kernels::accumulate_scaled(st.moved[i], -inv_n, shifted);
      kernels::accumulate_scaled(moved, inv_n, shifted);
      double len2 = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        len2 += (j == i) ? len * len : st.lengths[j] * st.lengths[j];
      f[side] = len2 * inv_n + st.const_term -
                kernels::active().weighted_dot(shifted, shifted, st.weights.data(),
                                               st.weights.size());
    }
    grad[i] = (f[0] - f[1]) / (bounds[0] - bounds[1]);
  }
  return grad;
}

double grad_norm(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

}  // namespace

Tsrvc mean_tsrvc(const std::vector<Tsrvc>& transported) {
  if (transported.empty()) throw TooFewCurves("mean_tsrvc: no fields");
  const std::size_t t = transported.front().size();
  const SpherePoint base = transported.front().start;
  Tsrvc out;
  out.start = base;
  out.field.resize(t);
  for (const Tsrvc& r : transported) {
    if (dot(r.start, base) < 1.0 - 1e-9)
      throw BaseMismatch("mean_tsrvc: fields live at different base points");
    if (r.size() != t) throw GridMismatch("mean_tsrvc: grid sizes differ");
    kernels::accumulate_scaled(r.field, 1.0 / static_cast<double>(transported.size()),
                               out.field);
  }
  return out;
}

double frechet_function(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                        const std::vector<double>& thetas) {
  const std::size_t n = reps.size();
  if (n == 0) throw TooFewCurves("frechet_function: no curves");
  if (thetas.size() != n) throw GridMismatch("frechet_function: theta count mismatch");
  const std::size_t t = reps.front().size();
  const auto w = kernels::trapezoid_weights(t);

  std::vector<kernels::VectorField> moved(n);
  std::vector<double> lengths(n);
  kernels::VectorField mean(t);
  for (std::size_t i = 0; i < n; ++i) {
    const CircularArc arc = arc_between(reps[i].start, x, thetas[i]);
    lengths[i] = arc_length(arc);
    kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), reps[i].field, moved[i]);
    kernels::accumulate_scaled(moved[i], 1.0 / static_cast<double>(n), mean);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    value += lengths[i] * lengths[i] +
             kernels::active().weighted_sqdiff(moved[i], mean, w.data(), w.size());
  }
  return value / static_cast<double>(n);
}

double frechet_function(const std::vector<Curve>& curves, const SpherePoint& x,
                        const std::vector<double>& thetas) {
  std::vector<Tsrvc> reps;
  reps.reserve(curves.size());
  for (const Curve& c : curves) reps.push_back(to_tsrvc(c));
  return frechet_function(reps, x, thetas);
}

ThetasResult optimal_thetas(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                            const std::vector<double>& theta0, const MeanOptions& opts) {
  const std::size_t n = reps.size();
  ThetasResult res;
  res.thetas = theta0;
  for (double& t : res.thetas) t = std::clamp(t, -M_PI / 2, M_PI / 2);

  MeanState st = build_state(reps, x, res.thetas);
  res.value = st.value(n);
  double lambda = opts.lambda1;
  std::vector<double> grad = theta_gradient(reps, x, res.thetas, st);

  while (res.iterations < opts.max_inner) {
    if (grad_norm(grad) < opts.eps1) {
      res.converged = true;
      return res;
    }
    if (lambda < tol::kStepFloor) return res;
    std::vector<double> cand(n);
    bool in_range = true;
    for (std::size_t i = 0; i < n; ++i) {
      cand[i] = res.thetas[i] - lambda * grad[i];
      if (cand[i] < -M_PI / 2 || cand[i] > M_PI / 2) in_range = false;
    }
    ++res.iterations;
    if (in_range) {
      MeanState cand_st = build_state(reps, x, cand);
      const double cand_val = cand_st.value(n);
      if (cand_val < res.value) {
        res.thetas = std::move(cand);
        res.value = cand_val;
        st = std::move(cand_st);
        grad = theta_gradient(reps, x, res.thetas, st);
        continue;
      }
    }
    lambda *= 0.5;
  }
  return res;
}

TangentVector grad_x_frechet(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                             const std::vector<double>& thetas) {
  const auto basis = tangent_basis(x);
  const double h = tol::kFdStep;
  Vec3 g{0, 0, 0};
  for (const TangentVector& e : basis) {
    const SpherePoint xp = exp_sphere(x, TangentVector(x, e.vec() * h));
    const SpherePoint xm = exp_sphere(x, TangentVector(x, e.vec() * -h));
    const double fp = frechet_function(reps, xp, thetas);
    const double fm = frechet_function(reps, xm, thetas);
    g += e.vec() * ((fp - fm) / (2.0 * h));
  }
  return TangentVector(x, g);
}

namespace {

SpherePoint init_start(const std::vector<Tsrvc>& reps, bool& degenerate) {
  Vec3 sum{0, 0, 0};
  for (const Tsrvc& r : reps) sum += r.start.vec();
  if (norm(sum) < 1e-9) {
    degenerate = true;
    return reps.front().start;
  }
  degenerate = false;
  return SpherePoint(sum);
}

MeanResult finish_mean(const std::vector<Tsrvc>& reps, const SpherePoint& x,
                       const std::vector<double>& thetas) {
  MeanResult out;
  const std::size_t n = reps.size();
  const std::size_t t = reps.front().size();
  out.mean_tsrvc.start = x;
  out.mean_tsrvc.field.resize(t);
  for (std::size_t i = 0; i < n; ++i) {
    const CircularArc arc = arc_between(reps[i].start, x, thetas[i]);
    kernels::VectorField moved;
    kernels::rotate_batch(transport_matrix_along_arc(arc, 1.0), reps[i].field, moved);
    kernels::accumulate_scaled(moved, 1.0 / static_cast<double>(n), out.mean_tsrvc.field);
  }
  out.mean = from_tsrvc(out.mean_tsrvc);
  out.thetas = thetas;
  out.frechet_value = frechet_function(reps, x, thetas);
  return out;
}

}  // namespace

MeanResult frechet_mean_bundle(const std::vector<Curve>& curves, const MeanOptions& opts) {
  if (curves.empty()) throw TooFewCurves("frechet_mean_bundle: no curves");
  std::vector<Tsrvc> reps;
  reps.reserve(curves.size());
  for (const Curve& c : curves) reps.push_back(to_tsrvc(c));

  bool degenerate = false;
  SpherePoint x = init_start(reps, degenerate);
  std::vector<double> thetas(reps.size(), 0.0);

  std::vector<double> trace;
  trace.push_back(frechet_function(reps, x, thetas));
  double lambda2 = opts.lambda2;
  bool converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    ThetasResult ts = optimal_thetas(reps, x, thetas, opts);
    thetas = ts.thetas;
    double value = ts.value;

    const TangentVector g = grad_x_frechet(reps, x, thetas);
    if (g.length() < opts.eps2) {
      trace.push_back(value);
      converged = true;
      break;
    }
    bool accepted = false;
    while (lambda2 >= tol::kStepFloor) {
      const SpherePoint cand = exp_sphere(x, TangentVector(x, g.vec() * -lambda2));
      const double cand_val = frechet_function(reps, cand, thetas);
      if (cand_val < value) {
        x = cand;
        value = cand_val;
        accepted = true;
        break;
      }
      lambda2 *= 0.5;
    }
    trace.push_back(value);
    if (!accepted) break;
  }

  MeanResult out = finish_mean(reps, x, thetas);
  out.trace = std::move(trace);
  out.converged = converged;
  out.degenerate_init = degenerate;
  return out;
}

namespace {

/// Algorithm body shared by the public entry point and the outer mean loop;
/// the latter passes the previous round's alignment in so the objective
/// never restarts from the unaligned configuration.
AlignedThetasResult aligned_descent(const std::vector<Curve>& curves,
                                    const std::vector<Tsrvc>& originals,
                                    const SpherePoint& x,
                                    const std::vector<double>& theta0,
                                    AlignedThetasResult seed, const MeanOptions& opts) {
  const std::size_t n = curves.size();
  const std::size_t t = curves.front().size();

  AlignedThetasResult res = std::move(seed);
  res.thetas = theta0;
  for (double& th : res.thetas) th = std::clamp(th, -M_PI / 2, M_PI / 2);
  res.iterations = 0;
  res.converged = false;

  std::vector<Tsrvc> aligned_reps;
  aligned_reps.reserve(n);
  for (const Curve& c : res.aligned) aligned_reps.push_back(to_tsrvc(c));
  res.value = frechet_function(aligned_reps, x, res.thetas);
  double lambda = opts.lambda1;
  bool realign = true;

  while (res.iterations < opts.max_inner) {
    ++res.iterations;

    if (realign) {
      // Procrustes pass: mean of the transported aligned fields, then each
      // original field re-warped toward it.
      std::vector<Tsrvc> cand_reps(n);
      std::vector<WarpingFunction> cand_gammas(n);
      std::vector<Curve> cand_curves(n);
      kernels::VectorField mean(t);
      std::vector<Mat3> transports(n);
      for (std::size_t i = 0; i < n; ++i) {
        const CircularArc arc = arc_between(originals[i].start, x, res.thetas[i]);
        transports[i] = transport_matrix_along_arc(arc, 1.0);
        kernels::VectorField moved;
        kernels::rotate_batch(transports[i], aligned_reps[i].field, moved);
        kernels::accumulate_scaled(moved, 1.0 / static_cast<double>(n), mean);
      }
      for (std::size_t i = 0; i < n; ++i) {
        kernels::VectorField moved;
        kernels::rotate_batch(transports[i], originals[i].field, moved);
        cand_gammas[i] = refine_warp(moved, mean,
                                     dp_align(moved, mean, static_cast<int>(t)));
        cand_curves[i] = warp_curve(curves[i], cand_gammas[i]);
        cand_reps[i] = to_tsrvc(cand_curves[i]);
      }
      const double cand_val = frechet_function(cand_reps, x, res.thetas);
      if (cand_val < res.value) {
        res.value = cand_val;
        res.gammas = std::move(cand_gammas);
        res.aligned = std::move(cand_curves);
        aligned_reps = std::move(cand_reps);
      }
      realign = false;
    }

    MeanState st = build_state(aligned_reps, x, res.thetas);
    const std::vector<double> grad = theta_gradient(aligned_reps, x, res.thetas, st);
    if (grad_norm(grad) < opts.eps1) {
      res.converged = true;
      break;
    }
    if (lambda < tol::kStepFloor) break;
    std::vector<double> cand(n);
    bool in_range = true;
    for (std::size_t i = 0; i < n; ++i) {
      cand[i] = res.thetas[i] - lambda * grad[i];
      if (cand[i] < -M_PI / 2 || cand[i] > M_PI / 2) in_range = false;
    }
    if (in_range) {
      const double cand_val = frechet_function(aligned_reps, x, cand);
      if (cand_val < res.value) {
        res.thetas = std::move(cand);
        res.value = cand_val;
        realign = true;  // the mean moved, refresh the alignment
        continue;
      }
    }
    lambda *= 0.5;
  }
  return res;
}

}  // namespace

AlignedThetasResult aligned_optimal_thetas(const std::vector<Curve>& curves,
                                           const SpherePoint& x,
                                           const std::vector<double>& theta0,
                                           const MeanOptions& opts) {
  std::vector<Tsrvc> originals;
  originals.reserve(curves.size());
  for (const Curve& c : curves) originals.push_back(to_tsrvc(c));
  AlignedThetasResult seed;
  seed.aligned = curves;
  seed.gammas.assign(curves.size(), WarpingFunction::identity(curves.front().size()));
  return aligned_descent(curves, originals, x, theta0, std::move(seed), opts);
}

MeanResult frechet_mean_amplitude(const std::vector<Curve>& curves,
                                  const MeanOptions& opts) {
  if (curves.empty()) throw TooFewCurves("frechet_mean_amplitude: no curves");
  std::vector<Tsrvc> originals;
  originals.reserve(curves.size());
  for (const Curve& c : curves) originals.push_back(to_tsrvc(c));

  bool degenerate = false;
  SpherePoint x = init_start(originals, degenerate);
  std::vector<double> thetas(curves.size(), 0.0);

  std::vector<double> trace;
  trace.push_back(frechet_function(originals, x, thetas));

  AlignedThetasResult at;
  at.aligned = curves;
  at.gammas.assign(curves.size(), WarpingFunction::identity(curves.front().size()));
  double lambda2 = opts.lambda2;
  bool converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    at = aligned_descent(curves, originals, x, thetas, std::move(at), opts);
    thetas = at.thetas;
    double value = at.value;

    std::vector<Tsrvc> aligned_reps;
    aligned_reps.reserve(at.aligned.size());
    for (const Curve& c : at.aligned) aligned_reps.push_back(to_tsrvc(c));

    const TangentVector g = grad_x_frechet(aligned_reps, x, thetas);
    if (g.length() < opts.eps2) {
      trace.push_back(value);
      converged = true;
      break;
    }
    bool accepted = false;
    while (lambda2 >= tol::kStepFloor) {
      const SpherePoint cand = exp_sphere(x, TangentVector(x, g.vec() * -lambda2));
      const double cand_val = frechet_function(aligned_reps, cand, thetas);
      if (cand_val < value) {
        x = cand;
        value = cand_val;
        accepted = true;
        break;
      }
      lambda2 *= 0.5;
    }
    trace.push_back(value);
    if (!accepted) break;
  }

  if (at.aligned.empty()) {  // zero outer rounds cannot happen, but stay safe
    at.aligned = curves;
    at.gammas.assign(curves.size(), WarpingFunction::identity(curves.front().size()));
  }
  std::vector<Tsrvc> aligned_reps;
  aligned_reps.reserve(at.aligned.size());
  for (const Curve& c : at.aligned) aligned_reps.push_back(to_tsrvc(c));

  MeanResult out = finish_mean(aligned_reps, x, thetas);
  out.gammas = at.gammas;
  out.trace = std::move(trace);
  out.converged = converged;
  out.degenerate_init = degenerate;
  return out;
}

}  // namespace spherefda
