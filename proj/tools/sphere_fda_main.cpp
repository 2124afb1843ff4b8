// sphere-fda: geodesics, alignment, means, covariance and simulation for
// spherical trajectory data. Emits JSON artifacts for external plotting.

#include <atomic>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <thread>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spherefda/dataio.hpp"

namespace {

using namespace spherefda;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

struct CliConfig {
  RunConfig run;
  std::string out = "out.json";
  std::string config_path;
};

/// key=value config file; flags given on the command line win.
void apply_config_file(const std::string& path, RunConfig& run) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    if (key == "grid") run.grid_size = std::stoi(value);
    else if (key == "lambda1") run.lambda1 = std::stod(value);
    else if (key == "lambda2") run.lambda2 = std::stod(value);
    else if (key == "epsilon") run.epsilon = std::stod(value);
    else if (key == "max_iter") run.max_iter = std::stoi(value);
    else if (key == "seed") run.seed = std::stoull(value);
    else if (key == "min_track_points") run.min_track_points = std::stoi(value);
    else throw Error("unknown config key '" + key + "'");
  }
}

OptimizerOptions optimizer_options(const RunConfig& run) {
  OptimizerOptions o;
  o.step = run.lambda1;
  o.tol = run.epsilon;
  o.max_iter = run.max_iter;
  return o;
}

MeanOptions mean_options(const RunConfig& run) {
  MeanOptions o;
  o.lambda1 = run.lambda1;
  o.lambda2 = run.lambda2;
  o.eps1 = o.eps2 = run.epsilon;
  o.max_inner = run.max_iter;
  o.max_outer = run.max_iter;
  return o;
}

bool looks_like_hurdat(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  std::string first;
  if (!std::getline(in, first)) return false;
  // storm header: two letters, six digits, then name and row count
  if (first.size() < 8) return false;
  if (!std::isalpha(static_cast<unsigned char>(first[0])) ||
      !std::isalpha(static_cast<unsigned char>(first[1])))
    return false;
  for (int i = 2; i < 8; ++i)
    if (!std::isdigit(static_cast<unsigned char>(first[static_cast<std::size_t>(i)])))
      return false;
  return first.find(',') != std::string::npos;
}

/// Curve inputs: each path is either a single-curve CSV or a HURDAT2
/// archive contributing one curve per sufficiently long track.
std::vector<Curve> load_curves(const std::vector<std::string>& paths,
                               const RunConfig& run) {
  std::vector<Curve> out;
  for (const auto& p : paths) {
    if (looks_like_hurdat(p)) {
      for (const TrackRecord& track : parse_hurdat2_file(p)) {
        if (static_cast<int>(track.size()) < run.min_track_points) continue;
        out.push_back(track_to_curve(track, run.grid_size));
      }
    } else {
      out.push_back(load_trajectory_csv(p, run.grid_size));
    }
  }
  return out;
}

int cmd_geodesic(const std::vector<std::string>& inputs, bool amplitude,
                 const CliConfig& cfg) {
  const std::vector<Curve> curves = load_curves(inputs, cfg.run);
  if (curves.size() != 2) {
    std::cerr << "geodesic: expected exactly 2 curves, got " << curves.size() << '\n';
    return kExitValidation;
  }
  const Curve& a = curves[0];
  const Curve& b = curves[1];
  const OptimizerOptions opts = optimizer_options(cfg.run);

  bool converged;
  if (amplitude) {
    const AlignmentResult ar = amplitude_geodesic(a, b, opts);
    const Curve warped = warp_curve(a, ar.gamma_star);
    const GeodesicPath path = geodesic_path(warped, b, ar.theta_star, 10);
    export_geodesic_json(cfg.out, path, ar.theta_star, ar.dist_sq, ar.converged,
                         &ar.gamma_star);
    converged = ar.converged;
    std::cout << "theta_star=" << ar.theta_star << " d2=" << ar.dist_sq
              << " converged=" << (converged ? "yes" : "no") << '\n';
  } else {
    const ThetaResult tr = optimal_theta(a, b, opts);
    const GeodesicPath path = geodesic_path(a, b, tr.theta, 10);
    export_geodesic_json(cfg.out, path, tr.theta, tr.dist_sq, tr.converged);
    converged = tr.converged;
    std::cout << "theta_star=" << tr.theta << " d2=" << tr.dist_sq
              << " converged=" << (converged ? "yes" : "no") << '\n';
  }
  return converged ? kExitOk : kExitNotConverged;
}

int cmd_mean(const std::vector<std::string>& inputs, bool amplitude,
             const CliConfig& cfg) {
  const std::vector<Curve> curves = load_curves(inputs, cfg.run);
  if (curves.empty()) {
    std::cerr << "mean: no curves loaded\n";
    return kExitValidation;
  }
  const MeanOptions opts = mean_options(cfg.run);
  const MeanResult mean =
      amplitude ? frechet_mean_amplitude(curves, opts) : frechet_mean_bundle(curves, opts);
  export_mean_json(cfg.out, mean);
  std::cout << "frechet_value=" << mean.frechet_value
            << " iterations=" << mean.trace.size() - 1
            << " converged=" << (mean.converged ? "yes" : "no") << '\n';
  return mean.converged ? kExitOk : kExitNotConverged;
}

int cmd_distmat(const std::vector<std::string>& inputs, bool amplitude,
                const std::vector<int>& baseline_nm, const CliConfig& cfg) {
  const std::vector<Curve> curves = load_curves(inputs, cfg.run);
  const std::size_t n = curves.size();
  if (n < 2) {
    std::cerr << "distmat: need at least 2 curves\n";
    return kExitValidation;
  }
  const OptimizerOptions opts = optimizer_options(cfg.run);

  // Independent pairs run concurrently; each writes only its own slot, so
  // the output is identical for any completion order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> results(pairs.size(), 0.0);

  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(pairs.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < pairs.size();
         idx = next.fetch_add(1)) {
      const auto [i, j] = pairs[idx];
      results[idx] = amplitude
                         ? amplitude_geodesic(curves[i], curves[j], opts).dist_sq
                         : optimal_theta(curves[i], curves[j], opts).dist_sq;
    }
  };
  std::vector<std::thread> threads;
  for (unsigned w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();

  std::vector<std::vector<double>> d2(n, std::vector<double>(n, 0.0));
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    const auto [i, j] = pairs[idx];
    d2[i][j] = d2[j][i] = results[idx];
  }

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("curve_" + std::to_string(i));
  if (!baseline_nm.empty()) {
    BaselineParams params;
    params.n_segments = baseline_nm[0];
    params.n_angles = baseline_nm[1];
    std::vector<std::vector<double>> base(n, std::vector<double>(n, 0.0));
    std::vector<double> improvement;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = amplitude
                             ? baseline_amplitude_dist_sq(curves[i], curves[j], params)
                             : baseline_dist(curves[i], curves[j], params);
        base[i][j] = base[j][i] = v;
        if (v > 0.0) improvement.push_back(100.0 * (v - d2[i][j]) / v);
      }
    }
    export_matrix_json(cfg.out, d2, labels, &base, &improvement);
    double mean_imp = 0.0;
    for (double v : improvement) mean_imp += v;
    if (!improvement.empty()) mean_imp /= static_cast<double>(improvement.size());
    std::cout << "pairs=" << n * (n - 1) / 2 << " mean_improvement_percent=" << mean_imp
              << '\n';
  } else {
    export_matrix_json(cfg.out, d2, labels);
    std::cout << "pairs=" << n * (n - 1) / 2 << '\n';
  }
  return kExitOk;
}

int cmd_covariance(const std::vector<std::string>& inputs, bool aligned,
                   const CliConfig& cfg) {
  const std::vector<Curve> curves = load_curves(inputs, cfg.run);
  if (curves.size() < 2) {
    std::cerr << "covariance: need at least 2 curves\n";
    return kExitValidation;
  }
  const MeanOptions mopts = mean_options(cfg.run);
  const OptimizerOptions opts = optimizer_options(cfg.run);
  const MeanResult mean =
      aligned ? frechet_mean_amplitude(curves, mopts) : frechet_mean_bundle(curves, mopts);
  const CovarianceBlocks blocks = sample_covariance(curves, mean, opts);
  const TensorField field = pointwise_covariance(curves, mean, aligned, opts);
  const TensorField transported = transport_covariance_along_mean(field, mean.mean);
  const std::vector<double> trace = trace_profile(transported);
  export_covariance_json(cfg.out, blocks, transported, trace);
  double mean_trace = 0.0;
  for (double v : trace) mean_trace += v;
  std::cout << "mean_trace=" << mean_trace / static_cast<double>(trace.size()) << '\n';
  return kExitOk;
}

/// FNV-1a over the serialized curves; stable manifest fingerprint.
std::uint64_t content_hash(const SimulatedData& data) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const Curve& c : data.curves)
    for (const Vec3& p : c.pts) {
      mix(p.x);
      mix(p.y);
      mix(p.z);
    }
  return h;
}

int cmd_simulate(const std::string& out_dir, int means, int per_mean,
                 double warp_strength, const CliConfig& cfg) {
  SimulationConfig sim;
  sim.n_means = means;
  sim.per_mean = per_mean;
  sim.grid = cfg.run.grid_size;
  sim.warp_strength = warp_strength;
  sim.seed = cfg.run.seed;
  const SimulatedData data = simulate_dataset(sim);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

  nlohmann::json manifest;
  manifest["kind"] = "simulation_manifest";
  manifest["seed"] = sim.seed;
  manifest["grid"] = sim.grid;
  manifest["warp_strength"] = sim.warp_strength;
  manifest["content_hash"] = content_hash(data);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < data.curves.size(); ++i) {
    std::ostringstream name;
    name << "curve_" << i << ".csv";
    save_trajectory_csv((fs::path(out_dir) / name.str()).string(), data.curves[i]);
    nlohmann::json entry;
    entry["file"] = name.str();
    entry["mean_id"] = data.mean_ids[i];
    if (!data.gammas.empty()) entry["gamma"] = data.gammas[i].values;
    files.push_back(std::move(entry));
  }
  manifest["curves"] = std::move(files);
  nlohmann::json mean_files = nlohmann::json::array();
  for (std::size_t m = 0; m < data.means.size(); ++m) {
    std::ostringstream name;
    name << "mean_" << m << ".csv";
    save_trajectory_csv((fs::path(out_dir) / name.str()).string(), data.means[m]);
    mean_files.push_back(name.str());
  }
  manifest["means"] = std::move(mean_files);

  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.dump(2) << '\n';
  std::cout << "curves=" << data.curves.size() << " hash=" << content_hash(data) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesics, alignment, means and covariance for trajectories on the unit sphere"};
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig cfg;
  app.add_option("--grid", cfg.run.grid_size, "common grid size T")->check(CLI::Range(10, 100000));
  app.add_option("--seed", cfg.run.seed, "random seed");
  app.add_option("--out", cfg.out, "output JSON path");
  app.add_option("--config", cfg.config_path, "key=value config file");
  app.add_option("--lambda1", cfg.run.lambda1, "angle-block step size");
  app.add_option("--lambda2", cfg.run.lambda2, "start-point step size");
  app.add_option("--epsilon", cfg.run.epsilon, "gradient stopping threshold");
  app.add_option("--max-iter", cfg.run.max_iter, "iteration budget");

  std::vector<std::string> inputs;
  bool amplitude = false, aligned = false;
  std::vector<int> baseline_nm;

  auto* geodesic = app.add_subcommand("geodesic", "geodesic between two trajectories");
  geodesic->add_option("curves", inputs, "two curves (CSV files or one HURDAT2 archive)")->expected(-1)->required();
  geodesic->add_flag("--amplitude", amplitude, "quotient out time warping");

  auto* mean = app.add_subcommand("mean", "sample mean of trajectories");
  mean->add_option("curves", inputs, "curve CSV files")->expected(-1)->required();
  mean->add_flag("--amplitude", amplitude, "mean of amplitudes");

  auto* distmat = app.add_subcommand("distmat", "pairwise squared distance matrix");
  distmat->add_option("curves", inputs, "curve CSV files")->expected(-1)->required();
  distmat->add_flag("--amplitude", amplitude, "amplitude distances");
  distmat->add_option("--baseline", baseline_nm,
                      "also run the piecewise-geodesic comparator with N segments, M angles")
      ->expected(2);

  auto* covariance = app.add_subcommand("covariance", "tangent covariance at the mean");
  covariance->add_option("curves", inputs, "curve CSV files")->expected(-1)->required();
  covariance->add_flag("--aligned", aligned, "align curves first (amplitude mean)");

  std::string sim_out = "simulated";
  int sim_means = 8, sim_per_mean = 10;
  double sim_warp = 0.6;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("--out-dir", sim_out, "output directory");
  simulate->add_option("--means", sim_means, "number of template curves");
  simulate->add_option("--samples", sim_per_mean, "samples per template");
  simulate->add_option("--warp-strength", sim_warp, "phase-injection strength (0 disables)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!cfg.config_path.empty()) apply_config_file(cfg.config_path, cfg.run);

    if (geodesic->parsed()) return cmd_geodesic(inputs, amplitude, cfg);
    if (mean->parsed()) return cmd_mean(inputs, amplitude, cfg);
    if (distmat->parsed()) return cmd_distmat(inputs, amplitude, baseline_nm, cfg);
    if (covariance->parsed()) return cmd_covariance(inputs, aligned, cfg);
    if (simulate->parsed()) return cmd_simulate(sim_out, sim_means, sim_per_mean, sim_warp, cfg);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
