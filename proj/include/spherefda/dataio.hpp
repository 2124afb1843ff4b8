#pragma once

#include <iosfwd>
#include <string>

#include "spherefda/covariance.hpp"

namespace spherefda {

/// One storm / trajectory straight from a data file: identifiers, strictly
/// increasing timestamps (hours on a continuous civil-time axis), and
/// latitude/longitude points in degrees.
struct TrackRecord {
  std::string id;
  std::string name;
  std::vector<double> timestamps;
  std::vector<std::pair<double, double>> points;  // (lat, lon)

  std::size_t size() const { return points.size(); }
};

SpherePoint latlon_to_sphere(double lat_deg, double lon_deg);
std::pair<double, double> sphere_to_latlon(const SpherePoint& p);

/// NHC HURDAT2 best-track format: a header line
/// "<BASIN><NN><YYYY>, <NAME>, <ROWS>," followed by ROWS data lines.
/// Throws MalformedHeader / RowCountMismatch / BadCoordinate with the
/// offending line number.
std::vector<TrackRecord> parse_hurdat2(std::istream& in);
std::vector<TrackRecord> parse_hurdat2_file(const std::string& path);

/// Affine time normalization to [0,1], longitude unwrapping across the
/// +-180 seam, conversion to unit vectors and resampling to the grid.
Curve track_to_curve(const TrackRecord& track, std::size_t grid);

/// CSV with header "t,lat,lon" or "t,x,y,z"; t strictly increasing.
Curve load_trajectory_csv(const std::string& path, std::size_t grid);

void save_trajectory_csv(const std::string& path, const Curve& curve);

// JSON artifact writers. Each document carries a "kind" tag and the grid.
void export_geodesic_json(const std::string& path, const GeodesicPath& gp,
                          double theta_star, double dist_sq, bool converged,
                          const WarpingFunction* gamma = nullptr);
void export_mean_json(const std::string& path, const MeanResult& mean);
void export_tensor_field_json(const std::string& path, const TensorField& field,
                              const std::vector<double>& trace);
void export_matrix_json(const std::string& path,
                        const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>* baseline = nullptr,
                        const std::vector<double>* improvement = nullptr);
void export_covariance_json(const std::string& path, const CovarianceBlocks& blocks,
                            const TensorField& transported,
                            const std::vector<double>& trace);

std::vector<std::vector<double>> import_matrix_json(const std::string& path);

}  // namespace spherefda
