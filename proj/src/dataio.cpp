#include "spherefda/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spherefda {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

SpherePoint latlon_to_sphere(double lat_deg, double lon_deg) {
  if (lat_deg < -90.0 || lat_deg > 90.0)
    throw LatOutOfRange("latitude outside [-90, 90]: " + std::to_string(lat_deg));
  const double lat = lat_deg * kDegToRad, lon = lon_deg * kDegToRad;
  return SpherePoint(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                     std::sin(lat));
}

std::pair<double, double> sphere_to_latlon(const SpherePoint& p) {
  const Vec3& v = p.vec();
  const double lat = std::asin(std::clamp(v.z, -1.0, 1.0)) / kDegToRad;
  const double lon = std::atan2(v.y, v.x) / kDegToRad;
  return {lat, lon};
}

namespace {

bool looks_like_header(const std::vector<std::string>& fields) {
  if (fields.size() < 3) return false;
  const std::string& id = fields[0];
  if (id.size() != 8) return false;
  return std::isalpha(static_cast<unsigned char>(id[0])) &&
         std::isalpha(static_cast<unsigned char>(id[1])) &&
         std::all_of(id.begin() + 2, id.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

double parse_hemisphere(const std::string& raw, char pos, char neg, long line) {
  const std::string s = trim(raw);
  if (s.size() < 2) throw BadCoordinate("coordinate too short: '" + raw + "'", line);
  const char h = s.back();
  double sign;
  if (h == pos)
    sign = 1.0;
  else if (h == neg)
    sign = -1.0;
  else
    throw BadCoordinate("unknown hemisphere letter in '" + raw + "'", line);
  try {
    std::size_t used = 0;
    const double val = std::stod(s.substr(0, s.size() - 1), &used);
    if (used != s.size() - 1) throw std::invalid_argument("trailing junk");
    return sign * val;
  } catch (const std::exception&) {
    throw BadCoordinate("cannot parse coordinate '" + raw + "'", line);
  }
}

}  // namespace

std::vector<TrackRecord> parse_hurdat2(std::istream& in) {
  std::vector<TrackRecord> tracks;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const long header_line = line_no;
    const auto header = split_csv(line);
    if (!looks_like_header(header))
      throw MalformedHeader("expected a storm header, got '" + trim(line) + "'",
                            header_line);
    TrackRecord track;
    track.id = header[0];
    track.name = header[1];
    long rows = 0;
    try {
      rows = std::stol(header[2]);
    } catch (const std::exception&) {
      throw MalformedHeader("row count is not a number: '" + header[2] + "'",
                            header_line);
    }
    if (rows < 0) throw MalformedHeader("negative row count", header_line);

    for (long r = 0; r < rows; ++r) {
      if (!std::getline(in, line))
        throw RowCountMismatch("file ends before the declared " +
                                   std::to_string(rows) + " rows",
                               header_line);
      ++line_no;
      const auto fields = split_csv(line);
      if (fields.size() < 6 || looks_like_header(fields))
        throw RowCountMismatch("data row missing; header declared " +
                                   std::to_string(rows) + " rows",
                               header_line);
      const std::string& date = fields[0];
      const std::string& time = fields[1];
      if (date.size() != 8 || time.size() != 4)
        throw BadCoordinate("bad date/time fields '" + date + "', '" + time + "'",
                            line_no);
      int y, mo, d, hh, mm;
      try {
        y = std::stoi(date.substr(0, 4));
        mo = std::stoi(date.substr(4, 2));
        d = std::stoi(date.substr(6, 2));
        hh = std::stoi(time.substr(0, 2));
        mm = std::stoi(time.substr(2, 2));
      } catch (const std::exception&) {
        throw BadCoordinate("bad date/time fields '" + date + "', '" + time + "'",
                            line_no);
      }
      const double stamp =
          24.0 * static_cast<double>(days_from_civil(y, mo, d)) + hh + mm / 60.0;
      const double lat = parse_hemisphere(fields[4], 'N', 'S', line_no);
      const double lon = parse_hemisphere(fields[5], 'E', 'W', line_no);
      if (lat < -90.0 || lat > 90.0)
        throw BadCoordinate("latitude out of range: " + std::to_string(lat), line_no);
      if (!track.timestamps.empty() && stamp <= track.timestamps.back())
        throw NonMonotoneTime("timestamps not strictly increasing", line_no);
      track.timestamps.push_back(stamp);
      track.points.emplace_back(lat, lon);
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<TrackRecord> parse_hurdat2_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_hurdat2(in);
}

Curve track_to_curve(const TrackRecord& track, std::size_t grid) {
  if (track.size() < 2) throw TooFewSamples("track_to_curve: need at least 2 points");

  // Unwrap longitudes across the +-180 seam before interpolating.
  std::vector<double> lats(track.size()), lons(track.size());
  for (std::size_t k = 0; k < track.size(); ++k) {
    lats[k] = track.points[k].first;
    double lon = track.points[k].second;
    if (k > 0) {
      while (lon - lons[k - 1] > 180.0) lon -= 360.0;
      while (lon - lons[k - 1] < -180.0) lon += 360.0;
    }
    lons[k] = lon;
  }

  const double t0 = track.timestamps.front();
  const double t1 = track.timestamps.back();
  std::vector<Vec3> pts(grid);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double t =
        t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(grid - 1);
    while (seg + 2 < track.size() && track.timestamps[seg + 1] < t) ++seg;
    const double ta = track.timestamps[seg], tb = track.timestamps[seg + 1];
    const double f = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    const Vec3 a = latlon_to_sphere(lats[seg], lons[seg]).vec();
    const Vec3 b = latlon_to_sphere(lats[seg + 1], lons[seg + 1]).vec();
    pts[k] = slerp(a, b, f);
  }
  return Curve(std::move(pts));
}

Curve load_trajectory_csv(const std::string& path, std::size_t grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw BadHeader("empty file", 1);
  ++line_no;
  const auto header = split_csv(line);
  bool latlon;
  if (header.size() == 3 && header[0] == "t" && header[1] == "lat" && header[2] == "lon")
    latlon = true;
  else if (header.size() == 4 && header[0] == "t" && header[1] == "x" &&
           header[2] == "y" && header[3] == "z")
    latlon = false;
  else
    throw BadHeader("expected 't,lat,lon' or 't,x,y,z', got '" + trim(line) + "'", 1);

  std::vector<double> times;
  std::vector<Vec3> raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw BadHeader("wrong number of columns", line_no);
    double vals[4] = {0, 0, 0, 0};
    try {
      for (std::size_t c = 0; c < fields.size(); ++c) vals[c] = std::stod(fields[c]);
    } catch (const std::exception&) {
      throw BadCoordinate("cannot parse row", line_no);
    }
    if (!times.empty() && vals[0] <= times.back())
      throw NonMonotoneTime("time column not strictly increasing", line_no);
    times.push_back(vals[0]);
    if (latlon) {
      if (vals[1] < -90.0 || vals[1] > 90.0)
        throw BadCoordinate("latitude out of range", line_no);
      raw.push_back(latlon_to_sphere(vals[1], vals[2]).vec());
    } else {
      const Vec3 v{vals[1], vals[2], vals[3]};
      if (std::abs(norm(v) - 1.0) > 1e-3)
        throw NonUnitVector("xyz row is not a unit vector", line_no);
      raw.push_back(normalized(v));
    }
  }
  if (times.size() < 2) throw TooFewSamples("need at least 2 rows");

  const double t0 = times.front(), t1 = times.back();
  std::vector<Vec3> pts(grid);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(grid - 1);
    while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
    const double f = std::clamp((t - times[seg]) / (times[seg + 1] - times[seg]), 0.0, 1.0);
    pts[k] = slerp(raw[seg], raw[seg + 1], f);
  }
  return Curve(std::move(pts));
}

void save_trajectory_csv(const std::string& path, const Curve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "t,x,y,z\n";
  out.precision(17);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out << static_cast<double>(k) / static_cast<double>(curve.size() - 1) << ','
        << curve.pts[k].x << ',' << curve.pts[k].y << ',' << curve.pts[k].z << '\n';
  }
}

namespace {

using nlohmann::json;

json grid_array(std::size_t t) {
  json g = json::array();
  for (std::size_t k = 0; k < t; ++k)
    g.push_back(static_cast<double>(k) / static_cast<double>(t - 1));
  return g;
}

json vec_array(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json curve_array(const Curve& c) {
  json out = json::array();
  for (const Vec3& v : c.pts) out.push_back(vec_array(v));
  return out;
}

json mat2_array(const Mat2& m) {
  return json::array({json::array({m.m[0][0], m.m[0][1]}),
                      json::array({m.m[1][0], m.m[1][1]})});
}

void write_doc(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace

void export_geodesic_json(const std::string& path, const GeodesicPath& gp,
                          double theta_star, double dist_sq, bool converged,
                          const WarpingFunction* gamma) {
  json doc;
  doc["kind"] = "geodesic_path";
  const std::size_t t = gp.points.front().size();
  doc["grid"] = grid_array(t);
  doc["steps"] = gp.steps;
  doc["theta_star"] = theta_star;
  doc["d2"] = dist_sq;
  doc["converged"] = converged;
  json frames = json::array();
  json fields = json::array();
  for (const Tsrvc& pt : gp.points) {
    frames.push_back(curve_array(from_tsrvc(pt)));
    json f = json::array();
    for (std::size_t k = 0; k < pt.size(); ++k) f.push_back(vec_array(pt.field.get(k)));
    fields.push_back(std::move(f));
  }
  doc["frames"] = std::move(frames);
  doc["fields"] = std::move(fields);
  if (gamma) doc["gamma_star"] = gamma->values;
  write_doc(path, doc);
}

void export_mean_json(const std::string& path, const MeanResult& mean) {
  json doc;
  doc["kind"] = "mean_result";
  doc["grid"] = grid_array(mean.mean.size());
  doc["mean"] = curve_array(mean.mean);
  doc["thetas"] = mean.thetas;
  doc["frechet_value"] = mean.frechet_value;
  doc["trace"] = mean.trace;
  doc["converged"] = mean.converged;
  if (mean.gammas) {
    json gs = json::array();
    for (const WarpingFunction& g : *mean.gammas) gs.push_back(g.values);
    doc["gammas"] = std::move(gs);
  }
  write_doc(path, doc);
}

namespace {

json tensor_field_json(const TensorField& field, const std::vector<double>& trace) {
  json doc;
  doc["kind"] = "tensor_field";
  doc["grid"] = grid_array(field.size());
  json tensors = json::array(), frames = json::array(), base = json::array();
  for (std::size_t k = 0; k < field.size(); ++k) {
    tensors.push_back(mat2_array(field.tensors[k]));
    frames.push_back(json::array(
        {vec_array(field.frames[k][0]), vec_array(field.frames[k][1])}));
    base.push_back(vec_array(field.base_points[k]));
  }
  doc["tensors"] = std::move(tensors);
  doc["frames"] = std::move(frames);
  doc["base_points"] = std::move(base);
  doc["trace"] = trace;
  return doc;
}

}  // namespace

void export_tensor_field_json(const std::string& path, const TensorField& field,
                              const std::vector<double>& trace) {
  write_doc(path, tensor_field_json(field, trace));
}

void export_matrix_json(const std::string& path,
                        const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>* baseline,
                        const std::vector<double>* improvement) {
  json doc;
  doc["kind"] = "distance_matrix";
  doc["labels"] = labels;
  doc["values"] = values;
  if (baseline) doc["baseline"] = *baseline;
  if (improvement) doc["improvement_percent"] = *improvement;
  write_doc(path, doc);
}

void export_covariance_json(const std::string& path, const CovarianceBlocks& blocks,
                            const TensorField& transported,
                            const std::vector<double>& trace) {
  json doc;
  doc["kind"] = "covariance_blocks";
  const std::size_t t = blocks.grid_size();
  doc["grid"] = grid_array(t);
  doc["kappa"] = mat2_array(blocks.kappa);
  json kk = json::array();
  for (std::size_t s = 0; s < t; ++s) kk.push_back(mat2_array(blocks.k[s]));
  doc["k"] = std::move(kk);
  json big = json::array();
  for (std::size_t s = 0; s < t; ++s) {
    json row = json::array();
    for (std::size_t r = 0; r < t; ++r) row.push_back(mat2_array(blocks.K[s][r]));
    big.push_back(std::move(row));
  }
  doc["K"] = std::move(big);
  doc["basis"] = json::array(
      {vec_array(blocks.basis[0].vec()), vec_array(blocks.basis[1].vec())});
  doc["tensor_field"] = tensor_field_json(transported, trace);
  write_doc(path, doc);
}

std::vector<std::vector<double>> import_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc;
  in >> doc;
  if (doc.value("kind", "") != "distance_matrix")
    throw IoError("'" + path + "' is not a distance_matrix document");
  return doc["values"].get<std::vector<std::vector<double>>>();
}

}  // namespace spherefda
