#include "ambres/scenario_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ambres::gnss {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, what + " must be a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, what + " must be square");
    }
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row[k].get<double>();
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

NoiseSpec noise_from_json(const json& j, NoiseSpec fallback) {
  if (j.is_null()) return fallback;
  NoiseSpec n;
  n.time_varying = j.value("time_varying", fallback.time_varying);
  n.time_constant = j.value("time_constant", fallback.time_constant);
  return n;
}

std::optional<Matrix> precision_from_json(const json& j, const std::string& what) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    if (j.get<std::string>() == "non_informative") return std::nullopt;
    throw Error(ErrorCode::ParseError, what + ": expected \"non_informative\" or {\"precision\": ...}");
  }
  if (!j.contains("precision")) throw Error(ErrorCode::ParseError, what + " needs a precision matrix");
  return matrix_from_json(j["precision"], what);
}

}  // namespace

std::vector<EpochGeometry> read_los_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::map<long, std::map<long, Eigen::Vector3d>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double epoch = 0, sat = 0;
    Eigen::Vector3d e;
    if (!(ss >> epoch >> sat >> e.x() >> e.y() >> e.z())) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::ParseError, "bad LOS row: " + line);
    }
    first = false;
    rows[std::lround(epoch)][std::lround(sat)] = e;
  }
  std::vector<EpochGeometry> out;
  for (const auto& [ep, sats] : rows) {
    EpochGeometry g;
    for (const auto& [id, e] : sats) g.push_back(e);
    out.push_back(std::move(g));
  }
  return out;
}

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario JSON: ") + e.what());
  }
  Scenario s;
  try {
    s.n_epochs = j.value("n_epochs", s.n_epochs);
    s.epoch_interval = j.value("epoch_interval", s.epoch_interval);
    s.measurement_set = parse_measurement_set(j.value("measurement_set", std::string("L1+L2+L5")));
    s.carrier_noise = noise_from_json(j.value("carrier_noise", json()), s.carrier_noise);
    s.code_noise = noise_from_json(j.value("code_noise", json()), s.code_noise);
    s.ar1_phase = j.value("ar1_phase", s.ar1_phase);
    s.ar1_code = j.value("ar1_code", s.ar1_code);
    s.sigma_delta_iono = j.value("sigma_delta_iono", s.sigma_delta_iono);
    const std::string coords = j.value("coordinates_prior", std::string("kinematic"));
    if (coords == "static") {
      s.coordinates_prior = CoordinatesPrior::Static;
    } else if (coords == "kinematic") {
      s.coordinates_prior = CoordinatesPrior::Kinematic;
    } else {
      throw Error(ErrorCode::ParseError, "coordinates_prior must be static or kinematic");
    }
    s.windup_informed = j.value("windup_informed", s.windup_informed);
    s.bias_precision = precision_from_json(j.value("interfrequency_bias_prior", json()), "interfrequency_bias_prior");
    s.iono_precision = precision_from_json(j.value("iono_prior_override", json()), "iono_prior_override");
    s.pre_measurement_epochs = j.value("pre_measurement_epochs", s.pre_measurement_epochs);
    s.pre_noise_scale = j.value("pre_noise_scale", s.pre_noise_scale);
    if (j.contains("pre_measurement_set")) {
      s.pre_measurement_set = parse_measurement_set(j["pre_measurement_set"].get<std::string>());
    }

    const json sats = j.value("satellites", json());
    if (sats.is_null()) throw Error(ErrorCode::ParseError, "scenario needs a satellites entry");
    const int total = s.n_epochs + s.pre_measurement_epochs;
    if (sats.contains("synthetic")) {
      const json& syn = sats["synthetic"];
      s.satellites = synthetic_constellation(syn.value("n_sat", 7), total * s.epoch_interval,
                                             syn.value("seed", std::uint64_t{1}), s.epoch_interval,
                                             syn.value("start", 0.0));
      if (static_cast<int>(s.satellites.size()) != total) {
        // A zero-length window yields one epoch; repeat it.
        s.satellites.resize(total, s.satellites.front());
      }
    } else if (sats.contains("los_csv")) {
      std::filesystem::path p(sats["los_csv"].get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      s.satellites = read_los_csv(p.string());
    } else if (sats.contains("los")) {
      for (const json& epoch : sats["los"]) {
        EpochGeometry g;
        for (const json& e : epoch) g.emplace_back(e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>());
        s.satellites.push_back(std::move(g));
      }
    } else {
      throw Error(ErrorCode::ParseError, "satellites needs synthetic, los_csv or los");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario field: ") + e.what());
  }
  validate(s);
  return s;
}

Scenario read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["n_epochs"] = s.n_epochs;
  j["epoch_interval"] = s.epoch_interval;
  j["measurement_set"] = to_string(s.measurement_set);
  j["carrier_noise"] = {{"time_varying", s.carrier_noise.time_varying}, {"time_constant", s.carrier_noise.time_constant}};
  j["code_noise"] = {{"time_varying", s.code_noise.time_varying}, {"time_constant", s.code_noise.time_constant}};
  j["ar1_phase"] = s.ar1_phase;
  j["ar1_code"] = s.ar1_code;
  j["sigma_delta_iono"] = s.sigma_delta_iono;
  j["coordinates_prior"] = to_string(s.coordinates_prior);
  j["windup_informed"] = s.windup_informed;
  if (s.bias_precision) {
    j["interfrequency_bias_prior"] = {{"precision", matrix_to_json(*s.bias_precision)}};
  } else {
    j["interfrequency_bias_prior"] = "non_informative";
  }
  if (s.iono_precision) j["iono_prior_override"] = {{"precision", matrix_to_json(*s.iono_precision)}};
  j["pre_measurement_epochs"] = s.pre_measurement_epochs;
  if (s.pre_measurement_set) j["pre_measurement_set"] = to_string(*s.pre_measurement_set);
  j["pre_noise_scale"] = s.pre_noise_scale;
  json los = json::array();
  for (const auto& epoch : s.satellites) {
    json g = json::array();
    for (const auto& e : epoch) g.push_back({e.x(), e.y(), e.z()});
    los.push_back(g);
  }
  j["satellites"] = {{"los", los}};
  return j.dump(2);
}

}  // namespace ambres::gnss
