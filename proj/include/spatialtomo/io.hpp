// Copyright 2026 The spatialtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// File formats: run configs, density matrices, count records and
// reconstruction results. JSON on disk uses mm / nm / s / Hz with the unit in
// the key name. In memory everything is SI.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/measurement.hpp"
#include "spatialtomo/mle.hpp"
#include "spatialtomo/states.hpp"
#include "spatialtomo/tomography.hpp"

namespace spatialtomo::io {

using json = nlohmann::ordered_json;

inline constexpr double kMm = 1e-3;
inline constexpr double kNm = 1e-9;

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key) + ": missing");
  return *it;
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
  return x;
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  return as_number(require(j, key, path), join(path, key));
}

inline std::optional<double> opt_number(const json& j, const std::string& key,
                                        const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j, key, path);
}

inline bool boolean(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(join(path, key) + ": expected true/false");
  return j.at(key).get<bool>();
}

inline std::string string(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline std::uint64_t unsigned_int(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(where + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from(const json& v, const std::string& where) {
  if (v.is_number()) return {as_number(v, where), 0.0};
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [re, im]");
  return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
}

}  // namespace detail

// ---- text output ----------------------------------------------------------

// Shortest form that round-trips a double. nlohmann uses the same
// algorithm, so files and CSV agree digit for digit.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  json j = v;
  return j.dump();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot write");
  out << text;
  if (!out) throw ConfigError(path + ": write failed");
}

// ---- geometry -------------------------------------------------------------

inline Geometry geometry_from_json(const json& j, const std::string& path = "geometry") {
  using detail::number;
  Geometry g;
  g.lambda_pump = number(j, "lambda_pump_nm", path) * kNm;
  g.z_A = number(j, "z_a_mm", path) * kMm;
  g.z = g.z_A + number(j, "z_minus_za_mm", path) * kMm;
  g.s = number(j, "s_mm", path) * kMm;
  g.a = number(j, "a_mm", path) * kMm;
  g.b = number(j, "b_mm", path) * kMm;
  if (auto L = detail::opt_number(j, "L_mm", path)) g.L_override = *L * kMm;
  return g;
}

inline json to_json(const Geometry& g) {
  json j;
  j["lambda_pump_nm"] = g.lambda_pump / kNm;
  j["z_a_mm"] = g.z_A / kMm;
  j["z_minus_za_mm"] = (g.z - g.z_A) / kMm;
  j["s_mm"] = g.s / kMm;
  j["a_mm"] = g.a / kMm;
  j["b_mm"] = g.b / kMm;
  if (g.L_override) j["L_mm"] = *g.L_override / kMm;
  return j;
}

// ---- pump -----------------------------------------------------------------

inline PumpProfile pump_from_json(const json& j, const std::string& path = "pump") {
  const std::string type = detail::string(j, "type", path);
  PumpProfile p;
  if (type == "plane_wave") {
    p = PlaneWavePump{};
  } else if (type == "gaussian") {
    GaussianPump g;
    g.waist = detail::number(j, "waist_mm", path) * kMm;
    g.center = detail::opt_number(j, "center_mm", path).value_or(0.0) * kMm;
    p = g;
  } else if (type == "odd_mode") {
    OddModePump o;
    o.waist = detail::number(j, "waist_mm", path) * kMm;
    p = o;
  } else if (type == "tabulated") {
    TabulatedPump t;
    const auto& rows = detail::require(j, "samples", path);
    const std::string where = detail::join(path, "samples");
    if (!rows.is_array()) throw ConfigError(where + ": expected an array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string at = where + "[" + std::to_string(i) + "]";
      PumpSample s;
      s.x = detail::number(rows[i], "x_mm", at) * kMm;
      s.value = detail::cplx_from(detail::require(rows[i], "value", at), at + ".value");
      t.samples.push_back(s);
    }
    p = t;
  } else {
    throw ConfigError(detail::join(path, "type") + ": unknown pump type '" + type +
                      "' (plane_wave, gaussian, odd_mode, tabulated)");
  }
  try {
    validate_pump(p);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

// ---- density matrices -----------------------------------------------------

inline json basis_json() { return json::array({"++", "+-", "-+", "--"}); }

inline json rho_json(const Matrix4c& rho) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(detail::cplx_json(rho(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline Matrix4c rho_from_json(const json& j, const std::string& path = "rho") {
  if (!j.is_array() || j.size() != 4) throw ConfigError(path + ": expected 4 rows");
  Matrix4c m;
  for (int r = 0; r < 4; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != 4) throw ConfigError(rp + ": expected 4 entries");
    for (int c = 0; c < 4; ++c)
      m(r, c) = detail::cplx_from(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline json density_json(const Matrix4c& rho) {
  json j;
  j["basis"] = basis_json();
  j["rho"] = rho_json(rho);
  return j;
}

// Reads any document with a top-level "rho" (state files and reconstruction
// results alike).
inline DensityMatrix read_density(const std::string& file) {
  const json j = read_json_file(file);
  const Matrix4c m = rho_from_json(detail::require(j, "rho", ""), "rho");
  try {
    return DensityMatrix(m);
  } catch (const std::exception& e) {
    throw ConfigError(file + ": rho: " + e.what());
  }
}

// ---- count records --------------------------------------------------------

inline json arm_json(const Arm& arm) {
  json j;
  if (const auto* s = std::get_if<SlitPlane>(&arm)) {
    j["plane"] = "slit";
    j["slit"] = to_string(s->slit);
  } else {
    j["plane"] = "detection";
    j["x_mm"] = std::get<DetectionPlane>(arm).x / kMm;
  }
  return j;
}

inline Arm arm_from_json(const json& j, const std::string& path) {
  const std::string plane = detail::string(j, "plane", path);
  if (plane == "slit") {
    const std::string s = detail::string(j, "slit", path);
    if (s == "+") return SlitPlane{Slit::plus};
    if (s == "-") return SlitPlane{Slit::minus};
    throw ConfigError(detail::join(path, "slit") + ": expected \"+\" or \"-\"");
  }
  if (plane == "detection") return DetectionPlane{detail::number(j, "x_mm", path) * kMm};
  throw ConfigError(detail::join(path, "plane") + ": expected \"slit\" or \"detection\"");
}

inline json to_json(const CountRecord& rec) {
  json j;
  json settings = json::array(), counts = json::array(), times = json::array();
  json rates = json::array();
  bool have_rates = true;
  for (const auto& e : rec.entries) {
    json s;
    s["id"] = e.setting.id;
    s["arm_s"] = arm_json(e.setting.signal);
    s["arm_i"] = arm_json(e.setting.idler);
    settings.push_back(s);
    counts.push_back(e.counts);
    times.push_back(e.time);
    if (e.exact_rate) rates.push_back(*e.exact_rate);
    else have_rates = false;
  }
  j["settings"] = settings;
  j["counts"] = counts;
  j["time_s"] = times;
  j["R0_hz"] = rec.R0;
  j["chi"] = rec.chi;
  j["noiseless"] = rec.noiseless;
  if (rec.seed) j["seed"] = *rec.seed;
  if (have_rates && !rec.entries.empty()) j["exact_rates"] = rates;
  return j;
}

inline CountRecord count_record_from_json(const json& j) {
  CountRecord rec;
  const auto& settings = detail::require(j, "settings", "");
  const auto& counts = detail::require(j, "counts", "");
  const auto& times = detail::require(j, "time_s", "");
  if (!settings.is_array() || !counts.is_array())
    throw ConfigError("settings/counts: expected arrays");
  const std::size_t n = settings.size();
  if (counts.size() != n) throw ConfigError("counts: length differs from settings");
  if (times.is_array() && times.size() != n) throw ConfigError("time_s: length differs from settings");
  const json* rates = j.contains("exact_rates") ? &j.at("exact_rates") : nullptr;
  if (rates && (!rates->is_array() || rates->size() != n))
    throw ConfigError("exact_rates: length differs from settings");
  for (std::size_t k = 0; k < n; ++k) {
    const std::string at = "settings[" + std::to_string(k) + "]";
    CountEntry e;
    const auto& id = detail::require(settings[k], "id", at);
    if (!id.is_number_integer()) throw ConfigError(at + ".id: expected an integer");
    e.setting.id = id.get<int>();
    e.setting.signal = arm_from_json(detail::require(settings[k], "arm_s", at), at + ".arm_s");
    e.setting.idler = arm_from_json(detail::require(settings[k], "arm_i", at), at + ".arm_i");
    const std::string cat = "counts[" + std::to_string(k) + "]";
    if (!counts[k].is_number_integer() || counts[k].get<std::int64_t>() < 0)
      throw ConfigError(cat + ": expected a non-negative integer");
    e.counts = counts[k].get<std::int64_t>();
    e.time = times.is_array() ? detail::as_number(times[k], "time_s[" + std::to_string(k) + "]")
                              : detail::as_number(times, "time_s");
    if (rates) e.exact_rate = detail::as_number((*rates)[k], "exact_rates[" + std::to_string(k) + "]");
    rec.entries.push_back(e);
  }
  rec.R0 = detail::number(j, "R0_hz", "");
  rec.chi = detail::opt_number(j, "chi", "").value_or(0.0);
  rec.noiseless = detail::boolean(j, "noiseless", "", false);
  if (j.contains("seed")) rec.seed = detail::unsigned_int(j.at("seed"), "seed");
  try {
    check_complete(rec);
  } catch (const ReconstructionError& e) {
    throw ConfigError(std::string("count record: ") + e.what());
  }
  return rec;
}

inline std::string arm_label(const Arm& arm) {
  if (const auto* s = std::get_if<SlitPlane>(&arm)) return std::string(to_string(s->slit));
  return "x=" + fmt(std::get<DetectionPlane>(arm).x / kMm) + "mm";
}

// One row per setting, same numbers as the JSON.
inline std::string to_csv(const CountRecord& rec) {
  std::ostringstream os;
  os << "id,arm_s,x_s_mm,arm_i,x_i_mm,counts,time_s,exact_rate_hz\n";
  auto arm_cols = [&](const Arm& a) {
    if (const auto* s = std::get_if<SlitPlane>(&a)) os << "slit," << to_string(s->slit);
    else os << "detection," << fmt(std::get<DetectionPlane>(a).x / kMm);
  };
  for (const auto& e : rec.entries) {
    os << e.setting.id << ",";
    arm_cols(e.setting.signal);
    os << ",";
    arm_cols(e.setting.idler);
    os << "," << e.counts << "," << fmt(e.time) << ",";
    if (e.exact_rate) os << fmt(*e.exact_rate);
    os << "\n";
  }
  return os.str();
}

// ---- reconstruction results -----------------------------------------------

inline json to_json(const ReconstructionResult& r) {
  json j;
  j["method"] = to_string(r.method);
  j["basis"] = basis_json();
  j["rho"] = rho_json(r.rho_hat);
  j["residual"] = r.residual;
  j["physical"] = r.is_physical();
  j["physical_projection_applied"] = r.physical_projection_applied;
  j["condition_number"] = r.condition_number;
  j["R0_hat_hz"] = r.R0_hat;
  if (r.log_likelihood) j["log_likelihood"] = *r.log_likelihood;
  if (r.converged) {
    j["converged"] = *r.converged;
    j["iterations"] = r.iterations;
  }
  return j;
}

// ---- run config -----------------------------------------------------------

struct Calibration {
  double R0_hz = 1e6;
  double time_s = 1.0;  // slit-plane integration time
  Exposure exposure = Exposure::balanced;
};

struct NoiseConfig {
  std::uint64_t seed = 0;
  bool noiseless = false;
};

struct OracleConfig {
  double tol = 1e-5;            // quadrature tolerance, relative to sqrt(pi/alpha)
  double max_rel_err = 0.05;    // CI bound per grid point
};

struct RunConfig {
  Geometry geometry;
  PumpProfile pump = PlaneWavePump{};
  Calibration calibration;
  NoiseConfig noise;
  MleConfig mle;
  bool mle_enabled = false;  // include MLE in sweeps
  // "pump" compares against the state built from the pump; otherwise a path
  // to a density-matrix file.
  std::optional<std::string> reference;
  OracleConfig oracle;
  int threads = 1;
};

inline RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  RunConfig c;
  c.geometry = geometry_from_json(detail::require(j, "geometry", ""), "geometry");
  c.pump = pump_from_json(detail::require(j, "pump", ""), "pump");

  if (j.contains("calibration")) {
    const auto& cal = j.at("calibration");
    c.calibration.R0_hz = detail::number(cal, "R0_hz", "calibration");
    c.calibration.time_s = detail::number(cal, "time_s", "calibration");
    if (!(c.calibration.R0_hz > 0.0)) throw ConfigError("calibration.R0_hz: must be > 0");
    if (!(c.calibration.time_s > 0.0)) throw ConfigError("calibration.time_s: must be > 0");
    if (cal.contains("exposure")) {
      const std::string e = detail::string(cal, "exposure", "calibration");
      if (e == "balanced") c.calibration.exposure = Exposure::balanced;
      else if (e == "uniform") c.calibration.exposure = Exposure::uniform;
      else throw ConfigError("calibration.exposure: expected \"balanced\" or \"uniform\"");
    }
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    if (n.contains("seed")) c.noise.seed = detail::unsigned_int(n.at("seed"), "noise.seed");
    c.noise.noiseless = detail::boolean(n, "noiseless", "noise", false);
  }
  if (j.contains("mle")) {
    const auto& m = j.at("mle");
    if (m.contains("max_iterations")) {
      const auto& v = m.at("max_iterations");
      if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
        throw ConfigError("mle.max_iterations: expected a positive integer");
      c.mle.max_iterations = v.get<int>();
    }
    if (auto t = detail::opt_number(m, "parameter_tolerance", "mle")) {
      if (!(*t > 0.0)) throw ConfigError("mle.parameter_tolerance: must be > 0");
      c.mle.parameter_tolerance = *t;
    }
    if (m.contains("likelihood")) {
      const std::string l = detail::string(m, "likelihood", "mle");
      if (l == "poisson") c.mle.model = LikelihoodModel::poisson;
      else if (l == "gaussian") c.mle.model = LikelihoodModel::gaussian;
      else throw ConfigError("mle.likelihood: expected \"poisson\" or \"gaussian\"");
    }
    if (m.contains("initializer")) {
      const std::string l = detail::string(m, "initializer", "mle");
      if (l == "linear_inversion") c.mle.initializer = MleInitializer::linear_inversion;
      else if (l == "maximally_mixed") c.mle.initializer = MleInitializer::maximally_mixed;
      else throw ConfigError("mle.initializer: expected \"linear_inversion\" or \"maximally_mixed\"");
    }
    c.mle_enabled = detail::boolean(m, "enabled", "mle", true);
  }
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    if (!r.is_string()) throw ConfigError("reference: expected \"pump\" or a file path");
    c.reference = r.get<std::string>();
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    if (auto t = detail::opt_number(o, "tol", "oracle")) {
      if (!(*t > 0.0)) throw ConfigError("oracle.tol: must be > 0");
      c.oracle.tol = *t;
    }
    if (auto t = detail::opt_number(o, "max_rel_err", "oracle")) c.oracle.max_rel_err = *t;
  }
  if (j.contains("threads")) {
    const auto& t = j.at("threads");
    if (!t.is_number_integer() || t.get<int>() < 1) throw ConfigError("threads: expected a positive integer");
    c.threads = t.get<int>();
  }
  return c;
}

inline RunConfig read_run_config(const std::string& path) {
  return run_config_from_json(read_json_file(path));
}

// Oracle grid file: {"x_mm": [...], "q_per_mm": [...]}.
inline OracleGrid oracle_grid_from_json(const json& j) {
  OracleGrid g;
  for (const char* key : {"x_mm", "q_per_mm"}) {
    const auto& a = detail::require(j, key, "");
    if (!a.is_array()) throw ConfigError(std::string(key) + ": expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double v = detail::as_number(a[i], std::string(key) + "[" + std::to_string(i) + "]");
      if (std::string(key) == "x_mm") g.x.push_back(v * kMm);
      else g.q.push_back(v / kMm);
    }
  }
  return g;
}

}  // namespace spatialtomo::io
