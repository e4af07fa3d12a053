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

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "spatialtomo/basis.hpp"
#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/propagation.hpp"
#include "spatialtomo/states.hpp"

namespace spatialtomo {

// Detector right behind one slit of the source double slit.
struct SlitPlane {
  Slit slit = Slit::plus;
  bool operator==(const SlitPlane&) const = default;
};

// Detector behind a detection slit centered at x in the far plane.
struct DetectionPlane {
  double x = 0.0;
  bool operator==(const DetectionPlane&) const = default;
};

using Arm = std::variant<SlitPlane, DetectionPlane>;

struct MeasurementSetting {
  int id = 0;
  Arm signal;
  Arm idler;

  int detection_arms() const {
    return static_cast<int>(std::holds_alternative<DetectionPlane>(signal)) +
           static_cast<int>(std::holds_alternative<DetectionPlane>(idler));
  }
  bool operator==(const MeasurementSetting&) const = default;
};

// The sixteen settings in the usual tomography table order: four slit pairs,
// then slit x detection, detection x slit and detection x detection over the
// positions {x0, x1}.
inline std::vector<MeasurementSetting> standard_settings(double x0, double x1) {
  const Arm p = SlitPlane{Slit::plus}, m = SlitPlane{Slit::minus};
  const Arm d0 = DetectionPlane{x0}, d1 = DetectionPlane{x1};
  return {
      {1, p, p},    {2, p, m},    {3, m, p},    {4, m, m},
      {5, p, d0},   {6, p, d1},   {7, m, d0},   {8, m, d1},
      {9, d0, p},   {10, d1, p},  {11, d0, d0}, {12, d0, d1},
      {13, d0, m},  {14, d1, m},  {15, d1, d0}, {16, d1, d1},
  };
}

inline std::vector<MeasurementSetting> standard_settings(const DerivedGeometry& d) {
  return standard_settings(0.0, d.x1);
}

struct PovmElement {
  Matrix4c op;         // includes the scale factor
  double scale = 1.0;  // product of the per-arm 2b/L factors
};

namespace detail {

struct ArmOperator {
  Matrix2c op;
  double scale;
};

// A detection slit at x post-selects the ket h = conj(r+, r-), so that
// <h|psi> reproduces the amplitude sum r_u w_u. The 1/2 makes h h^dagger / 2 a
// unit-trace projector when |r+/-| = 1; 2b/L accounts for the fraction of the
// diffraction pattern the slit transmits.
inline ArmOperator arm_operator(const Arm& arm, const DerivedGeometry& d, Modulus modulus) {
  if (const auto* s = std::get_if<SlitPlane>(&arm)) {
    Matrix2c op = Matrix2c::Zero();
    op(index_of(s->slit), index_of(s->slit)) = 1.0;
    return {op, 1.0};
  }
  const double x = std::get<DetectionPlane>(arm).x;
  if (!std::isfinite(x)) throw ContractError("detection position must be finite");
  const Vector2c h = detection_vector(x, d, modulus).direction().conjugate();
  const double scale = 1.0 / d.chi;
  return {scale * 0.5 * (h * h.adjoint()), scale};
}

}  // namespace detail

// Scaled measurement operator E with expected rate R0 * Tr(rho E).
inline PovmElement povm_element(const MeasurementSetting& setting, const DerivedGeometry& d,
                                Modulus modulus = Modulus::exact) {
  const auto s = detail::arm_operator(setting.signal, d, modulus);
  const auto i = detail::arm_operator(setting.idler, d, modulus);
  return {kron(s.op, i.op), s.scale * i.scale};
}

inline double expected_rate(const Matrix4c& rho, const PovmElement& e, double R0) {
  const double v = R0 * (rho * e.op).trace().real();
  return v < 0.0 ? 0.0 : v;
}

// R0 * Tr(rho E_k) for each setting. rho must be physical.
inline std::vector<double> expected_rates(const DensityMatrix& rho,
                                          const std::vector<MeasurementSetting>& settings,
                                          const DerivedGeometry& d, double R0,
                                          Modulus modulus = Modulus::exact) {
  if (!(R0 > 0.0)) throw ContractError("R0 must be > 0");
  if (!rho.is_physical()) throw ContractError("expected_rates: density matrix is not physical");
  std::vector<double> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(expected_rate(rho.matrix(), povm_element(s, d, modulus), R0));
  return out;
}

// ---------------------------------------------------------------------------
// Counting.

// uniform: every setting integrates for the base time.
// balanced: each detection-plane arm multiplies the time by chi = L/(2b),
//   which offsets its 2b/L transmission so all settings collect comparable
//   counts.
enum class Exposure { uniform, balanced };

inline std::vector<double> integration_times(const std::vector<MeasurementSetting>& settings,
                                             const DerivedGeometry& d, double base_time,
                                             Exposure exposure) {
  std::vector<double> t;
  t.reserve(settings.size());
  for (const auto& s : settings)
    t.push_back(exposure == Exposure::uniform ? base_time
                                              : base_time * std::pow(d.chi, s.detection_arms()));
  return t;
}

// Base time giving `counts` expected events per slit-pair setting for the
// maximally mixed state (and per setting overall under balanced exposure).
inline double base_time_for_counts(double counts, double R0) { return 4.0 * counts / R0; }

struct CountEntry {
  MeasurementSetting setting;
  std::int64_t counts = 0;
  double time = 0.0;                 // integration time (s)
  std::optional<double> exact_rate;  // noiseless records only (Hz)
};

struct CountRecord {
  std::vector<CountEntry> entries;
  double R0 = 0.0;   // configured calibration (Hz)
  double chi = 0.0;  // L/(2b) of the generating geometry
  std::optional<std::uint64_t> seed;
  bool noiseless = false;

  // Event count used by the estimators: exact_rate * time when the record
  // carries exact rates, otherwise the integer count.
  double observed_counts(std::size_t k) const {
    const auto& e = entries.at(k);
    return e.exact_rate ? *e.exact_rate * e.time : static_cast<double>(e.counts);
  }
  double observed_rate(std::size_t k) const { return observed_counts(k) / entries.at(k).time; }

  std::vector<MeasurementSetting> settings() const {
    std::vector<MeasurementSetting> s;
    for (const auto& e : entries) s.push_back(e.setting);
    return s;
  }
};

// Throws ReconstructionError unless ids 1..16 appear exactly once with
// non-negative counts and positive times.
inline void check_complete(const CountRecord& rec) {
  if (rec.entries.size() != 16)
    throw ReconstructionError("count record must hold exactly 16 settings");
  std::vector<int> seen(17, 0);
  for (const auto& e : rec.entries) {
    if (e.setting.id < 1 || e.setting.id > 16)
      throw ReconstructionError("setting id out of range 1..16");
    if (seen[e.setting.id]++) throw ReconstructionError("duplicate setting id");
    if (e.counts < 0) throw ReconstructionError("negative count");
    if (!(e.time > 0.0)) throw ReconstructionError("integration time must be > 0");
    if (e.exact_rate && !(*e.exact_rate >= 0.0)) throw ReconstructionError("negative exact rate");
  }
}

struct SimulationOptions {
  double R0 = 1e6;        // Hz
  double base_time = 1.0;  // s
  Exposure exposure = Exposure::balanced;
  std::uint64_t seed = 0;
  bool noiseless = false;
  Modulus modulus = Modulus::exact;
};

// Noiseless: counts = round(rate * time) and the exact rates are kept.
// Otherwise counts ~ Poisson(rate * time) from a generator seeded with
// opts.seed, drawn in setting order.
inline CountRecord simulate_counts(const DensityMatrix& rho,
                                   const std::vector<MeasurementSetting>& settings,
                                   const DerivedGeometry& d, const SimulationOptions& opts) {
  if (!(opts.base_time > 0.0)) throw ContractError("integration time must be > 0");
  const auto rates = expected_rates(rho, settings, d, opts.R0, opts.modulus);
  const auto times = integration_times(settings, d, opts.base_time, opts.exposure);
  CountRecord rec;
  rec.R0 = opts.R0;
  rec.chi = d.chi;
  rec.noiseless = opts.noiseless;
  if (!opts.noiseless) rec.seed = opts.seed;
  std::mt19937_64 gen(opts.seed);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    CountEntry e;
    e.setting = settings[k];
    e.time = times[k];
    const double mean = rates[k] * times[k];
    if (opts.noiseless) {
      e.counts = static_cast<std::int64_t>(std::llround(mean));
      e.exact_rate = rates[k];
    } else if (mean > 0.0) {
      e.counts = std::poisson_distribution<std::int64_t>(mean)(gen);
    }
    rec.entries.push_back(e);
  }
  return rec;
}

}  // namespace spatialtomo
