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
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spatialtomo/basis.hpp"
#include "spatialtomo/errors.hpp"

namespace spatialtomo {

// Experimental geometry, SI units throughout (metres).
//
// The source double slits sit at the plane z_A behind the crystal, with slit
// centers at +/-s and half-width a. The detection double slits, half-width b,
// sit at the plane z.
struct Geometry {
  double lambda_pump = 0.0;
  double z_A = 0.0;
  double z = 0.0;
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::optional<double> L_override;

  // Krypton-pumped setup: 413.1 nm pump, slits 200 mm from the crystal,
  // detection plane 600 mm further, 0.1 mm wide slits at +/-0.25 mm.
  static Geometry reference_setup() {
    Geometry g;
    g.lambda_pump = 413.1e-9;
    g.z_A = 0.200;
    g.z = 0.800;
    g.s = 0.25e-3;
    g.a = 0.05e-3;
    g.b = 0.05e-3;
    return g;
  }
};

// Optical parameters that follow from a Geometry. Keeps a copy of the source
// geometry so downstream code needs a single argument.
struct DerivedGeometry {
  Geometry geometry;
  double k_p = 0.0;    // pump wavenumber (rad/m)
  double k_dc = 0.0;   // down-converted wavenumber, k_p / 2 for degenerate SPDC
  double alpha = 0.0;  // (z - z_A) / k_dc  (m^2)
  double x1 = 0.0;     // quarter-phase detection position (m)
  double L = 0.0;      // diffraction-pattern width (m)
  double chi = 0.0;    // L / (2b)
};

namespace detail {

inline bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// First violated invariant, or nullopt. Returns (field, message).
inline std::optional<std::pair<std::string, std::string>> first_violation(
    const Geometry& g) {
  const std::pair<const char*, double> lengths[] = {
      {"lambda_pump", g.lambda_pump}, {"z_A", g.z_A}, {"z", g.z},
      {"s", g.s},                     {"a", g.a},     {"b", g.b}};
  for (const auto& [name, v] : lengths)
    if (!positive_finite(v)) return {{name, "must be finite and > 0"}};
  if (!(g.z > g.z_A)) return {{"z", "must exceed z_A (zero or negative propagation distance)"}};
  if (g.s < g.a) return {{"s", "slit offset s must be >= half-width a"}};
  if (g.b > g.s) return {{"b", "detection half-width b must be <= s"}};
  if (g.L_override) {
    if (!positive_finite(*g.L_override)) return {{"L", "must be finite and > 0"}};
    if (*g.L_override < 2.0 * g.b) return {{"L", "must be >= 2b (chi >= 1)"}};
  }
  return std::nullopt;
}

}  // namespace detail

// Derives wavenumbers, alpha, the quarter-phase position x1 = alpha*pi/(2s)
// and the pattern width L. Without an override L is the first-zero to
// first-zero width of the single-slit envelope, 4*pi*alpha/a.
//
// Throws GeometryError naming the offending field.
inline DerivedGeometry derive_params(const Geometry& geom) {
  if (auto bad = detail::first_violation(geom))
    throw GeometryError(bad->first, bad->second);

  DerivedGeometry d;
  d.geometry = geom;
  d.k_p = 2.0 * std::numbers::pi / geom.lambda_pump;
  d.k_dc = 0.5 * d.k_p;
  d.alpha = (geom.z - geom.z_A) / d.k_dc;
  d.x1 = d.alpha * std::numbers::pi / (2.0 * geom.s);
  d.L = geom.L_override.value_or(4.0 * std::numbers::pi * d.alpha / geom.a);
  d.chi = d.L / (2.0 * geom.b);
  if (d.chi < 1.0) throw GeometryError("L", "derived chi = L/(2b) < 1");
  return d;
}

struct GeometryCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct GeometryReport {
  std::vector<GeometryCheck> checks;
  std::vector<std::string> warnings;
  std::optional<double> fraunhofer_figure;  // b^2 / (4 alpha), radians
  std::optional<double> basis_overlap;      // <+|->

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

// Reports every invariant separately instead of stopping at the first one.
inline GeometryReport validate(const Geometry& g) {
  GeometryReport r;
  auto add = [&](std::string name, bool passed, std::string detail = {}) {
    r.checks.push_back({std::move(name), passed, std::move(detail)});
  };
  const bool lengths_ok = detail::positive_finite(g.lambda_pump) &&
                          detail::positive_finite(g.z_A) &&
                          detail::positive_finite(g.z) &&
                          detail::positive_finite(g.s) &&
                          detail::positive_finite(g.a) &&
                          detail::positive_finite(g.b);
  add("lengths > 0", lengths_ok);
  add("z > z_A", g.z > g.z_A);
  add("s >= a", g.s >= g.a);
  add("b <= s", g.b <= g.s);
  if (g.L_override)
    add("L >= 2b", *g.L_override >= 2.0 * g.b);

  if (detail::positive_finite(g.s) && detail::positive_finite(g.a)) {
    r.basis_overlap = slit_basis_overlap(g.s, g.a);
    if (*r.basis_overlap > 0.0) {
      std::ostringstream os;
      os << "slit basis not orthogonal: <+|-> = " << *r.basis_overlap;
      r.warnings.push_back(os.str());
    }
  }
  if (lengths_ok && g.z > g.z_A) {
    const double alpha = (g.z - g.z_A) / (std::numbers::pi / g.lambda_pump);
    r.fraunhofer_figure = g.b * g.b / (4.0 * alpha);
    if (*r.fraunhofer_figure > 0.05) {
      std::ostringstream os;
      os << "Fraunhofer figure b^2/(4 alpha) = " << *r.fraunhofer_figure
         << " rad; far-field propagation formulas may be inaccurate";
      r.warnings.push_back(os.str());
    }
  }
  return r;
}

}  // namespace spatialtomo
