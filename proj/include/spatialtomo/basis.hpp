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

#include <algorithm>
#include <cmath>
#include <string_view>

namespace spatialtomo {

// Which slit of a double slit a photon is transmitted by. Slit centers sit at
// +s (plus) and -s (minus).
enum class Slit { plus, minus };

// Row/column index of a slit in the (+, -) single-qubit basis.
constexpr int index_of(Slit slit) { return slit == Slit::plus ? 0 : 1; }

// +1 for the upper slit, -1 for the lower one.
constexpr double signum(Slit slit) { return slit == Slit::plus ? 1.0 : -1.0; }

constexpr std::string_view to_string(Slit slit) {
  return slit == Slit::plus ? "+" : "-";
}

// Unnormalized sinc, sin(u)/u. A short series keeps full precision near zero.
inline double sinc(double u) {
  const double au = std::abs(u);
  if (au < 1e-4) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}

// <+|-> for slits of half-width a centered at +/-s. The overlap integral of
// two sinc^2 spectra with opposite linear phases is the triangle function of
// the center-to-center separation 2s over the full slit width 2a.
inline double slit_basis_overlap(double s, double a) {
  return std::max(0.0, 1.0 - std::abs(s) / a);
}

}  // namespace spatialtomo
