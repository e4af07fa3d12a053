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

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls the library routine it is used to check.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/states.hpp"

namespace st_test {

using spatialtomo::cplx;
using spatialtomo::Matrix4c;
using spatialtomo::Vector4c;

inline spatialtomo::DerivedGeometry reference() {
  return spatialtomo::derive_params(spatialtomo::Geometry::reference_setup());
}

// Haar-ish random pure state: normalized complex Gaussian vector.
inline Vector4c random_ket(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vector4c v;
  for (int i = 0; i < 4; ++i) v(i) = cplx(n(rng), n(rng));
  return v.normalized();
}

inline Matrix4c random_pure(std::mt19937_64& rng) {
  const Vector4c v = random_ket(rng);
  return v * v.adjoint();
}

// Ginibre ensemble: G G^dagger / tr, full rank with probability one.
inline Matrix4c random_full_rank(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix4c g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g(r, c) = cplx(n(rng), n(rng));
  Matrix4c rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// |Phi-> = (|++> - |-->)/sqrt(2), what the odd pump produces.
inline Matrix4c bell_like() {
  Vector4c v(1.0 / std::sqrt(2.0), 0.0, 0.0, -1.0 / std::sqrt(2.0));
  return v * v.adjoint();
}

inline Matrix4c ket_projector(int i) {
  Matrix4c m = Matrix4c::Zero();
  m(i, i) = 1.0;
  return m;
}

// Pure-state concurrence 2|ad - bc|.
inline double pure_concurrence(const Vector4c& v) {
  return 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
}

// <psi|rho|psi> for a pure reference.
inline double overlap_fidelity(const Vector4c& psi, const Matrix4c& rho) {
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

// Per-process directory: ctest runs test cases in parallel processes.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("spatialtomo_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace st_test
