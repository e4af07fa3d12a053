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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace spatialtomo {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

inline constexpr cplx kI{0.0, 1.0};

// Largest elementwise |m - m^dagger|.
inline double hermiticity_defect(const Matrix4c& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline Matrix4c hermitian_part(const Matrix4c& m) {
  return 0.5 * (m + m.adjoint());
}

// Eigenvalues below this fraction of the largest one are rounding noise.
inline constexpr double kSpectralCutoff = 1e-14;

// Eigenvalues clipped at zero, and below kSpectralCutoff * max set to zero.
inline Eigen::Vector4d clean_spectrum(const Eigen::Vector4d& ev) {
  const double top = std::max(ev.maxCoeff(), 0.0);
  Eigen::Vector4d out = ev;
  for (int i = 0; i < 4; ++i)
    if (out(i) <= kSpectralCutoff * top) out(i) = 0.0;
  return out;
}

// Square root of the positive part of a Hermitian matrix.
inline Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(m));
  Eigen::Vector4d ev = clean_spectrum(es.eigenvalues()).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Kronecker product of two single-qubit operators, signal first.
inline Matrix4c kron(const Matrix2c& signal, const Matrix2c& idler) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = signal(i, j) * idler;
  return out;
}

}  // namespace spatialtomo
