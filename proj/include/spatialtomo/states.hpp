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
#include <complex>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include "spatialtomo/basis.hpp"
#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"

namespace spatialtomo {

// ---------------------------------------------------------------------------
// Pump profiles W(x; z_A) at the aperture plane.

struct PlaneWavePump {};

// exp(-((x - center) / waist)^2)
struct GaussianPump {
  double waist = 1e-3;
  double center = 0.0;
};

// (x / waist) * exp(-(x / waist)^2): odd first-order mode, node on the axis.
struct OddModePump {
  double waist = 1e-3;
};

struct PumpSample {
  double x = 0.0;
  cplx value;
};

// Linear interpolation between samples, zero outside their range.
struct TabulatedPump {
  std::vector<PumpSample> samples;
};

using PumpProfile =
    std::variant<PlaneWavePump, GaussianPump, OddModePump, TabulatedPump>;

inline void validate_pump(const PumpProfile& p) {
  if (const auto* g = std::get_if<GaussianPump>(&p); g && !(g->waist > 0.0))
    throw ContractError("pump.waist must be > 0");
  if (const auto* o = std::get_if<OddModePump>(&p); o && !(o->waist > 0.0))
    throw ContractError("pump.waist must be > 0");
  if (const auto* t = std::get_if<TabulatedPump>(&p)) {
    if (t->samples.size() < 2)
      throw ContractError("tabulated pump needs at least 2 samples");
    for (std::size_t i = 1; i < t->samples.size(); ++i)
      if (!(t->samples[i].x > t->samples[i - 1].x))
        throw ContractError("tabulated pump samples must be strictly increasing in x");
  }
}

inline cplx eval_pump(const PumpProfile& p, double x) {
  return std::visit(
      [x](const auto& v) -> cplx {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PlaneWavePump>) {
          return {1.0, 0.0};
        } else if constexpr (std::is_same_v<T, GaussianPump>) {
          const double u = (x - v.center) / v.waist;
          return {std::exp(-u * u), 0.0};
        } else if constexpr (std::is_same_v<T, OddModePump>) {
          const double u = x / v.waist;
          return {u * std::exp(-u * u), 0.0};
        } else {
          const auto& s = v.samples;
          if (s.empty() || x < s.front().x || x > s.back().x) return {0.0, 0.0};
          auto hi = std::upper_bound(s.begin(), s.end(), x,
                                     [](double xv, const PumpSample& ps) { return xv < ps.x; });
          if (hi == s.end()) return s.back().value;
          auto lo = hi - 1;
          const double t = (x - lo->x) / (hi->x - lo->x);
          return (1.0 - t) * lo->value + t * hi->value;
        }
      },
      p);
}

// ---------------------------------------------------------------------------
// Two-qubit states. Basis order is (|++>, |+->, |-+>, |-->), signal first.

constexpr int basis_index(Slit signal, Slit idler) {
  return 2 * index_of(signal) + index_of(idler);
}

struct TwoQubitState {
  Vector4c amplitudes = Vector4c::Zero();

  cplx w(Slit signal, Slit idler) const { return amplitudes(basis_index(signal, idler)); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
};

// Validated 4x4 density matrix: Hermitian and unit trace within tol.
class DensityMatrix {
 public:
  static constexpr double kDefaultTolerance = 1e-9;
  static constexpr double kPhysicalTolerance = 1e-10;

  DensityMatrix() : rho_(Matrix4c::Identity() / 4.0) {}

  explicit DensityMatrix(const Matrix4c& rho, double tol = kDefaultTolerance) : rho_(rho) {
    if (!rho.allFinite()) throw ContractError("density matrix has non-finite entries");
    if (hermiticity_defect(rho) > tol) throw ContractError("density matrix is not Hermitian");
    if (std::abs(rho.trace() - 1.0) > tol) throw ContractError("density matrix trace != 1");
  }

  static DensityMatrix maximally_mixed() { return DensityMatrix(); }

  const Matrix4c& matrix() const { return rho_; }
  cplx operator()(int r, int c) const { return rho_(r, c); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(rho_), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  bool is_physical(double tol = kPhysicalTolerance) const { return min_eigenvalue() >= -tol; }

 private:
  Matrix4c rho_;
};

// Pure state behind the source double slits:
//   w_{++} ~ W(+s),  w_{--} ~ W(-s),  w_{+-} = w_{-+} ~ W(0) exp(i k_p s^2 / (2 z_A)),
// normalized to unit norm. Throws ContractError if all pump samples vanish.
inline TwoQubitState build_state(const PumpProfile& p, const DerivedGeometry& d) {
  validate_pump(p);
  const Geometry& g = d.geometry;
  const cplx cross_phase = std::polar(1.0, d.k_p * g.s * g.s / (2.0 * g.z_A));
  TwoQubitState psi;
  psi.amplitudes(basis_index(Slit::plus, Slit::plus)) = eval_pump(p, +g.s);
  psi.amplitudes(basis_index(Slit::minus, Slit::minus)) = eval_pump(p, -g.s);
  const cplx cross = eval_pump(p, 0.0) * cross_phase;
  psi.amplitudes(basis_index(Slit::plus, Slit::minus)) = cross;
  psi.amplitudes(basis_index(Slit::minus, Slit::plus)) = cross;
  const double n = psi.amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw ContractError("null state: pump vanishes at every slit position");
  psi.amplitudes /= n;
  return psi;
}

inline TwoQubitState build_state(const PumpProfile& p, const Geometry& g) {
  return build_state(p, derive_params(g));
}

inline DensityMatrix to_density(const TwoQubitState& psi) {
  if (std::abs(psi.norm_squared() - 1.0) > 1e-9) throw ContractError("state is not normalized");
  Matrix4c rho = psi.amplitudes * psi.amplitudes.adjoint();
  rho = hermitian_part(rho);
  return DensityMatrix(rho);
}

// ---------------------------------------------------------------------------
// Metrics.

inline double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Negative parts of
// a non-physical sigma are dropped inside the square root.
inline double fidelity(const Matrix4c& rho, const Matrix4c& sigma) {
  const Matrix4c sr = psd_sqrt(rho);
  const Matrix4c inner = hermitian_part(sr * sigma * sr);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(inner, Eigen::EigenvaluesOnly);
  const double t = clean_spectrum(es.eigenvalues()).cwiseSqrt().sum();
  return t * t;
}

inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return fidelity(rho.matrix(), sigma.matrix());
}

inline double trace_distance(const Matrix4c& rho, const Matrix4c& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(rho - sigma), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Wootters concurrence from the spin-flipped state. Uses the Hermitian form
// sqrt(rho) rho~ sqrt(rho), whose eigenvalues are the squared lambda_i.
inline double concurrence(const Matrix4c& rho) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c flipped = yy * rho.conjugate() * yy;
  const Matrix4c sr = psd_sqrt(rho);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(sr * flipped * sr),
                                             Eigen::EigenvaluesOnly);
  Eigen::Vector4d lam = clean_spectrum(es.eigenvalues()).cwiseSqrt();  // ascending
  return std::max(0.0, lam(3) - lam(2) - lam(1) - lam(0));
}

struct StateMetrics {
  double purity = 0.0;
  double min_eigenvalue = 0.0;
  double concurrence = 0.0;
  std::optional<double> fidelity;
  std::optional<double> trace_distance;
};

inline StateMetrics metrics(const DensityMatrix& rho,
                            const std::optional<DensityMatrix>& reference = std::nullopt) {
  StateMetrics m;
  m.purity = purity(rho);
  m.min_eigenvalue = rho.min_eigenvalue();
  m.concurrence = concurrence(rho.matrix());
  if (reference) {
    m.fidelity = fidelity(rho, *reference);
    m.trace_distance = trace_distance(rho.matrix(), reference->matrix());
  }
  return m;
}

// Raw-matrix overload; rejects non-Hermitian input.
inline StateMetrics metrics(const Matrix4c& rho,
                            const std::optional<DensityMatrix>& reference = std::nullopt) {
  return metrics(DensityMatrix(rho), reference);
}

// Nearest physical state by eigenvalue clipping: Hermitian part, negative
// eigenvalues set to zero, trace renormalized. Idempotent on physical input.
inline DensityMatrix project_physical(const Matrix4c& rho_hat) {
  if (!rho_hat.allFinite()) throw ContractError("project_physical: non-finite input");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(rho_hat));
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 1e-300)) throw ContractError("project_physical: no positive spectrum (zero matrix?)");
  ev /= total;
  Matrix4c out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix(hermitian_part(out));
}

}  // namespace spatialtomo
