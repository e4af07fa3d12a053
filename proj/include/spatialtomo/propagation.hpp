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
#include <limits>
#include <numbers>
#include <vector>

#include "spatialtomo/basis.hpp"
#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/quadrature.hpp"
#include "spatialtomo/states.hpp"

// Free propagation from the source slits to the detection plane and the
// post-selection by a detection slit.
//
// A photon leaving slit +/- (center +/-s, half-width a) and detected behind a
// slit of half-width b centered at x contributes the amplitude
//
//   r_+/-(x) = sinc((x -/+ s) a / (2 alpha)) exp(i (x -/+ s)^2 / (4 alpha)).
//
// These follow from a stationary-phase evaluation of the chirp integral
// I_+/-(x, q) below; i_integral_quadrature evaluates that integral without
// approximation and serves as its oracle.

namespace spatialtomo {

// Whether the sinc magnitude of r is kept (exact) or forced to 1 (unit), the
// idealization under which the closed-form inverter is exact.
enum class Modulus { exact, unit };

inline cplx r_coeff(double x, Slit slit, const DerivedGeometry& d,
                    Modulus modulus = Modulus::exact) {
  const Geometry& g = d.geometry;
  const double u = x - signum(slit) * g.s;
  const double mag = modulus == Modulus::exact ? sinc(u * g.a / (2.0 * d.alpha)) : 1.0;
  return std::polar(1.0, u * u / (4.0 * d.alpha)) * mag;
}

struct DetectionVector {
  double x = 0.0;
  cplx r_plus;
  cplx r_minus;
  double weight = 0.0;  // (|r+|^2 + |r-|^2) / 2

  // Components (r+, r-) of the post-selected qubit direction. The
  // measurement ket is its conjugate: <h| has components (r+, r-).
  Vector2c direction() const { return {r_plus, r_minus}; }
};

inline DetectionVector detection_vector(double x, const DerivedGeometry& d,
                                        Modulus modulus = Modulus::exact) {
  DetectionVector v;
  v.x = x;
  v.r_plus = r_coeff(x, Slit::plus, d, modulus);
  v.r_minus = r_coeff(x, Slit::minus, d, modulus);
  v.weight = 0.5 * (std::norm(v.r_plus) + std::norm(v.r_minus));
  return v;
}

// Post-selected amplitude B(x_s, x_i) = sum_{u,v} r_u(x_s) r_v(x_i) w_{u,v}.
inline cplx b_coeff(const TwoQubitState& psi, double x_s, double x_i, const DerivedGeometry& d,
                    Modulus modulus = Modulus::exact) {
  cplx sum{0.0, 0.0};
  for (Slit u : {Slit::plus, Slit::minus})
    for (Slit v : {Slit::plus, Slit::minus})
      sum += r_coeff(x_s, u, d, modulus) * r_coeff(x_i, v, d, modulus) * psi.w(u, v);
  return sum;
}

// ---------------------------------------------------------------------------
// The chirp integral
//
//   I_+/-(x, q) = int dq' exp(-i alpha q'^2) exp(+/- i q' s) exp(i (q' - q) x)
//                         sinc(q' a) sinc((q' - q) b).

enum class PhaseSign { plus, minus };

constexpr double signum(PhaseSign p) { return p == PhaseSign::plus ? 1.0 : -1.0; }

// Convention for the detection-slit factor of the closed form.
//
// stationary_phase: sinc(x b / (2 alpha) - q b), the value of sinc((q' - q) b)
//   at the stationary point q' ~ x / (2 alpha) (the small s b / (2 alpha)
//   shift is dropped).
// as_printed: sinc(x b / (2 alpha) + q b). The sign of q is flipped relative to
//   the integrand; kept for comparison only, it disagrees with quadrature by
//   ~20% at q = +/- pi/(4b) even deep in the far field.
enum class DetectionSinc { stationary_phase, as_printed };

inline cplx i_integral_closed(double x, PhaseSign sign, double q, const DerivedGeometry& d,
                              DetectionSinc convention = DetectionSinc::stationary_phase) {
  const Geometry& g = d.geometry;
  const double u = x + signum(sign) * g.s;
  const double qb = convention == DetectionSinc::stationary_phase ? -q * g.b : q * g.b;
  return std::polar(1.0, -q * x) * std::polar(1.0, u * u / (4.0 * d.alpha)) *
         sinc(u * g.a / (2.0 * d.alpha)) * sinc(x * g.b / (2.0 * d.alpha) + qb);
}

// Constant sqrt(pi/alpha) exp(-i pi/4) produced by the Gaussian chirp
// integral. The closed form omits it, so compare i_integral_quadrature / K
// against i_integral_closed.
inline cplx stationary_phase_prefactor(const DerivedGeometry& d) {
  return std::polar(std::sqrt(std::numbers::pi / d.alpha), -std::numbers::pi / 4.0);
}

// Parameters of the chirp integral. Separate from Geometry so degenerate
// cases (s = 0, a = b) can be evaluated directly.
struct ChirpIntegral {
  double alpha = 0.0;
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;

  static ChirpIntegral from(const DerivedGeometry& d) {
    return {d.alpha, d.geometry.s, d.geometry.a, d.geometry.b};
  }
};

// Adaptive quadrature of I_+/-. `tol` is relative to the natural magnitude
// sqrt(pi/alpha) of the integral; it covers both the truncated tails, bounded
// by integrating by parts once, and the interior error estimate.
inline QuadratureResult i_integral_quadrature(double x, PhaseSign sign, double q,
                                              const ChirpIntegral& p, double tol,
                                              const QuadratureOptions& opts = {}) {
  if (!(tol > 0.0)) throw ContractError("quadrature tolerance must be > 0");
  if (!(p.alpha > 0.0) || !(p.a > 0.0) || !(p.b > 0.0))
    throw ContractError("chirp integral needs alpha, a, b > 0");
  const double abs_tol = tol * std::sqrt(std::numbers::pi / p.alpha);
  const double linear = signum(sign) * p.s + x;
  // Largest linear phase rate among the four exponentials of the sinc product.
  const double c_max = std::abs(x) + std::abs(p.s) + p.a + p.b;

  auto integrand = [&](double t) -> cplx {
    const double phase = -p.alpha * t * t + linear * t - q * x;
    return std::polar(sinc(t * p.a) * sinc((t - q) * p.b), phase);
  };
  auto omega = [&](double t) { return 2.0 * p.alpha * std::abs(t) + c_max; };
  // Each tail: four exponentials of amplitude 1/(4 |t a (t - q) b|) whose
  // phase rate exceeds 2 alpha t - c_max; one integration by parts bounds each
  // by twice amplitude over rate at the cutoff.
  auto tail = [&](double Q) {
    const double rate = 2.0 * p.alpha * Q - c_max;
    const double gap = Q - std::abs(q);
    if (rate <= 0.0 || gap <= 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * 2.0 / (Q * p.a * gap * p.b * rate);
  };
  const double start = std::max({1.0 / p.a, 1.0 / p.b, 2.0 * std::abs(q), c_max / p.alpha});
  const double cutoff = choose_cutoff(tail, start, 0.25 * abs_tol);
  auto res = integrate_oscillatory(integrand, omega, cutoff, 0.75 * abs_tol, opts);
  res.error_estimate += tail(cutoff);
  return res;
}

inline QuadratureResult i_integral_quadrature(double x, PhaseSign sign, double q,
                                              const DerivedGeometry& d, double tol,
                                              const QuadratureOptions& opts = {}) {
  return i_integral_quadrature(x, sign, q, ChirpIntegral::from(d), tol, opts);
}

// <f(x) | f(x')> for the post-selected single-photon states
//   |f(x)> = sqrt(b/pi) int dq exp(-i q x) sinc((x / (2 alpha) + q) b) |q>,
// by quadrature. `tol` is absolute.
inline QuadratureResult f_state_overlap(double x, double x_prime, const DerivedGeometry& d,
                                        double tol, const QuadratureOptions& opts = {}) {
  if (!(tol > 0.0)) throw ContractError("quadrature tolerance must be > 0");
  const double b = d.geometry.b;
  const double c = x / (2.0 * d.alpha);
  const double cp = x_prime / (2.0 * d.alpha);
  const double dx = x - x_prime;
  const double norm = b / std::numbers::pi;
  const double raw_tol = tol / norm;

  auto integrand = [&](double t) -> cplx {
    return std::polar(sinc((c + t) * b) * sinc((cp + t) * b), t * dx);
  };
  auto omega = [&](double) { return std::abs(dx) + 2.0 * b; };
  const double shift = std::max(std::abs(c), std::abs(cp));
  auto tail = [&](double Q) {
    const double gap = Q - shift;
    if (gap <= 0.0) return std::numeric_limits<double>::infinity();
    const double osc = std::abs(dx) - 2.0 * b;
    if (osc > 0.0) return 2.0 * 2.0 / (b * b * gap * gap * osc);
    return 2.0 / (b * b * gap);
  };
  const double cutoff = choose_cutoff(tail, std::max(10.0 / b, 2.0 * shift), 0.25 * raw_tol);
  auto res = integrate_oscillatory(integrand, omega, cutoff, 0.75 * raw_tol, opts);
  res.error_estimate = (res.error_estimate + tail(cutoff)) * norm;
  res.value *= norm;
  return res;
}

// ---------------------------------------------------------------------------
// Closed form vs. quadrature over a grid.

struct OracleGrid {
  std::vector<double> x;  // m
  std::vector<double> q;  // rad/m
};

// x in {0, +/-x1, +/-2 x1}, q in {0, +/-pi/(4b)}.
inline OracleGrid default_oracle_grid(const DerivedGeometry& d) {
  const double x1 = d.x1;
  const double q = std::numbers::pi / (4.0 * d.geometry.b);
  return {{0.0, x1, -x1, 2.0 * x1, -2.0 * x1}, {0.0, q, -q}};
}

struct OracleRow {
  double x = 0.0;
  double q = 0.0;
  PhaseSign sign = PhaseSign::plus;
  cplx closed;
  cplx quadrature;  // divided by stationary_phase_prefactor
  double rel_err = 0.0;
};

inline std::vector<OracleRow> compare_closed_form(
    const OracleGrid& grid, const DerivedGeometry& d, double tol = 1e-5,
    DetectionSinc convention = DetectionSinc::stationary_phase) {
  const cplx k = stationary_phase_prefactor(d);
  std::vector<OracleRow> rows;
  for (double x : grid.x)
    for (double q : grid.q)
      for (PhaseSign sign : {PhaseSign::plus, PhaseSign::minus}) {
        OracleRow r;
        r.x = x;
        r.q = q;
        r.sign = sign;
        r.closed = i_integral_closed(x, sign, q, d, convention);
        r.quadrature = i_integral_quadrature(x, sign, q, d, tol).value / k;
        const double denom = std::abs(r.quadrature);
        r.rel_err = denom > 0.0 ? std::abs(r.closed - r.quadrature) / denom
                                : std::abs(r.closed - r.quadrature);
        rows.push_back(r);
      }
  return rows;
}

}  // namespace spatialtomo
