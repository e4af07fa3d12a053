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
#include <vector>

#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/measurement.hpp"
#include "spatialtomo/states.hpp"
#include "spatialtomo/tomography.hpp"

namespace spatialtomo {

enum class MleInitializer { linear_inversion, maximally_mixed };

struct MleConfig {
  int max_iterations = 100000;
  double parameter_tolerance = 1e-8;
  LikelihoodModel model = LikelihoodModel::poisson;
  MleInitializer initializer = MleInitializer::linear_inversion;
  Modulus modulus = Modulus::exact;
};

namespace detail {

// rho = T^dagger T / Tr(T^dagger T) with T lower triangular. Parameters: the
// four real diagonal entries, then Re/Im of T_10, T_20, T_30, T_21, T_31, T_32.
inline constexpr std::array<std::pair<int, int>, 6> kLowerPairs = {
    {{1, 0}, {2, 0}, {3, 0}, {2, 1}, {3, 1}, {3, 2}}};

inline Matrix4c t_from_params(const Vector16& th) {
  Matrix4c t = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) t(i, i) = th(i);
  for (std::size_t p = 0; p < kLowerPairs.size(); ++p) {
    const auto [i, j] = kLowerPairs[p];
    t(i, j) = cplx(th(4 + 2 * p), th(5 + 2 * p));
  }
  return t;
}

// Lower-triangular T with T^dagger T = rho for positive definite rho. A
// Cholesky factor of the index-reversed matrix, reversed back, is upper
// triangular U with U U^dagger = rho; T = U^dagger.
inline Vector16 params_from_rho(const Matrix4c& rho) {
  Matrix4c rev;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rev(i, j) = rho(3 - i, 3 - j);
  Eigen::LLT<Matrix4c> llt(rev);
  if (llt.info() != Eigen::Success) throw ContractError("MLE initializer is not positive definite");
  const Matrix4c l = llt.matrixL();
  Matrix4c u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) u(i, j) = l(3 - i, 3 - j);
  Matrix4c t = u.adjoint();
  // Real, non-negative diagonal (Cholesky already guarantees it).
  Vector16 th;
  for (int i = 0; i < 4; ++i) th(i) = t(i, i).real();
  for (std::size_t p = 0; p < kLowerPairs.size(); ++p) {
    const auto [i, j] = kLowerPairs[p];
    th(4 + 2 * p) = t(i, j).real();
    th(5 + 2 * p) = t(i, j).imag();
  }
  return th;
}

inline Matrix4c rho_from_params(const Vector16& th) {
  const Matrix4c t = t_from_params(th);
  const Matrix4c a = t.adjoint() * t;
  return a / a.trace().real();
}

// Largest element change of rho between two parameter vectors.
inline double state_change(const Vector16& from, const Vector16& to) {
  return (rho_from_params(to) - rho_from_params(from)).cwiseAbs().maxCoeff();
}

struct LikelihoodProblem {
  std::vector<Matrix4c> ops;  // R0_hat * t_k * E_k
  std::vector<double> n;
  LikelihoodModel model;
  double scale;  // total observed counts, keeps the objective O(1)

  // Objective -LL/scale + (Tr T^dagger T - 1)^2 and its gradient. The second
  // term pins the scale of T, along which the likelihood is flat.
  double eval(const Vector16& th, Vector16* grad) const {
    const Matrix4c t = t_from_params(th);
    const Matrix4c a = t.adjoint() * t;
    const double tr = a.trace().real();
    const Matrix4c rho = a / tr;
    double ll = 0.0;
    Matrix4c g = Matrix4c::Zero();
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const double raw = (rho * ops[k]).trace().real();
      const double lambda = std::max(raw, kLambdaFloor);
      double dl = 0.0;
      if (model == LikelihoodModel::poisson) {
        ll += (n[k] > 0.0 ? n[k] * std::log(lambda) : 0.0) - lambda;
        dl = n[k] / lambda - 1.0;
      } else {
        ll -= (lambda - n[k]) * (lambda - n[k]) / (2.0 * lambda);
        dl = (n[k] * n[k] - lambda * lambda) / (2.0 * lambda * lambda);
      }
      if (raw > kLambdaFloor) g += dl * ops[k];
    }
    const double pen = (tr - 1.0) * (tr - 1.0);
    if (grad) {
      // dLL = 2 Re Tr(H T^dagger dT), H = (G - Tr(G rho) I) / tr.
      const Matrix4c h = (g - (g * rho).trace().real() * Matrix4c::Identity()) / tr;
      const Matrix4c p = h * t.adjoint();
      Vector16 gl;
      for (int i = 0; i < 4; ++i) gl(i) = 2.0 * p(i, i).real();
      for (std::size_t q = 0; q < kLowerPairs.size(); ++q) {
        const auto [i, j] = kLowerPairs[q];
        gl(4 + 2 * q) = 2.0 * p(j, i).real();
        gl(5 + 2 * q) = -2.0 * p(j, i).imag();
      }
      *grad = -gl / scale + 2.0 * (tr - 1.0) * 2.0 * th;
    }
    return -ll / scale + pen;
  }
};

}  // namespace detail

// Maximum-likelihood estimate over physical states, by BFGS on the
// Cholesky parameters. Converged when the quasi-Newton step falls below
// parameter_tolerance (relative to the parameter scale) or would move no
// element of rho by more than parameter_tolerance; otherwise the best iterate
// is returned with converged = false.
inline ReconstructionResult mle(const CountRecord& record, const DerivedGeometry& d,
                                const MleConfig& cfg = {}) {
  if (!(cfg.parameter_tolerance > 0.0) || cfg.max_iterations <= 0)
    throw ContractError("MLE tolerances must be > 0");
  const CountRecord rec = canonical_order(record);
  const double R0_hat = estimate_R0(rec);

  detail::LikelihoodProblem prob;
  prob.model = cfg.model;
  prob.scale = 0.0;
  for (std::size_t k = 0; k < rec.entries.size(); ++k) {
    prob.ops.push_back(R0_hat * rec.entries[k].time *
                       povm_element(rec.entries[k].setting, d, cfg.modulus).op);
    prob.n.push_back(rec.observed_counts(k));
    prob.scale += prob.n.back();
  }
  prob.scale = std::max(prob.scale, 1.0);

  Matrix4c start = Matrix4c::Identity() / 4.0;
  double condition = 0.0;
  if (cfg.initializer == MleInitializer::linear_inversion) {
    ExactInversionOptions eo;
    eo.modulus = cfg.modulus;
    eo.project = true;
    const auto lin = invert_exact(rec, d, eo);
    condition = lin.condition_number;
    start = lin.rho_hat;
  } else {
    condition = measurement_matrix(rec.settings(), d, cfg.modulus).condition_number;
  }
  // Full rank keeps the Cholesky factor, and every direction, alive.
  constexpr double kMix = 1e-6;
  start = (1.0 - kMix) * start + kMix * Matrix4c::Identity() / 4.0;

  Vector16 th = detail::params_from_rho(hermitian_part(start));
  Vector16 g;
  double f = prob.eval(th, &g);
  Matrix16 hinv = Matrix16::Identity();

  bool converged = false;
  int it = 0;
  int restarts = 0;
  for (; it < cfg.max_iterations; ++it) {
    Vector16 step = -hinv * g;
    if (step.dot(g) >= 0.0) {
      hinv.setIdentity();
      step = -g;
    }
    // Either the parameters or the state they describe must stop moving. The
    // second matters at rank-deficient optima, where the Cholesky entries of
    // the vanishing eigenvalues drift along a flat valley while rho is fixed.
    if (step.lpNorm<Eigen::Infinity>() <=
            cfg.parameter_tolerance * (1.0 + th.lpNorm<Eigen::Infinity>()) ||
        detail::state_change(th, th + step) <= cfg.parameter_tolerance) {
      converged = true;
      break;
    }
    // Backtracking line search, Armijo condition.
    double lr = 1.0;
    Vector16 th_new, g_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      th_new = th + lr * step;
      f_new = prob.eval(th_new, &g_new);
      if (std::isfinite(f_new) && f_new < f && f_new <= f + 1e-4 * lr * g.dot(step)) {
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) {
      if (restarts++ < 3 && !hinv.isIdentity()) {
        hinv.setIdentity();
        continue;
      }
      // No descent possible at working precision.
      converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
    const Vector16 s = th_new - th;
    const Vector16 y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-18) {
      if (it == 0 || hinv.isIdentity()) hinv *= sy / y.squaredNorm();
      const double rho_k = 1.0 / sy;
      const Matrix16 v = Matrix16::Identity() - rho_k * s * y.transpose();
      hinv = v * hinv * v.transpose() + rho_k * s * s.transpose();
    }
    th = th_new;
    g = g_new;
    f = f_new;
  }

  const Matrix4c t = detail::t_from_params(th);
  Matrix4c a = t.adjoint() * t;
  a = hermitian_part(a / a.trace().real());

  ReconstructionResult res;
  res.method = Method::mle;
  res.rho_hat = a;
  res.R0_hat = R0_hat;
  res.condition_number = condition;
  res.residual = count_residual(a, rec, d, R0_hat, cfg.modulus);
  res.log_likelihood = log_likelihood(a, rec, d, cfg.model, cfg.modulus);
  res.converged = converged;
  res.iterations = it;
  return res;
}

}  // namespace spatialtomo
