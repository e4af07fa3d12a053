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
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/measurement.hpp"
#include "spatialtomo/states.hpp"

namespace spatialtomo {

// ---------------------------------------------------------------------------
// Real parameterization of Hermitian 4x4 matrices:
//   [rho_00, rho_11, rho_22, rho_33, Re rho_01, Im rho_01, Re rho_02, ...,
//    Re rho_23, Im rho_23]
// with the upper off-diagonal pairs in row-major order.

using Vector16 = Eigen::Matrix<double, 16, 1>;
using Matrix16 = Eigen::Matrix<double, 16, 16>;

inline constexpr std::array<std::pair<int, int>, 6> kUpperPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline Vector16 to_params(const Matrix4c& rho) {
  Vector16 x;
  for (int j = 0; j < 4; ++j) x(j) = rho(j, j).real();
  for (std::size_t p = 0; p < kUpperPairs.size(); ++p) {
    const auto [j, k] = kUpperPairs[p];
    x(4 + 2 * p) = rho(j, k).real();
    x(5 + 2 * p) = rho(j, k).imag();
  }
  return x;
}

inline Matrix4c from_params(const Vector16& x) {
  Matrix4c rho = Matrix4c::Zero();
  for (int j = 0; j < 4; ++j) rho(j, j) = x(j);
  for (std::size_t p = 0; p < kUpperPairs.size(); ++p) {
    const auto [j, k] = kUpperPairs[p];
    rho(j, k) = cplx(x(4 + 2 * p), x(5 + 2 * p));
    rho(k, j) = std::conj(rho(j, k));
  }
  return rho;
}

// Row r with Tr(rho E) = r . to_params(rho) for Hermitian E.
inline Eigen::Matrix<double, 1, 16> measurement_row(const Matrix4c& e) {
  Eigen::Matrix<double, 1, 16> r;
  for (int j = 0; j < 4; ++j) r(j) = e(j, j).real();
  for (std::size_t p = 0; p < kUpperPairs.size(); ++p) {
    const auto [j, k] = kUpperPairs[p];
    r(4 + 2 * p) = 2.0 * e(j, k).real();
    r(5 + 2 * p) = 2.0 * e(j, k).imag();
  }
  return r;
}

class DegenerateSettingsError : public ReconstructionError {
 public:
  DegenerateSettingsError(int rank)
      : ReconstructionError("measurement settings are not informationally complete (rank " +
                            std::to_string(rank) + " < 16)"),
        rank_(rank) {}
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

struct MeasurementMatrix {
  Eigen::MatrixXd M;  // one row per setting; rates = R0 * M * to_params(rho)
  int rank = 0;
  double condition_number = 0.0;
};

// Builds M and checks it has full column rank 16 (relative SVD threshold
// 1e-10). Throws DegenerateSettingsError otherwise.
inline MeasurementMatrix measurement_matrix(const std::vector<MeasurementSetting>& settings,
                                            const DerivedGeometry& d,
                                            Modulus modulus = Modulus::exact) {
  MeasurementMatrix mm;
  mm.M.resize(static_cast<Eigen::Index>(settings.size()), 16);
  for (std::size_t k = 0; k < settings.size(); ++k)
    mm.M.row(static_cast<Eigen::Index>(k)) = measurement_row(povm_element(settings[k], d, modulus).op);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mm.M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  mm.rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * smax) ++mm.rank;
  if (mm.rank < 16) throw DegenerateSettingsError(mm.rank);
  mm.condition_number = smax / sv(15);
  return mm;
}

// ---------------------------------------------------------------------------

enum class Method { exact_linear, paper_form, mle };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::exact_linear: return "exact";
    case Method::paper_form: return "paper";
    case Method::mle: return "mle";
  }
  return "?";
}

struct ReconstructionResult {
  Matrix4c rho_hat = Matrix4c::Identity() / 4.0;
  Method method = Method::exact_linear;
  double residual = 0.0;  // l2 norm of (predicted - observed) counts
  bool physical_projection_applied = false;
  double condition_number = 0.0;
  double R0_hat = 0.0;
  std::optional<double> log_likelihood;
  std::optional<bool> converged;
  int iterations = 0;

  bool is_physical(double tol = DensityMatrix::kPhysicalTolerance) const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(rho_hat), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) >= -tol;
  }
};

// Record rows sorted by setting id, after check_complete.
inline CountRecord canonical_order(const CountRecord& rec) {
  check_complete(rec);
  CountRecord out = rec;
  std::sort(out.entries.begin(), out.entries.end(),
            [](const CountEntry& a, const CountEntry& b) { return a.setting.id < b.setting.id; });
  return out;
}

// eta*N per unit time: the summed rates of the four slit-pair settings.
inline double estimate_R0(const CountRecord& rec) {
  int found = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < rec.entries.size(); ++k)
    if (rec.entries[k].setting.detection_arms() == 0) {
      ++found;
      sum += rec.observed_rate(k);
    }
  if (found != 4) throw ReconstructionError("record needs exactly four slit-pair settings");
  if (!(sum > 0.0)) throw ReconstructionError("slit-pair counts are all zero; cannot normalize");
  return sum;
}

inline double count_residual(const Matrix4c& rho, const CountRecord& rec, const DerivedGeometry& d,
                             double R0_hat, Modulus modulus = Modulus::exact) {
  double ss = 0.0;
  for (std::size_t k = 0; k < rec.entries.size(); ++k) {
    const auto e = povm_element(rec.entries[k].setting, d, modulus);
    const double predicted = R0_hat * rec.entries[k].time * (rho * e.op).trace().real();
    const double diff = predicted - rec.observed_counts(k);
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

struct ExactInversionOptions {
  Modulus modulus = Modulus::exact;
  bool project = false;  // apply project_physical to the estimate
};

// Linear inversion against the full forward model. Least squares over the
// 15 free real parameters left once the trace is fixed to 1.
inline ReconstructionResult invert_exact(const CountRecord& record, const DerivedGeometry& d,
                                         const ExactInversionOptions& opts = {}) {
  const CountRecord rec = canonical_order(record);
  const auto mm = measurement_matrix(rec.settings(), d, opts.modulus);
  const double R0_hat = estimate_R0(rec);

  const Eigen::Index n = mm.M.rows();
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) y(k) = rec.observed_rate(static_cast<std::size_t>(k)) / R0_hat;

  // x = e_33 + reduced(z): rho_33 = 1 - rho_00 - rho_11 - rho_22.
  Eigen::MatrixXd A(n, 15);
  for (int j = 0; j < 3; ++j) A.col(j) = mm.M.col(j) - mm.M.col(3);
  A.rightCols(12) = mm.M.rightCols(12);
  const Eigen::VectorXd rhs = y - mm.M.col(3);
  const Eigen::VectorXd z = A.colPivHouseholderQr().solve(rhs);

  Vector16 x;
  x.head(3) = z.head(3);
  x(3) = 1.0 - z.head(3).sum();
  x.tail(12) = z.tail(12);

  ReconstructionResult res;
  res.method = Method::exact_linear;
  res.rho_hat = from_params(x);
  res.condition_number = mm.condition_number;
  res.R0_hat = R0_hat;
  res.residual = count_residual(res.rho_hat, rec, d, R0_hat, opts.modulus);
  if (opts.project) {
    res.rho_hat = project_physical(res.rho_hat).matrix();
    res.physical_projection_applied = true;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Closed-form inversion for detection slits at x0 = 0 and x1, assuming
// |r+/-| = 1. With eta*N the summed slit-pair rates, C the rates and chi =
// L/(2b):
//
//   rho_{lm;lm}    = C_{l,m} / eta N
//
// single propagation (l or m fixed to a slit, the other arm at x0 / x1):
//   rho_{+m;-m}    = [chi (C_{x0,m} + i C_{x1,m}) - (C_{+,m} + C_{-,m}) (1+i)/2] / eta N
//   rho_{l+;l-}    = [chi (C_{l,x0} + i C_{l,x1}) - (C_{l,+} + C_{l,-}) (1+i)/2] / eta N
//
// double propagation, with S0 (S1) the sum of the eight single-propagation
// rates with the detection slit at x0 (x1) and Sd = C_{+,x1} - C_{+,x0} +
// C_{-,x1} - C_{-,x0} + C_{x0,+} - C_{x1,+} + C_{x0,-} - C_{x1,-}:
//   Re rho_{++;--} = [chi^2 (C_{x0,x0} - C_{x1,x1}) - chi (S0 - S1)/2] / eta N
//   Re rho_{+-;-+} = [chi^2 (C_{x0,x0} + C_{x1,x1}) - chi (S0 + S1)/2] / eta N + 1/2
//   Im rho_{++;--} = [chi^2 (C_{x0,x1} + C_{x1,x0}) - chi (S0 + S1)/2] / eta N + 1/2
//   Im rho_{+-;-+} = [-chi^2 (C_{x0,x1} - C_{x1,x0}) + chi Sd/2] / eta N
//
// These are obtained by expanding Tr(rho E) for the sixteen unit-modulus
// operators. The commonly printed single-propagation expressions are the
// complex conjugates of the ones above (they correspond to the ket
// (r+, r-) rather than its conjugate), and the printed double-propagation
// expressions join the chi^2 and chi groups with a product and repeat the
// 1/eta N factor. The first two real parts agree with the printed text once
// the product is read as a sum; the imaginary parts do not.

namespace detail {

// '+', '-', '0' (x0 = 0) or '1' (x1); 0 if the position is neither.
inline char arm_code(const Arm& arm, double x1) {
  if (const auto* s = std::get_if<SlitPlane>(&arm)) return s->slit == Slit::plus ? '+' : '-';
  const double x = std::get<DetectionPlane>(arm).x;
  const double tol = 1e-6 * x1;
  if (std::abs(x) <= tol) return '0';
  if (std::abs(x - x1) <= tol) return '1';
  return 0;
}

}  // namespace detail

inline ReconstructionResult invert_paper(const CountRecord& record, const DerivedGeometry& d) {
  const CountRecord rec = canonical_order(record);
  std::map<std::string, double> C;
  for (std::size_t k = 0; k < rec.entries.size(); ++k) {
    const char s = detail::arm_code(rec.entries[k].setting.signal, d.x1);
    const char i = detail::arm_code(rec.entries[k].setting.idler, d.x1);
    if (!s || !i) throw ReconstructionError("record is not on the standard detection positions {0, x1}");
    const std::string key{s, i};
    if (C.count(key)) throw ReconstructionError("duplicate measurement configuration " + key);
    C[key] = rec.observed_rate(k);
  }
  static constexpr const char* kRequired[] = {"++", "+-", "-+", "--", "+0", "+1", "-0", "-1",
                                              "0+", "1+", "00", "01", "0-", "1-", "10", "11"};
  for (const char* key : kRequired)
    if (!C.count(key)) throw ReconstructionError(std::string("missing measurement configuration ") + key);

  const double etaN = C["++"] + C["+-"] + C["-+"] + C["--"];
  if (!(etaN > 0.0)) throw ReconstructionError("slit-pair counts are all zero; cannot normalize");
  const double chi = d.chi;
  const cplx one_plus_i{1.0, 1.0};

  auto single = [&](double c0, double c1, double diag_sum) {
    return (chi * cplx(c0, c1) - 0.5 * diag_sum * one_plus_i) / etaN;
  };

  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = C["++"] / etaN;
  rho(1, 1) = C["+-"] / etaN;
  rho(2, 2) = C["-+"] / etaN;
  rho(3, 3) = C["--"] / etaN;
  // Idler propagated, signal slit fixed.
  rho(0, 1) = single(C["+0"], C["+1"], C["++"] + C["+-"]);
  rho(2, 3) = single(C["-0"], C["-1"], C["-+"] + C["--"]);
  // Signal propagated, idler slit fixed.
  rho(0, 2) = single(C["0+"], C["1+"], C["++"] + C["-+"]);
  rho(1, 3) = single(C["0-"], C["1-"], C["+-"] + C["--"]);

  const double S0 = C["+0"] + C["-0"] + C["0+"] + C["0-"];
  const double S1 = C["+1"] + C["-1"] + C["1+"] + C["1-"];
  const double Sd = C["+1"] - C["+0"] + C["-1"] - C["-0"] + C["0+"] - C["1+"] + C["0-"] - C["1-"];
  const double chi2 = chi * chi;
  const double re03 = (chi2 * (C["00"] - C["11"]) - 0.5 * chi * (S0 - S1)) / etaN;
  const double re12 = (chi2 * (C["00"] + C["11"]) - 0.5 * chi * (S0 + S1)) / etaN + 0.5;
  const double im03 = (chi2 * (C["01"] + C["10"]) - 0.5 * chi * (S0 + S1)) / etaN + 0.5;
  const double im12 = (-chi2 * (C["01"] - C["10"]) + 0.5 * chi * Sd) / etaN;
  rho(0, 3) = cplx(re03, im03);
  rho(1, 2) = cplx(re12, im12);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < r; ++c) rho(r, c) = std::conj(rho(c, r));

  ReconstructionResult res;
  res.method = Method::paper_form;
  res.rho_hat = rho;
  res.R0_hat = etaN;
  res.residual = count_residual(rho, rec, d, etaN);
  try {
    res.condition_number = measurement_matrix(rec.settings(), d).condition_number;
  } catch (const DegenerateSettingsError&) {
    res.condition_number = std::numeric_limits<double>::infinity();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Likelihood.

enum class LikelihoodModel { poisson, gaussian };

// Smallest expected count used inside the logarithm.
inline constexpr double kLambdaFloor = 1e-9;

// Expected counts lambda_k = R0_hat * t_k * Tr(rho E_k), floored at
// kLambdaFloor. Poisson: sum n ln(lambda) - lambda (the ln n! constant is
// dropped). Gaussian: -sum (lambda - n)^2 / (2 lambda).
inline double log_likelihood(const Matrix4c& rho, const CountRecord& rec, const DerivedGeometry& d,
                             LikelihoodModel model = LikelihoodModel::poisson,
                             Modulus modulus = Modulus::exact) {
  const double R0_hat = estimate_R0(rec);
  double ll = 0.0;
  for (std::size_t k = 0; k < rec.entries.size(); ++k) {
    const auto e = povm_element(rec.entries[k].setting, d, modulus);
    const double lambda =
        std::max(R0_hat * rec.entries[k].time * (rho * e.op).trace().real(), kLambdaFloor);
    const double n = rec.observed_counts(k);
    if (model == LikelihoodModel::poisson) {
      ll += (n > 0.0 ? n * std::log(lambda) : 0.0) - lambda;
    } else {
      ll -= (lambda - n) * (lambda - n) / (2.0 * lambda);
    }
  }
  return ll;
}

inline double log_likelihood(const DensityMatrix& rho, const CountRecord& rec,
                             const DerivedGeometry& d,
                             LikelihoodModel model = LikelihoodModel::poisson,
                             Modulus modulus = Modulus::exact) {
  if (!rho.is_physical()) throw ContractError("log_likelihood: density matrix is not physical");
  return log_likelihood(rho.matrix(), rec, d, model, modulus);
}

}  // namespace spatialtomo
