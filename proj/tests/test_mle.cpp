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


#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spatialtomo/mle.hpp"
#include "test_support.hpp"

namespace {

using namespace spatialtomo;
using st_test::reference;

CountRecord poisson(const Matrix4c& rho, const DerivedGeometry& d, double counts, std::uint64_t seed) {
  SimulationOptions o;
  o.seed = seed;
  o.base_time = base_time_for_counts(counts, o.R0);
  return simulate_counts(DensityMatrix(rho), standard_settings(d), d, o);
}

CountRecord noiseless(const Matrix4c& rho, const DerivedGeometry& d) {
  SimulationOptions o;
  o.noiseless = true;
  return simulate_counts(DensityMatrix(rho), standard_settings(d), d, o);
}

void expect_physical(const ReconstructionResult& r) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(r.rho_hat);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  EXPECT_NEAR(r.rho_hat.trace().real(), 1.0, 1e-9);
  EXPECT_LT(hermiticity_defect(r.rho_hat), 1e-12);
}

TEST(Mle, NoiselessBellLike) {
  const auto d = reference();
  const auto r = mle(noiseless(st_test::bell_like(), d), d);
  ASSERT_TRUE(r.converged.has_value());
  EXPECT_TRUE(*r.converged);
  EXPECT_LE(r.iterations, 100000);
  EXPECT_GE(fidelity(st_test::bell_like(), r.rho_hat), 0.999);
  ASSERT_TRUE(r.log_likelihood.has_value());
  expect_physical(r);
}

TEST(Mle, NoiselessPlaneWave) {
  const auto d = reference();
  const Matrix4c truth = to_density(build_state(PlaneWavePump{}, d)).matrix();
  const auto r = mle(noiseless(truth, d), d);
  EXPECT_GE(fidelity(truth, r.rho_hat), 0.999);
}

// Pure truth: unprojected linear inversion is unbiased, so its <psi|rho|psi>
// averages ~1 and can exceed 1; MLE is compared with the projected estimate.
TEST(Mle, PoissonPureTruthBeatsProjectedLinear) {
  const auto d = reference();
  const Matrix4c truth = st_test::bell_like();
  double f_mle = 0.0, f_proj = 0.0;
  ExactInversionOptions proj;
  proj.project = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rec = poisson(truth, d, 1e4, seed);
    const auto r = mle(rec, d);
    expect_physical(r);
    f_mle += fidelity(truth, r.rho_hat);
    f_proj += fidelity(truth, invert_exact(rec, d, proj).rho_hat);
  }
  EXPECT_GE(f_mle / 50.0, 0.98);
  EXPECT_GE(f_mle, f_proj);
}

// Full-rank truth: the linear estimate is physical and maximizes the
// likelihood, so the two coincide.
TEST(Mle, PoissonFullRankTruthMatchesLinear) {
  const auto d = reference();
  const Matrix4c truth = 0.9 * st_test::bell_like() + 0.1 * Matrix4c::Identity() / 4.0;
  double f_mle = 0.0, f_lin = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rec = poisson(truth, d, 1e4, seed);
    const auto r = mle(rec, d);
    expect_physical(r);
    f_mle += fidelity(truth, r.rho_hat);
    f_lin += fidelity(truth, invert_exact(rec, d).rho_hat);
  }
  EXPECT_GE(f_mle / 50.0, f_lin / 50.0 - 1e-9);
  EXPECT_GE(f_mle / 50.0, 0.98);
}

TEST(Mle, MaximallyMixedAtHighCounts) {
  const auto d = reference();
  const Matrix4c mixed = Matrix4c::Identity() / 4.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = mle(poisson(mixed, d, 1e5, seed), d);
    EXPECT_LE(trace_distance(r.rho_hat, mixed), 0.05);
  }
}

TEST(Mle, InitializersAgree) {
  const auto d = reference();
  const auto rec = poisson(st_test::bell_like(), d, 1e4, 9);
  MleConfig a, b;
  b.initializer = MleInitializer::maximally_mixed;
  const auto ra = mle(rec, d, a), rb = mle(rec, d, b);
  EXPECT_TRUE(*ra.converged);
  EXPECT_TRUE(*rb.converged);
  EXPECT_LT(trace_distance(ra.rho_hat, rb.rho_hat), 1e-4);
}

TEST(Mle, GaussianModel) {
  const auto d = reference();
  MleConfig cfg;
  cfg.model = LikelihoodModel::gaussian;
  const auto r = mle(poisson(st_test::bell_like(), d, 1e4, 2), d, cfg);
  expect_physical(r);
  EXPECT_GE(fidelity(st_test::bell_like(), r.rho_hat), 0.97);
}

TEST(Mle, PermutationInvariant) {
  const auto d = reference();
  auto rec = poisson(st_test::bell_like(), d, 1e4, 4);
  const auto a = mle(rec, d);
  std::mt19937_64 rng(1);
  std::shuffle(rec.entries.begin(), rec.entries.end(), rng);
  const auto b = mle(rec, d);
  EXPECT_EQ(a.rho_hat, b.rho_hat);
}

TEST(Mle, NonConvergenceIsFlagged) {
  const auto d = reference();
  MleConfig cfg;
  cfg.max_iterations = 1;
  cfg.initializer = MleInitializer::maximally_mixed;
  const auto r = mle(poisson(st_test::bell_like(), d, 1e4, 4), d, cfg);
  ASSERT_TRUE(r.converged.has_value());
  EXPECT_FALSE(*r.converged);
  expect_physical(r);
}

TEST(Mle, RejectsBadConfig) {
  const auto d = reference();
  const auto rec = noiseless(st_test::bell_like(), d);
  MleConfig cfg;
  cfg.parameter_tolerance = 0.0;
  EXPECT_THROW(mle(rec, d, cfg), ContractError);
}

TEST(Mle, LikelihoodNotBelowLinearStart) {
  const auto d = reference();
  ExactInversionOptions proj;
  proj.project = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rec = poisson(st_test::bell_like(), d, 1e3, seed);
    const auto r = mle(rec, d);
    const auto lin = invert_exact(rec, d, proj);
    EXPECT_GE(*r.log_likelihood, log_likelihood(lin.rho_hat, rec, d) - 1e-6);
  }
}

}  // namespace
