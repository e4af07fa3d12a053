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


#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "spatialtomo/geometry.hpp"
#include "test_support.hpp"

namespace {

using spatialtomo::derive_params;
using spatialtomo::Geometry;
using spatialtomo::GeometryError;

constexpr double kPi = std::numbers::pi;

TEST(Geometry, ReferenceQuarterPhasePosition) {
  const auto d = derive_params(Geometry::reference_setup());
  EXPECT_NEAR(d.x1, 0.496e-3, 0.002e-3);
}

TEST(Geometry, AlphaFromDownConvertedWavelength) {
  // alpha = (z - z_A) * lambda_dc / (2 pi), lambda_dc = 2 * 413.1 nm.
  const double expected = 0.6 * 826.2e-9 / (2.0 * kPi);
  const auto d = derive_params(Geometry::reference_setup());
  EXPECT_NEAR(d.alpha, expected, 1e-18);
  EXPECT_NEAR(d.alpha, 7.89e-8, 1e-10);
}

TEST(Geometry, DerivedQuantitiesFollowDefinitions) {
  const auto d = derive_params(Geometry::reference_setup());
  EXPECT_DOUBLE_EQ(d.k_dc, d.k_p / 2.0);
  EXPECT_DOUBLE_EQ(d.L, 4.0 * kPi * d.alpha / 0.05e-3);
  EXPECT_DOUBLE_EQ(d.chi, d.L / (2.0 * 0.05e-3));
  EXPECT_GE(d.chi, 1.0);
}

TEST(Geometry, LOverrideIsHonoured) {
  auto g = Geometry::reference_setup();
  g.L_override = 2e-3;
  const auto d = derive_params(g);
  EXPECT_DOUBLE_EQ(d.L, 2e-3);
  EXPECT_DOUBLE_EQ(d.chi, 20.0);
  g.L_override = 0.05e-3;  // below 2b
  EXPECT_THROW(derive_params(g), GeometryError);
}

TEST(Geometry, ZeroPropagationRejected) {
  auto g = Geometry::reference_setup();
  g.z = g.z_A;
  try {
    derive_params(g);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.field(), "z");
  }
}

TEST(Geometry, InvariantViolationsNameTheField) {
  auto check = [](Geometry g, const char* field) {
    try {
      derive_params(g);
      ADD_FAILURE() << "expected GeometryError on " << field;
    } catch (const GeometryError& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  auto g = Geometry::reference_setup();
  g.s = g.a / 2.0;
  check(g, "s");
  g = Geometry::reference_setup();
  g.b = 2.0 * g.s;
  check(g, "b");
  g = Geometry::reference_setup();
  g.a = -1.0;
  check(g, "a");
  g = Geometry::reference_setup();
  g.lambda_pump = std::nan("");
  check(g, "lambda_pump");
}

TEST(Geometry, ScaleConsistency) {
  const auto g = Geometry::reference_setup();
  const auto d = derive_params(g);
  for (double c : {0.5, 3.0, 10.0}) {
    Geometry h = g;
    h.lambda_pump *= c;
    h.z_A *= c;
    h.z *= c;
    h.s *= c;
    h.a *= c;
    h.b *= c;
    const auto e = derive_params(h);
    EXPECT_NEAR(e.alpha / d.alpha, c * c, 1e-12);
    EXPECT_NEAR(e.x1 / d.x1, c, 1e-12);
    EXPECT_NEAR(e.L / d.L, c, 1e-12);
    EXPECT_NEAR(e.chi, d.chi, 1e-9 * d.chi);
  }
}

TEST(Geometry, DeterministicDerivation) {
  const auto a = derive_params(Geometry::reference_setup());
  const auto b = derive_params(Geometry::reference_setup());
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.x1, b.x1);
  EXPECT_EQ(a.chi, b.chi);
}

TEST(GeometryValidate, ReferencePassesWithSmallFraunhoferFigure) {
  const auto r = spatialtomo::validate(Geometry::reference_setup());
  EXPECT_TRUE(r.ok());
  ASSERT_TRUE(r.fraunhofer_figure.has_value());
  // b^2 / (4 alpha) with alpha from the hand calculation above.
  const double alpha = 0.6 * 826.2e-9 / (2.0 * kPi);
  EXPECT_NEAR(*r.fraunhofer_figure, 0.05e-3 * 0.05e-3 / (4.0 * alpha), 1e-12);
  EXPECT_NEAR(*r.fraunhofer_figure, 0.008, 0.0005);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_TRUE(r.basis_overlap.has_value());
  EXPECT_EQ(*r.basis_overlap, 0.0);
}

TEST(GeometryValidate, ReportsEachFailure) {
  auto g = Geometry::reference_setup();
  g.s = g.a / 2.0;
  g.b = 2.0 * g.s;
  const auto r = spatialtomo::validate(g);
  EXPECT_FALSE(r.ok());
  int failed = 0;
  for (const auto& c : r.checks) {
    if (c.name == "s >= a" || c.name == "b <= s") {
      EXPECT_FALSE(c.passed) << c.name;
    }
    failed += !c.passed;
  }
  EXPECT_EQ(failed, 2);
  EXPECT_FALSE(r.warnings.empty());  // overlap 0.5
}

TEST(GeometryValidate, WarnsOutsideFarField) {
  auto g = Geometry::reference_setup();
  g.b = g.s;
  const auto r = spatialtomo::validate(g);
  EXPECT_TRUE(r.ok());
  EXPECT_GT(*r.fraunhofer_figure, 0.05);
  EXPECT_FALSE(r.warnings.empty());
}

}  // namespace
