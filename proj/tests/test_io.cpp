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
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "spatialtomo/io.hpp"
#include "test_support.hpp"

namespace {

using namespace spatialtomo;
using io::json;

json reference_config() {
  return json::parse(R"({
    "geometry": {"lambda_pump_nm": 413.1, "z_a_mm": 200, "z_minus_za_mm": 600,
                 "s_mm": 0.25, "a_mm": 0.05, "b_mm": 0.05},
    "pump": {"type": "plane_wave"},
    "calibration": {"R0_hz": 1e6, "time_s": 0.04},
    "noise": {"seed": 42, "noiseless": false}
  })");
}

std::string config_error(const json& j) {
  try {
    io::run_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, GeometryUnits) {
  const auto c = io::run_config_from_json(reference_config());
  const auto ref = Geometry::reference_setup();
  EXPECT_NEAR(c.geometry.lambda_pump, ref.lambda_pump, 1e-22);
  EXPECT_NEAR(c.geometry.z_A, ref.z_A, 1e-15);
  EXPECT_NEAR(c.geometry.z, ref.z, 1e-15);
  EXPECT_NEAR(c.geometry.s, ref.s, 1e-18);
  EXPECT_NEAR(c.geometry.a, ref.a, 1e-18);
  EXPECT_NEAR(c.geometry.b, ref.b, 1e-18);
  EXPECT_FALSE(c.geometry.L_override.has_value());
  EXPECT_EQ(c.noise.seed, 42u);
  EXPECT_EQ(c.calibration.exposure, Exposure::balanced);
  EXPECT_FALSE(c.mle_enabled);
}

TEST(Config, ErrorsCarryFieldPaths) {
  auto j = reference_config();
  j["geometry"].erase("s_mm");
  EXPECT_NE(config_error(j).find("geometry.s_mm"), std::string::npos);

  j = reference_config();
  j["geometry"]["a_mm"] = "wide";
  EXPECT_NE(config_error(j).find("geometry.a_mm"), std::string::npos);

  j = reference_config();
  j["pump"]["type"] = "bessel";
  EXPECT_NE(config_error(j).find("pump.type"), std::string::npos);

  j = reference_config();
  j["pump"] = {{"type", "gaussian"}};
  EXPECT_NE(config_error(j).find("pump.waist_mm"), std::string::npos);

  j = reference_config();
  j["calibration"]["R0_hz"] = -1;
  EXPECT_NE(config_error(j).find("calibration.R0_hz"), std::string::npos);

  j = reference_config();
  j["noise"]["seed"] = -3;
  EXPECT_NE(config_error(j).find("noise.seed"), std::string::npos);

  j = reference_config();
  j["mle"] = {{"likelihood", "cauchy"}};
  EXPECT_NE(config_error(j).find("mle.likelihood"), std::string::npos);

  j = reference_config();
  j["pump"] = {{"type", "tabulated"}, {"samples", {{{"x_mm", 0.0}, {"value", {1.0, 0.0}}}}}};
  EXPECT_NE(config_error(j).find("pump"), std::string::npos);
}

TEST(Config, PumpVariants) {
  auto j = reference_config();
  j["pump"] = {{"type", "gaussian"}, {"waist_mm", 0.4}, {"center_mm", 0.1}};
  auto g = std::get<GaussianPump>(io::run_config_from_json(j).pump);
  EXPECT_NEAR(g.waist, 0.4e-3, 1e-18);
  EXPECT_NEAR(g.center, 0.1e-3, 1e-18);
  j["pump"] = {{"type", "odd_mode"}, {"waist_mm", 1.0}};
  EXPECT_TRUE(std::holds_alternative<OddModePump>(io::run_config_from_json(j).pump));
  j["pump"] = json::parse(R"({"type": "tabulated", "samples": [
      {"x_mm": -1, "value": [0, 0]}, {"x_mm": 0, "value": [1, 0.5]}, {"x_mm": 1, "value": 2}]})");
  const auto t = std::get<TabulatedPump>(io::run_config_from_json(j).pump);
  ASSERT_EQ(t.samples.size(), 3u);
  EXPECT_EQ(t.samples[1].value, cplx(1.0, 0.5));
  EXPECT_EQ(t.samples[2].value, cplx(2.0, 0.0));
}

TEST(Config, MleSection) {
  auto j = reference_config();
  j["mle"] = {{"max_iterations", 500}, {"parameter_tolerance", 1e-6}, {"likelihood", "gaussian"},
              {"initializer", "maximally_mixed"}};
  const auto c = io::run_config_from_json(j);
  EXPECT_EQ(c.mle.max_iterations, 500);
  EXPECT_EQ(c.mle.parameter_tolerance, 1e-6);
  EXPECT_EQ(c.mle.model, LikelihoodModel::gaussian);
  EXPECT_EQ(c.mle.initializer, MleInitializer::maximally_mixed);
  EXPECT_TRUE(c.mle_enabled);
}

TEST(Format, ShortestRoundTrip) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(io::fmt(v)), v);
  }
  EXPECT_EQ(io::fmt(0.25), "0.25");
}

TEST(Density, JsonRoundTripIsExact) {
  std::mt19937_64 rng(3);
  const Matrix4c r = st_test::random_full_rank(rng);
  const json j = io::density_json(r);
  EXPECT_EQ(j["basis"][1], "+-");
  const Matrix4c back = io::rho_from_json(json::parse(j.dump())["rho"]);
  EXPECT_EQ(back, r);
}

TEST(CountRecordIo, JsonRoundTripIsExact) {
  const auto d = st_test::reference();
  SimulationOptions o;
  o.noiseless = true;
  o.base_time = 0.0123;
  std::mt19937_64 rng(5);
  const auto rec = simulate_counts(DensityMatrix(st_test::random_full_rank(rng)), standard_settings(d), d, o);
  const auto back = io::count_record_from_json(json::parse(io::to_json(rec).dump()));
  ASSERT_EQ(back.entries.size(), 16u);
  for (int k = 0; k < 16; ++k) {
    EXPECT_EQ(back.entries[k].setting, rec.entries[k].setting);
    EXPECT_EQ(back.entries[k].counts, rec.entries[k].counts);
    EXPECT_EQ(back.entries[k].time, rec.entries[k].time);
    EXPECT_EQ(back.entries[k].exact_rate, rec.entries[k].exact_rate);
  }
  EXPECT_EQ(back.R0, rec.R0);
  EXPECT_EQ(back.chi, rec.chi);
  EXPECT_TRUE(back.noiseless);
  // Identical estimates from the reloaded record.
  const auto a = invert_exact(rec, d), b = invert_exact(back, d);
  EXPECT_LT((a.rho_hat - b.rho_hat).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CountRecordIo, MalformedRecordsRejected) {
  const auto d = st_test::reference();
  SimulationOptions o;
  const auto good = io::to_json(simulate_counts(DensityMatrix(), standard_settings(d), d, o));
  auto j = good;
  j["counts"][3] = -1;
  EXPECT_THROW(io::count_record_from_json(j), ConfigError);
  j = good;
  j["settings"][2]["arm_s"]["plane"] = "pupil";
  EXPECT_THROW(io::count_record_from_json(j), ConfigError);
  j = good;
  j["settings"].erase(15);
  EXPECT_THROW(io::count_record_from_json(j), ConfigError);
  j = good;
  j.erase("R0_hz");
  EXPECT_THROW(io::count_record_from_json(j), ConfigError);
}

TEST(CountRecordIo, CsvMirror) {
  const auto d = st_test::reference();
  SimulationOptions o;
  o.noiseless = true;
  const auto rec = simulate_counts(DensityMatrix(), standard_settings(d), d, o);
  const std::string csv = io::to_csv(rec);
  std::istringstream in(csv);
  std::string line;
  int n = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "id,arm_s,x_s_mm,arm_i,x_i_mm,counts,time_s,exact_rate_hz");
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
  }
  EXPECT_EQ(n, 16);
}

TEST(ResultIo, Fields) {
  const auto d = st_test::reference();
  SimulationOptions o;
  o.noiseless = true;
  const auto rec = simulate_counts(DensityMatrix(st_test::bell_like()), standard_settings(d), d, o);
  const auto j = io::to_json(mle(rec, d));
  EXPECT_EQ(j["method"], "mle");
  EXPECT_TRUE(j["physical"].get<bool>());
  EXPECT_TRUE(j.contains("log_likelihood"));
  EXPECT_TRUE(j.contains("converged"));
  EXPECT_TRUE(j.contains("condition_number"));
  EXPECT_TRUE(j.contains("residual"));
  const auto e = io::to_json(invert_exact(rec, d));
  EXPECT_EQ(e["method"], "exact");
  EXPECT_FALSE(e.contains("log_likelihood"));
}

}  // namespace
