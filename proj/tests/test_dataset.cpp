// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cpwlfit/dataset.hpp"
#include "cpwlfit/error.hpp"

using namespace cpwlfit;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/cpwlfit_test_") + name + "_" +
         std::to_string(::getpid()) + ".csv";
}

}  // namespace

TEST_CASE("CSV round trip preserves values exactly") {
  DataSet ds;
  ds.dim = 2;
  ds.name = "t";
  ds.x = {{0.1, -2.5}, {3.0, 0.125}, {1.0 / 3.0, 7.0}};
  ds.z = {1.0, -0.25, 1e-17};
  std::string path = temp_path("roundtrip");
  save_csv(ds, path);
  DataSet back = load_csv(path);
  REQUIRE(back.dim == 2);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.z[i] == ds.z[i]);
    for (int r = 0; r < 2; ++r) CHECK(back.x[i][r] == ds.x[i][r]);
  }
  std::remove(path.c_str());
}

TEST_CASE("bad CSV header is rejected with the line number") {
  std::string path = temp_path("badheader");
  {
    std::ofstream f(path);
    f << "a,b,c\n1,2,3\n";
  }
  CHECK_THROWS_AS(load_csv(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("short row is rejected") {
  std::string path = temp_path("shortrow");
  {
    std::ofstream f(path);
    f << "x1,x2,z\n1,2,3\n4,5\n";
  }
  CHECK_THROWS_AS(load_csv(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("duplicate points fail validation") {
  DataSet ds;
  ds.dim = 1;
  ds.x = {{1.0}, {1.0}};
  ds.z = {0.0, 1.0};
  CHECK_THROWS_AS(ds.validate(), Error);
}

TEST_CASE("synthetic values match their formulas") {
  CHECK(synthetic_value(SyntheticFunction::X2SinX1, {2.0, 3.0}) ==
        doctest::Approx(3.0 * std::sin(2.0)));
  CHECK(synthetic_value(SyntheticFunction::X1SqMinusX2Sq, {3.0, 2.0}) ==
        doctest::Approx(5.0));
  CHECK(synthetic_value(SyntheticFunction::SumOfSquares3, {1.0, 2.0, 3.0}) ==
        doctest::Approx(14.0));
  CHECK(synthetic_value(SyntheticFunction::ProductXYZ, {2.0, 3.0, 4.0}) ==
        doctest::Approx(24.0));
  CHECK(synthetic_arity(SyntheticFunction::X2SinX1) == 2);
  CHECK(synthetic_arity(SyntheticFunction::ProductXYZ) == 3);
}

TEST_CASE("random generation is deterministic per seed") {
  SyntheticSpec spec;
  spec.function = SyntheticFunction::X1SqMinusX2Sq;
  spec.box_lo = {-1.0, -1.0};
  spec.box_hi = {1.0, 1.0};
  spec.count = 20;
  spec.seed = 42;
  DataSet a = generate(spec);
  DataSet b = generate(spec);
  REQUIRE(a.size() == 20);
  CHECK(a.x == b.x);
  CHECK(a.z == b.z);
  spec.seed = 43;
  DataSet c = generate(spec);
  CHECK(a.x != c.x);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.z[i] == doctest::Approx(a.x[i][0] * a.x[i][0] -
                                    a.x[i][1] * a.x[i][1]));
    for (int r = 0; r < 2; ++r) {
      CHECK(a.x[i][r] >= -1.0);
      CHECK(a.x[i][r] <= 1.0);
    }
  }
}

TEST_CASE("grid generation fills the box corners") {
  SyntheticSpec spec;
  spec.function = SyntheticFunction::X1SqMinusX2Sq;
  spec.box_lo = {0.0, 0.0};
  spec.box_hi = {2.0, 2.0};
  spec.count = 9;
  spec.mode = SamplingMode::Grid;
  DataSet g = generate(spec);
  REQUIRE(g.size() == 9);
  bool has_corner = false;
  for (const auto& x : g.x)
    if (x[0] == 2.0 && x[1] == 2.0) has_corner = true;
  CHECK(has_corner);
}

TEST_CASE("rescale maps every dimension onto [0,1] and unscale inverts") {
  DataSet ds;
  ds.dim = 2;
  ds.x = {{-2.0, 10.0}, {0.0, 30.0}, {4.0, 20.0}};
  ds.z = {5.0, 9.0, 7.0};
  auto [scaled, info] = rescale(ds);
  for (int i = 0; i < scaled.size(); ++i) {
    CHECK(scaled.z[i] >= 0.0);
    CHECK(scaled.z[i] <= 1.0);
    for (int r = 0; r < 2; ++r) {
      CHECK(scaled.x[i][r] >= 0.0);
      CHECK(scaled.x[i][r] <= 1.0);
    }
  }
  CHECK(scaled.x[0][0] == doctest::Approx(0.0));
  CHECK(scaled.x[2][0] == doctest::Approx(1.0));
  DataSet back = unscale(scaled, info);
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(back.z[i] == doctest::Approx(ds.z[i]).epsilon(1e-12));
    for (int r = 0; r < 2; ++r)
      CHECK(back.x[i][r] == doctest::Approx(ds.x[i][r]).epsilon(1e-12));
  }
}

TEST_CASE("constant dimensions are flagged and left unscaled") {
  DataSet ds;
  ds.dim = 2;
  ds.x = {{1.0, 5.0}, {1.0, 6.0}, {1.0, 7.0}};
  ds.z = {3.0, 3.0, 3.0};
  auto [scaled, info] = rescale(ds);
  CHECK(info.constant[0]);        // x1 constant
  CHECK_FALSE(info.constant[1]);  // x2 varies
  CHECK(info.constant[2]);        // z constant
  // Constant dimensions keep scale 1 but are recentered to 0.
  CHECK(scaled.x[0][0] == doctest::Approx(0.0));
  CHECK(scaled.z[0] == doctest::Approx(0.0));
  DataSet back = unscale(scaled, info);
  CHECK(back.x[0][0] == doctest::Approx(ds.x[0][0]));
  CHECK(back.z[0] == doctest::Approx(ds.z[0]));
}

TEST_CASE("general position holds for random points, fails on a line") {
  SyntheticSpec spec;
  spec.function = SyntheticFunction::X1SqMinusX2Sq;
  spec.box_lo = {-1.0, -1.0};
  spec.box_hi = {1.0, 1.0};
  spec.count = 12;
  spec.seed = 5;
  GeneralPositionReport ok = check_general_position(generate(spec));
  CHECK(ok.pass);
  CHECK(ok.exhaustive);

  DataSet bad;
  bad.dim = 2;
  bad.x = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {0.5, 0.7}};
  bad.z = {0.0, 0.0, 0.0, 0.0};
  GeneralPositionReport r = check_general_position(bad);
  CHECK_FALSE(r.pass);
  REQUIRE(r.offending_subset.size() == 3);
  CHECK(r.offending_subset[0] == 0);
  CHECK(r.offending_subset[1] == 1);
  CHECK(r.offending_subset[2] == 2);
}

TEST_CASE("dataset JSON round trip") {
  DataSet ds;
  ds.dim = 1;
  ds.name = "json";
  ds.x = {{0.5}, {1.5}};
  ds.z = {-1.0, 2.0};
  DataSet back = DataSet::from_json(ds.to_json());
  CHECK(back.dim == 1);
  CHECK(back.name == "json");
  CHECK(back.x == ds.x);
  CHECK(back.z == ds.z);
}
