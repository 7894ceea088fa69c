#include <cmath>

#include "doctest.h"
#include "greenlab/geometry_models.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

WarpProfile profile(const char* spec) { return make_profile(json::parse(spec)); }

ErrorCode code_of(const char* spec) {
  try {
    make_profile(json::parse(spec));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("euclidean profile") {
  const WarpProfile p = profile(R"({"kind": "euclidean"})");
  const auto j = p.derivatives<2>(1.0);
  CHECK(j.coeffs()[0] == 1.0);
  CHECK(j.coeffs()[1] == 1.0);
  for (double t : {1e-3, 0.5, 40.0}) CHECK(scalar_curvature_radial(p, t) == 0.0);
}

TEST_CASE("cone curvature") {
  const WarpProfile p = profile(R"({"kind": "cone", "alpha": 0.8})");
  for (double t : {0.01, 1.0, 300.0}) CHECK(scalar_curvature_radial(p, t) * t * t == doctest::Approx(1.125).epsilon(1e-13));
}

TEST_CASE("softened cone pole and sign of S") {
  const WarpProfile p = profile(R"({"kind": "softened_cone", "alpha": 0.5})");
  const auto pole = p.derivatives<2>(0.0);
  CHECK(pole.coeffs()[0] == 0.0);
  CHECK(pole.coeffs()[1] == doctest::Approx(1.0));
  for (double t = 1e-3; t < 1e3; t *= 1.3) {
    const auto j = p.derivatives<2>(t);
    CHECK(2.0 * j.coeffs()[2] <= 0.0);
    CHECK(scalar_curvature_radial(p, t) >= 0.0);
  }
}

TEST_CASE("hyperbolic space") { CHECK(scalar_curvature_radial(profile(R"({"kind": "sinh"})"), 1.0) == doctest::Approx(-6.0)); }

TEST_CASE("schwarzschild slice is scalar flat and recovers r") {
  const WarpProfile p = profile(R"({"kind": "schwarzschild", "mass": 1.0})");
  CHECK_FALSE(p.pole_present());
  const auto& s = std::get<profiles::Schwarzschild>(p.variant());
  for (double r : {2.0000001, 2.01, 3.0, 10.0, 1e3}) {
    const double t = s.geodesic_distance(r - 2.0);
    CHECK(p(t) == doctest::Approx(r).epsilon(1e-13));
  }
  for (double t = 1e-4; t < 1e3; t *= 1.7) {
    CAPTURE(t);
    CHECK(std::abs(scalar_curvature_radial(p, t)) < 1e-8);
    // f' = sqrt(1 - 2m/r)
    CHECK(p.derivatives<1>(t).coeffs()[1] == doctest::Approx(std::sqrt(1 - 2.0 / p(t))).epsilon(1e-10));
  }
}

TEST_CASE("parameter validation") {
  CHECK(code_of(R"({"kind": "cone", "alpha": 1.5})") == ErrorCode::InvalidParam);
  CHECK(code_of(R"({"kind": "cone", "alpha": 0})") == ErrorCode::InvalidParam);
  CHECK(code_of(R"({"kind": "schwarzschild", "mass": -1})") == ErrorCode::InvalidParam);
  CHECK(code_of(R"({"kind": "warp_drive"})") == ErrorCode::InvalidParam);
  CHECK(code_of(R"({"kind": "bumps", "bumps": [{"weight": 2.0, "width": 1.0}]})") == ErrorCode::ParabolicMetric);
  CHECK(code_of(R"({"kind": "tabulated", "t": [0, 1, 2, 3, 4, 5], "f": [0, 1, 1.4, -1.7, 1.9, 2.0]})") ==
        ErrorCode::InvalidParam);
  CHECK(code_of(R"({"kind": "tabulated", "t": [0, 1, 2], "f": [0, 1, 2]})") == ErrorCode::InvalidParam);
}

TEST_CASE("scalar curvature outside the grid") {
  const RadialWarpedMetric m = make_metric(profile(R"({"kind": "euclidean"})"));
  CHECK_THROWS_AS(scalar_curvature_radial(m, 1e-6), Error);
  CHECK_THROWS_AS(scalar_curvature_radial(m, 1e4), Error);
  CHECK_THROWS_AS(make_metric(WarpProfile{}, GridSpec{1.0, 10.0, 64}), Error);
}

TEST_CASE("tabulated spline reproduces cubics") {
  std::vector<double> t, f;
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.25 * i;
    t.push_back(x);
    f.push_back(x + 0.01 * x * x - 0.0005 * x * x * x + 0.5);
  }
  const WarpProfile p = profile(json{{"kind", "tabulated"}, {"t", t}, {"f", f}}.dump().c_str());
  for (double x : {0.1, 3.3, 9.9}) {
    const auto j = p.derivatives<2>(x);
    CHECK(j.coeffs()[0] == doctest::Approx(x + 0.01 * x * x - 0.0005 * x * x * x + 0.5).epsilon(1e-12));
    CHECK(j.coeffs()[1] == doctest::Approx(1 + 0.02 * x - 0.0015 * x * x).epsilon(1e-10));
    CHECK(2 * j.coeffs()[2] == doctest::Approx(0.02 - 0.003 * x).epsilon(1e-8));
  }
}

TEST_CASE("random S >= 0 family") {
  const auto family = sample_s_nonneg(42, 20);
  REQUIRE(family.size() == 20);
  for (const auto& p : family) {
    CHECK(p.kind() == ProfileKind::bumps);
    double prev = 1.0;
    for (double t = 1e-4; t <= 1e3; t *= 1.05) {
      const auto j = p.derivatives<2>(t);
      const double f = j.coeffs()[0], df = j.coeffs()[1];
      CHECK(f > 0);
      CHECK(df <= prev + 1e-14);
      CHECK(df > 0.0);
      CHECK(df <= 1.0 + 1e-14);
      CHECK(scalar_curvature_radial(p, t) >= -1e-10);
      prev = df;
    }
    CHECK(std::get<profiles::Bumps>(p.variant()).asymptotic_slope() >= 0.05);
  }
  const auto again = sample_s_nonneg(42, 20);
  for (std::size_t i = 0; i < family.size(); ++i) CHECK(family[i].to_json() == again[i].to_json());

  const WarpProfile flat = profile(R"({"kind": "bumps", "bumps": []})");
  for (double t : {1e-3, 1.0, 50.0}) CHECK(flat(t) == t);
}

TEST_CASE("chart form of a cone") {
  const RadialWarpedMetric m = make_metric(profile(R"({"kind": "cone", "alpha": 0.8})"));
  const ChartMetric chart = to_chart(m);
  const Point3 x = Point3(1, 2, 2) / 3.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(chart.at(x));
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.64));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.64));
  CHECK(es.eigenvalues()(2) == doctest::Approx(1.0));
  CHECK((to_chart(make_metric(WarpProfile{})).at(x) - Eigen::Matrix3d::Identity()).norm() < 1e-15);
}
