#include <cmath>
#include <numbers>

#include "doctest.h"
#include "greenlab/functionals.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

LevelSetFunctionals run(const json& spec, std::optional<GridSpec> grid = std::nullopt) {
  return functionals_of(build_profile(make_metric(make_profile(spec), grid)));
}

}  // namespace

TEST_CASE("euclidean functionals") {
  const LevelSetFunctionals lf = run({{"kind", "euclidean"}});
  for (std::size_t i = 0; i < lf.size(); ++i) {
    CHECK(std::abs(lf.r[i] - lf.t[i]) < 1e-9 * lf.t[i]);
    CHECK(std::abs(lf.A0[i] - kFourPi) < 1e-8);
    CHECK(std::abs(lf.A1[i] - kFourPi) < 1e-6);
    CHECK(std::abs(lf.a[i]) < 1e-6);
    CHECK(std::abs(lf.B2[i]) < 1e-10);
    CHECK(std::abs(lf.B1[i] - 2 * kFourPi) < 1e-6);
    CHECK(std::abs(lf.Vflux[i] - 2) < 1e-8);
  }
  CHECK(lf.A1_formula_residual < 1e-9);
}

TEST_CASE("cone functionals and the scalar integral") {
  for (double alpha : {0.5, 0.8, 0.95}) {
    const LevelSetFunctionals lf = run({{"kind", "cone"}, {"alpha", alpha}});
    const double s1 = 2 * kFourPi * (1 - alpha * alpha);
    const std::vector<double> cum = cumulative(lf, CumulativeOf::S1);
    for (std::size_t i = 0; i < lf.size(); ++i) {
      CHECK(std::abs(lf.A1[i] - kFourPi * alpha * alpha) < 1e-5);
      CHECK(std::abs(lf.S1[i] - s1) < 1e-5);
      CHECK(std::abs(lf.a[i]) < 1e-8);
      CHECK(std::abs(cum[i] / lf.r[i] - s1) < 1e-5);
    }
  }
}

TEST_CASE("softened cone interpolates between the two cone values") {
  const LevelSetFunctionals lf = run({{"kind", "softened_cone"}, {"alpha", 0.5}}, GridSpec{1e-7, 1e3, 256});
  CHECK(std::abs(lf.A1.front() - kFourPi) < 1e-4);
  CHECK(std::abs(lf.A1.back() - std::numbers::pi) < 1e-8);
  for (std::size_t i = 1; i < lf.size(); ++i) CHECK(lf.A1[i] <= lf.A1[i - 1] + 1e-9);
  CHECK(lf.A1_formula_residual < 1e-9);
}

TEST_CASE("schwarzschild has no pole to integrate from") {
  const LevelSetFunctionals lf = run({{"kind", "schwarzschild"}, {"mass", 1.0}});
  CHECK_FALSE(lf.pole_present);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    CHECK(std::abs(lf.S[i]) < 1e-8);
    CHECK(lf.A1[i] < kFourPi);
  }
  try {
    cumulative(lf, CumulativeOf::S1);
    FAIL("expected NotPoleAnchored");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPoleAnchored);
  }
}

TEST_CASE("uniform stencils are exact on cubics") {
  const double h = 0.1;
  std::vector<double> y, dy, iy;
  for (int i = 0; i < 20; ++i) {
    const double x = i * h;
    y.push_back(1 - 2 * x + 3 * x * x - x * x * x);
    dy.push_back(-2 + 6 * x - 3 * x * x);
    iy.push_back(x - x * x + x * x * x - x * x * x * x / 4);
  }
  const auto d = uniform_derivative(y, h);
  const auto c = uniform_cumulative(y, h);
  for (int i = 0; i < 20; ++i) {
    CHECK(std::abs(d[i] - dy[i]) < 1e-11);
    CHECK(std::abs(c[i] - iy[i]) < 1e-12);
  }
  CHECK_THROWS_AS(uniform_derivative({1, 2, 3}, h), Error);
}

TEST_CASE("A_beta scaling on a cone") {
  const GreensProfile p = build_profile(make_metric(make_profile({{"kind", "cone"}, {"alpha", 0.8}})));
  const double a2 = 0.64;
  // area = 4 pi a^2 t^2, r = a^2 t, |grad b| = a^2
  for (double beta : {0.0, 0.5, 2.0}) {
    const auto A = A_beta(p, beta);
    for (std::size_t i = 0; i < A.size(); i += 97)
      CHECK(std::abs(A[i] - kFourPi * std::pow(a2, beta)) < 1e-7);
  }
}
