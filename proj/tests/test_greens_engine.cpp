#include <cmath>

#include "doctest.h"
#include "greenlab/greens_engine.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

GreensProfile solve(const char* spec, std::optional<GridSpec> grid = std::nullopt) {
  return build_profile(make_metric(make_profile(json::parse(spec)), grid));
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return m;
}

}  // namespace

TEST_CASE("euclidean Green's function") {
  const GreensProfile p = solve(R"({"kind": "euclidean"})");
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p.u[i] * p.t[i] - 1) < 1e-9);
    CHECK(std::abs(p.grad_b[i] - 1) < 1e-9);
    CHECK(std::abs(p.hess_b2_nn[i] - 2) < 1e-9);
    CHECK(std::abs(p.hess_b2_tt[i] - 2) < 1e-9);
    CHECK(std::abs(p.B_nn[i]) < 1e-9);
  }
  CHECK(p.flux_max_residual < 1e-8);
}

TEST_CASE("cone Green's function") {
  const double a = 0.8;
  const GreensProfile p = solve(R"({"kind": "cone", "alpha": 0.8})");
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p.u[i] * a * a * p.t[i] - 1) < 1e-8);
    CHECK(std::abs(p.grad_b[i] - a * a) < 1e-8);
    CHECK(std::abs(p.hess_b2_nn[i] - 2 * std::pow(a, 4)) < 1e-8);
    CHECK(std::abs(p.hess_b2_tt[i] - 2 * std::pow(a, 4)) < 1e-8);
    CHECK(std::abs(p.B_nn[i]) < 1e-8);
  }
}

TEST_CASE("schwarzschild Green's function") {
  const GreensProfile p = solve(R"({"kind": "schwarzschild", "mass": 1.0})");
  for (std::size_t i = 0; i < p.size(); i += 7) {
    const double r = p.f[i];
    CHECK(p.u[i] == doctest::Approx(1.0 - std::sqrt(1 - 2 / r)).epsilon(1e-9));
    CHECK(std::abs(p.S[i]) < 1e-8);
  }
}

TEST_CASE("softened cone: gradient bound, monotonicity, fitted tail") {
  const GreensProfile p = solve(R"({"kind": "softened_cone", "alpha": 0.5})");
  REQUIRE(p.alpha_inf.has_value());
  CHECK(*p.alpha_inf == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*p.c_inf == doctest::Approx(0.5).epsilon(1e-9));
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.grad_b[i] <= 1 + 1e-8);
    if (i + 1 < p.size()) {
      CHECK(p.u[i] > p.u[i + 1]);
      CHECK(p.b[i] < p.b[i + 1]);
    }
  }
  // pole asymptotics t u(t) -> 1
  CHECK(std::abs(p.pole_ratio - 1) < 1e-3);
}

TEST_CASE("Hessian identities on the grid") {
  for (const char* spec : {R"({"kind": "softened_cone", "alpha": 0.5})", R"({"kind": "superlinear"})",
                           R"({"kind": "schwarzschild", "mass": 2.0})", R"({"kind": "sinh"})"}) {
    CAPTURE(std::string(spec));
    const GreensProfile p = solve(spec);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double w2 = p.grad_b[i] * p.grad_b[i];
      CHECK(std::abs(p.lap_b2[i] - 6 * w2) <= 1e-8 * (1 + 6 * w2));
      CHECK(std::abs(p.B_sq[i] - (p.hess_sq[i] - 12 * w2 * w2)) <= 1e-8 * (1 + p.hess_sq[i]));
      CHECK(std::abs(p.B_tt[i] + 0.5 * p.B_nn[i]) <= 1e-8 * (1 + w2));
    }
  }
}

TEST_CASE("B_nn at t = 1 against an independent closed form") {
  // b^2 = u^-2 with u' = -f^-2: (b^2)'' = 6 u'^2 / u^4 - 2 u'' / u^3.
  const GreensProfile p = solve(R"({"kind": "softened_cone", "alpha": 0.5})");
  const double t = 1.0, a = 0.5;
  const double f = a * t + (1 - a) * (1 - std::exp(-t)), df = a + (1 - a) * std::exp(-t);
  const double u = green_value(p, t), du = -1 / (f * f), ddu = 2 * df / (f * f * f);
  const double nn = 6 * du * du / std::pow(u, 4) - 2 * ddu / std::pow(u, 3);
  const double w = 1 / (u * u * f * f);
  const RadialJet rj = radial_jet(p, t);
  const Jet<1, 4> b2 = 1.0 / (rj.u * rj.u);
  CHECK(std::abs(2 * b2.coeffs()[2] - 2 * w * w - (nn - 2 * w * w)) < 1e-7);
}

TEST_CASE("u converges under grid refinement") {
  const GridSpec coarse{1e-4, 1e3, 256}, fine{1e-4, 1e3, 512};
  for (const char* spec : {R"({"kind": "softened_cone", "alpha": 0.5})", R"({"kind": "bumps", "bumps": [{"weight": 0.3, "width": 1.5}]})"}) {
    const GreensProfile a = solve(spec, coarse), b = solve(spec, fine);
    std::vector<double> ub;
    for (std::size_t i = 0; i < a.size(); ++i) ub.push_back(b.u[2 * i]);
    CHECK(max_rel(a.u, ub) < 1e-9);
  }
}

TEST_CASE("coarse grids are rejected") {
  const auto metric = make_metric(make_profile(json::parse(R"({"kind": "softened_cone", "alpha": 0.5})")), GridSpec{1e-4, 1e3, 32});
  try {
    hessian_b2(solve_green(metric));
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  CHECK_NOTHROW(solve(R"({"kind": "softened_cone", "alpha": 0.5})", GridSpec{1e-4, 1e3, 64}));
}

TEST_CASE("tail fit rejects non-linear growth") {
  std::vector<double> t, f;
  for (int i = 0; i <= 400; ++i) {
    const double x = 0.05 * i + 1e-3;
    t.push_back(x);
    f.push_back(x + 0.02 * x * std::sin(x));
  }
  const auto profile = make_profile(json{{"kind", "tabulated"}, {"t", t}, {"f", f}});
  try {
    solve_green(make_metric(profile));
    FAIL("expected TailFitError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TailFitError);
  }
}

TEST_CASE("chart Hessian of b^2 matches radial components") {
  CHECK(cross_validate(solve(R"({"kind": "euclidean"})"), 20, 1).max_residual < 1e-10);
  CHECK(cross_validate(solve(R"({"kind": "softened_cone", "alpha": 0.7})"), 20, 2).max_residual < 1e-5);
  CHECK(cross_validate(solve(R"({"kind": "cone", "alpha": 0.8})"), 20, 3).max_residual < 1e-5);
}
