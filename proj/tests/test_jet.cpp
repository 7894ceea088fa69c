#include <cmath>

#include "doctest.h"
#include "greenlab/jet.hpp"

using greenlab::Jet;

TEST_CASE("univariate derivatives match closed forms") {
  using J = Jet<1, 4>;
  const J x = J::variable(0.7, 0);
  const J y = exp(x) * sin(x);
  // d^k/dx^k e^x sin x = 2^{k/2} e^x sin(x + k pi/4)
  for (int k = 0; k <= 4; ++k) {
    const double expected = std::pow(2.0, k / 2.0) * std::exp(0.7) * std::sin(0.7 + k * M_PI / 4);
    CHECK(y.partial({k}) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("mixed partials of a 3-variable polynomial") {
  using J = Jet<3, 3>;
  const J x = J::variable(1.5, 0), y = J::variable(-0.5, 1), z = J::variable(2.0, 2);
  const J p = x * x * y + y * z * z * 3.0 + x * y * z;
  CHECK(p.d(0) == doctest::Approx(2 * 1.5 * -0.5 + -0.5 * 2.0));
  CHECK(p.d(0, 1) == doctest::Approx(2 * 1.5 + 2.0));
  CHECK(p.d(1, 2, 2) == doctest::Approx(6.0));
  CHECK(p.d(0, 1, 2) == doctest::Approx(1.0));
  CHECK(p.d(0, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("inverse functions round-trip") {
  using J = Jet<2, 3>;
  const J x = J::variable(0.3, 0) + J::variable(0.0, 1) * 2.0;
  const J back = log(exp(x));
  const J root = sqrt(x * x);
  for (int i = 0; i < J::kSize; ++i) {
    CHECK(back.coeffs()[i] == doctest::Approx(x.coeffs()[i]).epsilon(1e-13));
    CHECK(root.coeffs()[i] == doctest::Approx(x.coeffs()[i]).epsilon(1e-13));
  }
  const J one = x / x;
  CHECK(one.value() == doctest::Approx(1.0));
  for (int i = 1; i < J::kSize; ++i) CHECK(std::abs(one.coeffs()[i]) < 1e-13);
}

TEST_CASE("erf derivatives") {
  using J = Jet<1, 3>;
  const double x0 = 0.4;
  const J e = erf(J::variable(x0, 0));
  const double g = 2 / std::sqrt(M_PI) * std::exp(-x0 * x0);
  CHECK(e.value() == doctest::Approx(std::erf(x0)));
  CHECK(e.partial({1}) == doctest::Approx(g));
  CHECK(e.partial({2}) == doctest::Approx(-2 * x0 * g));
  CHECK(e.partial({3}) == doctest::Approx((4 * x0 * x0 - 2) * g));
}

TEST_CASE("integrate and compose") {
  using J = Jet<1, 3>;
  const J c = cos(J::variable(0.2, 0));
  const Jet<1, 4> s = greenlab::integrate(c, std::sin(0.2));
  const Jet<1, 4> direct = sin(Jet<1, 4>::variable(0.2, 0));
  for (int i = 0; i < 5; ++i) CHECK(s.coeffs()[i] == doctest::Approx(direct.coeffs()[i]).epsilon(1e-14));

  // sin(x^2 + y) through a univariate series composed with a bivariate jet
  using J2 = Jet<2, 3>;
  const J2 x = J2::variable(0.5, 0), y = J2::variable(0.1, 1);
  const J2 arg = x * x + y;
  const J2 composed = greenlab::compose(sin(J::variable(arg.value(), 0)), arg);
  const J2 expected = sin(arg);
  for (int i = 0; i < J2::kSize; ++i) CHECK(composed.coeffs()[i] == doctest::Approx(expected.coeffs()[i]).epsilon(1e-14));
}
