#include "greenlab/functionals.hpp"

#include <cmath>
#include <numbers>

namespace greenlab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

}  // namespace

std::vector<double> A_beta(const GreensProfile& p, double beta) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = p.area[i] * std::pow(p.grad_b[i], 1.0 + beta) / (p.b[i] * p.b[i]);
  return out;
}

LevelSetFunctionals compute_functionals(const GreensProfile& input) {
  const GreensProfile p = input.has_hessian ? input : hessian_b2(input);
  const std::size_t n = p.size();
  LevelSetFunctionals lf;
  lf.t = p.t;
  lf.r = p.b;
  lf.u = p.u;
  lf.b = p.b;
  lf.grad_b = p.grad_b;
  lf.area = p.area;
  lf.S = p.S;
  lf.B_nn = p.B_nn;
  lf.log_step = p.log_step;
  lf.pole_present = p.metric.pole_present;
  lf.A0 = A_beta(p, 0.0);
  lf.A1 = A_beta(p, 1.0);
  lf.B1.resize(n);
  lf.B2.resize(n);
  lf.S1.resize(n);
  lf.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = p.b[i], w = p.grad_b[i];
    lf.B1[i] = p.area[i] * p.hess_b2_nn[i] / (r * r);
    lf.B2[i] = p.area[i] * p.B_sq[i] / (4.0 * r * r * w * w);
    lf.S1[i] = p.area[i] * p.S[i];
    // a = r A_1'(r) / A_1 = b b'' / b'^2, with b'' from the jet of 1/u.
    const auto f = p.metric.profile.derivatives<2>(p.t[i]);
    const Jet<1, 2> inv_f2 = 1.0 / (f * f);
    const Jet<1, 3> uj = integrate(-inv_f2, p.u[i]);
    const Jet<1, 3> bj = 1.0 / uj;
    const double db = bj.coeffs()[1], ddb = 2.0 * bj.coeffs()[2];
    lf.a[i] = r * ddb / (db * db);

    const double closed = kFourPi * r * r / (p.f[i] * p.f[i]);
    lf.A1_formula_residual = std::max(lf.A1_formula_residual, std::abs(lf.A1[i] - closed));
    for (double x : {lf.A0[i], lf.A1[i], lf.B1[i], lf.B2[i], lf.S1[i], lf.a[i]})
      if (!std::isfinite(x)) throw Error(ErrorCode::GridTooCoarse, "non-finite functional at t = " + std::to_string(p.t[i]));
  }
  return lf;
}

LevelSetFunctionals v_flux(LevelSetFunctionals lf) {
  const std::size_t n = lf.size();
  lf.Vflux.resize(n);
  lf.vflux_residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // area A_1^-1 r^-2 Hess_b2(n, n)
    lf.Vflux[i] = lf.B1[i] / lf.A1[i];
    lf.vflux_residual[i] = lf.Vflux[i] - (2.0 * lf.a[i] + 2.0);
  }
  return lf;
}

LevelSetFunctionals functionals_of(const GreensProfile& profile) { return v_flux(compute_functionals(profile)); }

std::vector<double> uniform_derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 5) throw Error(ErrorCode::GridTooCoarse, "need at least 5 samples for a 4th-order derivative");
  std::vector<double> d(n);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-y[i + 2] + 8 * y[i + 1] - 8 * y[i - 1] + y[i - 2]) / (12 * h);
  // one-sided 5-point stencils at the ends
  const auto fwd = [&](std::size_t i, int s) {
    const auto at = [&](int k) { return y[static_cast<std::size_t>(static_cast<long>(i) + s * k)]; };
    return s * (-25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4)) / (12 * h);
  };
  const auto off = [&](std::size_t i, int s) {
    const auto at = [&](int k) { return y[static_cast<std::size_t>(static_cast<long>(i) + s * k)]; };
    return s * (-3 * at(-1) - 10 * at(0) + 18 * at(1) - 6 * at(2) + at(3)) / (12 * h);
  };
  d[0] = fwd(0, 1);
  d[1] = off(1, 1);
  d[n - 1] = fwd(n - 1, -1);
  d[n - 2] = off(n - 2, -1);
  return d;
}

std::vector<double> level_derivative(const LevelSetFunctionals& lf, const std::vector<double>& y) {
  std::vector<double> d = uniform_derivative(y, lf.log_step);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] /= lf.t[i] * lf.grad_b[i];
  return d;
}

std::vector<double> uniform_cumulative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 4) throw Error(ErrorCode::GridTooCoarse, "need at least 4 samples for a 4th-order integral");
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double piece;
    if (i == 0) {
      piece = (9 * y[0] + 19 * y[1] - 5 * y[2] + y[3]) / 24;
    } else if (i + 2 == n) {
      piece = (9 * y[i + 1] + 19 * y[i] - 5 * y[i - 1] + y[i - 2]) / 24;
    } else {
      piece = (-y[i - 1] + 13 * y[i] + 13 * y[i + 1] - y[i + 2]) / 24;
    }
    c[i + 1] = c[i] + h * piece;
  }
  return c;
}

std::vector<double> cumulative(const LevelSetFunctionals& lf, CumulativeOf which) {
  if (!lf.pole_present)
    throw Error(ErrorCode::NotPoleAnchored, "integrals from the pole need a pole-anchored profile");
  const std::size_t n = lf.size();
  std::vector<double> F(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (which) {
      case CumulativeOf::S1: F[i] = lf.S1[i]; break;
      case CumulativeOf::B2: F[i] = lf.B2[i]; break;
      case CumulativeOf::S1_plus_B2: F[i] = lf.S1[i] + lf.B2[i]; break;
    }
    g[i] = F[i] * lf.grad_b[i] * lf.t[i];  // dr = t |grad b| ds
  }
  std::vector<double> c = uniform_cumulative(g, lf.log_step);

  // [0, r_0]: F ~ F_0 (r / r_0)^p
  double head = 0.0;
  const double r0 = lf.r[0], r1 = lf.r[1];
  if (F[0] != 0.0) {
    double p = 0.0;
    if (F[0] * F[1] > 0.0) p = std::log(F[1] / F[0]) / std::log(r1 / r0);
    p = std::max(p, -0.9);
    head = F[0] * r0 / (p + 1.0);
  }
  for (double& x : c) x += head;
  return c;
}

}  // namespace greenlab
