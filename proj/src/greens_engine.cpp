#include "greenlab/greens_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace greenlab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Integrand of u in s = ln t: t / f(t)^2.
struct LogIntegrand {
  const WarpProfile& profile;
  double operator()(double s) const {
    const double t = std::exp(s);
    const double f = profile(t);
    return t / (f * f);
  }
};

double simpson_step(const LogIntegrand& g, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// int_{ta}^{tb} f^-2 dt by adaptive Simpson in log t, relative tolerance 1e-14.
double integrate_inverse_square(const WarpProfile& profile, double ta, double tb) {
  if (tb <= ta) return 0.0;
  const LogIntegrand g{profile};
  const double a = std::log(ta), b = std::log(tb);
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(g, a, b, fa, fm, fb, whole, 1e-14 * std::abs(whole), 40);
}

struct TailModel {
  bool exact = false;
  double alpha = 0.0;
  double c = 0.0;
  double residual = 0.0;
};

// Least-squares f ~ alpha t + c over the last decade of the grid.
TailModel fit_tail(const WarpProfile& profile, const std::vector<double>& t) {
  const double t_max = t.back();
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (auto it = t.rbegin(); it != t.rend() && *it >= t_max / 10.0 * (1 - 1e-12); ++it) {
    const double x = *it / t_max, y = profile(*it) / t_max;
    pts.emplace_back(x, y);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  TailModel m;
  const double denom = n * sxx - sx * sx;
  if (n < 3 || denom <= 0) throw Error(ErrorCode::TailFitError, "too few points in the last decade");
  m.alpha = (n * sxy - sx * sy) / denom;
  m.c = (sy - m.alpha * sx) / n * t_max;
  for (const auto& [x, y] : pts) m.residual = std::max(m.residual, std::abs(y - m.alpha * x - m.c / t_max) / y);
  return m;
}

double tail_value(const GreensProfile& p, double t) {
  if (p.tail_exact) return *p.metric.profile.exact_green_tail(t);
  const double a = *p.alpha_inf, c = *p.c_inf;
  return 1.0 / (a * (a * t + c));
}

}  // namespace

GreensProfile solve_green(const RadialWarpedMetric& metric) {
  GreensProfile p;
  p.metric = metric;
  const auto& profile = metric.profile;
  const double decades = std::log10(metric.t_max() / metric.t_min());
  const auto n = static_cast<std::size_t>(std::llround(decades * metric.grid.points_per_decade));
  if (n < 16) throw Error(ErrorCode::InvalidParam, "grid has fewer than 16 intervals");
  p.log_step = std::log(metric.t_max() / metric.t_min()) / static_cast<double>(n);

  p.t.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) p.t[i] = metric.t_min() * std::exp(static_cast<double>(i) * p.log_step);
  p.t.back() = metric.t_max();

  if (profile.exact_green_tail(metric.t_max())) {
    p.tail_exact = true;
    switch (profile.kind()) {
      case ProfileKind::euclidean:
      case ProfileKind::schwarzschild:
        p.alpha_inf = 1.0;
        break;
      case ProfileKind::cone:
        p.alpha_inf = std::get<profiles::Cone>(profile.variant()).alpha;
        p.c_inf = 0.0;
        break;
      default:
        break;  // exponential growth: no asymptotic slope
    }
    if (profile.kind() == ProfileKind::euclidean) p.c_inf = 0.0;
  } else {
    const TailModel m = fit_tail(profile, p.t);
    if (!(m.alpha > 1e-8)) throw Error(ErrorCode::ParabolicMetric, "fitted asymptotic slope is not positive");
    if (m.residual > 1e-3)
      throw Error(ErrorCode::TailFitError, "f is not asymptotically linear (fit residual " + std::to_string(m.residual) + ")");
    p.alpha_inf = m.alpha;
    p.c_inf = m.c;
    p.tail_fit_residual = m.residual;
    if (!(m.alpha * metric.t_max() + m.c > 0.0)) throw Error(ErrorCode::TailFitError, "tail model not positive at t_max");
  }

  p.u.assign(n + 1, 0.0);
  p.u[n] = tail_value(p, p.t[n]);
  for (std::size_t i = n; i-- > 0;) p.u[i] = p.u[i + 1] + integrate_inverse_square(profile, p.t[i], p.t[i + 1]);

  p.b.resize(n + 1);
  p.grad_b.resize(n + 1);
  p.f.resize(n + 1);
  p.df.resize(n + 1);
  p.area.resize(n + 1);
  p.S.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const auto fj = profile.derivatives<2>(p.t[i]);
    const double f = fj.coeffs()[0], df = fj.coeffs()[1], ddf = 2.0 * fj.coeffs()[2];
    p.f[i] = f;
    p.df[i] = df;
    p.area[i] = kFourPi * f * f;
    p.S[i] = -4.0 * ddf / f + 2.0 * (1.0 - df * df) / (f * f);
    p.b[i] = 1.0 / p.u[i];
    p.grad_b[i] = p.b[i] * p.b[i] / (f * f);
    // |grad u| = f^-2 by construction; the residual guards refactors.
    const double grad_u = 1.0 / (f * f);
    p.flux_max_residual = std::max(p.flux_max_residual, std::abs(p.area[i] * grad_u - kFourPi));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.u[i] > p.u[i + 1]) || !(p.u[i + 1] > 0.0))
      throw Error(ErrorCode::ParabolicMetric, "Green's function is not positive and decreasing");
  }
  p.pole_ratio = p.t[0] * p.u[0];
  return p;
}

RadialJet radial_jet(const GreensProfile& profile, double t) {
  RadialJet r;
  r.f = profile.metric.profile.derivatives<3>(t);
  const Jet<1, 3> inv_f2 = 1.0 / (r.f * r.f);
  r.u = integrate(-inv_f2, green_value(profile, t));
  return r;
}

GreensProfile hessian_b2(GreensProfile p) {
  const std::size_t n = p.size();
  p.hess_b2_nn.resize(n);
  p.hess_b2_tt.resize(n);
  p.B_nn.resize(n);
  p.B_tt.resize(n);
  p.B_sq.resize(n);
  p.hess_sq.resize(n);
  p.lap_b2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Jet<1, 3> f = p.metric.profile.derivatives<3>(p.t[i]);
    const Jet<1, 3> inv_f2 = 1.0 / (f * f);
    const Jet<1, 4> u = integrate(-inv_f2, p.u[i]);
    const Jet<1, 4> b2 = 1.0 / (u * u);
    const double d1 = b2.coeffs()[1], d2 = 2.0 * b2.coeffs()[2];
    const double w = p.grad_b[i];
    const double ratio = f.coeffs()[1] / f.coeffs()[0];
    p.hess_b2_nn[i] = d2;
    p.hess_b2_tt[i] = d1 * ratio;
    p.lap_b2[i] = d2 + 2.0 * d1 * ratio;
    p.B_nn[i] = d2 - 2.0 * w * w;
    p.B_tt[i] = p.hess_b2_tt[i] - 2.0 * w * w;
    p.B_sq[i] = p.B_nn[i] * p.B_nn[i] + 2.0 * p.B_tt[i] * p.B_tt[i];
    p.hess_sq[i] = d2 * d2 + 2.0 * p.hess_b2_tt[i] * p.hess_b2_tt[i];
  }

  // FD cross-check of (b^2)'' on the log grid: D_ss - D_s over t^2.
  const double h = p.log_step;
  p.richardson_max = 0.0;
  const auto v = [&p](std::size_t j) { return p.b[j] * p.b[j]; };
  const auto second = [&](std::size_t i, std::size_t k) {
    const double hk = h * static_cast<double>(k);
    const double ds = (-v(i + 2 * k) + 8 * v(i + k) - 8 * v(i - k) + v(i - 2 * k)) / (12 * hk);
    const double dss = (-v(i + 2 * k) + 16 * v(i + k) - 30 * v(i) + 16 * v(i - k) - v(i - 2 * k)) / (12 * hk * hk);
    return (dss - ds) / (p.t[i] * p.t[i]);
  };
  for (std::size_t i = 4; i + 4 < n; ++i) {
    const double scale = std::abs(p.hess_b2_nn[i]) + 2.0 * p.grad_b[i] * p.grad_b[i];
    const double estimate = std::abs(second(i, 1) - second(i, 2)) / 15.0 / scale;
    // Below this the difference is rounding noise, not truncation error.
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * v(i) / (h * h * p.t[i] * p.t[i]) / scale;
    if (estimate > floor) p.richardson_max = std::max(p.richardson_max, estimate);
  }
  if (p.richardson_max > 1e-6)
    throw Error(ErrorCode::GridTooCoarse,
                "Richardson estimate " + std::to_string(p.richardson_max) + " exceeds 1e-6; raise points_per_decade");
  p.has_hessian = true;
  return p;
}

GreensProfile build_profile(const RadialWarpedMetric& metric) { return hessian_b2(solve_green(metric)); }

double green_value(const GreensProfile& p, double t) {
  if (!(t >= p.t.front() * (1 - 1e-13))) throw Error(ErrorCode::DomainError, "t below the grid");
  if (t >= p.t.back()) return tail_value(p, t);
  auto it = std::upper_bound(p.t.begin(), p.t.end(), t);
  const auto i = static_cast<std::size_t>(it - p.t.begin());  // t < t[i]
  return p.u[i] + integrate_inverse_square(p.metric.profile, std::max(t, p.t.front()), p.t[i]);
}

ScalarField b_squared_field(const GreensProfile& profile) {
  const GreensProfile* p = &profile;
  return ScalarField::closed_form(
      [p](const auto& x) {
        using S = typename std::decay_t<decltype(x)>::Scalar;
        using std::sqrt;
        const S t = sqrt(x(0) * x(0) + x(1) * x(1) + x(2) * x(2));
        if constexpr (is_jet_v<S>) {
          const RadialJet rj = radial_jet(*p, t.value());
          const S u = compose(truncate<S::kOrder>(rj.u), t);
          return S(1.0 / (u * u));
        } else {
          const double u = green_value(*p, t);
          return 1.0 / (u * u);
        }
      },
      profile.metric.profile.scale());
}

CrossValidation cross_validate(const GreensProfile& profile, int samples, std::uint64_t seed) {
  if (!profile.has_hessian) throw Error(ErrorCode::InvalidParam, "cross_validate needs hessian_b2 first");
  const ChartMetric chart = to_chart(profile.metric);
  const ScalarField field = b_squared_field(profile);
  const double scale = profile.metric.profile.scale();
  const double lo = std::max(10.0 * profile.metric.t_min(), 0.05 * scale);
  const double hi = std::min(profile.metric.t_max() / 10.0, 20.0 * scale);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  CrossValidation out;
  for (int k = 0; k < samples; ++k) {
    const double t = lo * std::pow(hi / lo, unit(rng));
    Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
    dir.normalize();
    const Point3 x = t * dir;

    const ScalarFieldJet jet = jet_of(chart, field, x);
    const RadialJet rj = radial_jet(profile, t);
    const Jet<1, 4> b2 = 1.0 / (rj.u * rj.u);
    const double nn = 2.0 * b2.coeffs()[2];
    const double tt = b2.coeffs()[1] * rj.f.coeffs()[1] / rj.f.coeffs()[0];

    const Eigen::Matrix3d g = chart.at(x);
    // n^flat = dt = x / t in these coordinates.
    const Eigen::Matrix3d predicted = tt * g + (nn - tt) * dir * dir.transpose();
    const double residual =
        std::sqrt(norm_sq(Eigen::Matrix3d(jet.hess - predicted), g)) / (1.0 + std::sqrt(norm_sq(predicted, g)));
    if (residual > out.max_residual) {
      out.max_residual = residual;
      out.worst_point = x;
    }
    ++out.samples;
  }
  return out;
}

}  // namespace greenlab
