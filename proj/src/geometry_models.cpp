#include "greenlab/geometry_models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace greenlab {

namespace {

double require_number(const nlohmann::json& spec, const char* key, double fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number()) throw Error(ErrorCode::InvalidParam, std::string("'") + key + "' must be a number");
  return spec.at(key).get<double>();
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidParam, "alpha must lie in (0, 1]");
}

// Samples f > 0 and the pole condition; detects parabolic growth via f(t)/t.
void validate(const WarpProfile& p) {
  const double scale = p.scale();
  const double reach = p.kind() == ProfileKind::sinh ? 30.0 : 1e3 * scale;
  for (double t = 1e-3 * scale; t <= reach; t *= 1.5) {
    const double f = p(t);
    if (!(f > 0.0) || !std::isfinite(f))
      throw Error(ErrorCode::InvalidParam, "profile not positive at t = " + std::to_string(t));
  }
  if (p.pole_present() && p.kind() != ProfileKind::cone) {
    const auto j = p.derivatives<1>(1e-9 * scale);
    if (std::abs(j.coeffs()[1] - 1.0) > 1e-6)
      throw Error(ErrorCode::InvalidParam, "pole-anchored profile must have f'(0) = 1");
  }
  if (p.kind() == ProfileKind::sinh) return;
  // liminf f(t)/t > 0 implies the integral of f^-2 converges at infinity.
  const double far = 1e6 * scale;
  if (!(p(far) / far > 1e-3)) throw Error(ErrorCode::ParabolicMetric, "f(t)/t tends to zero; no positive Green's function");
}

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::euclidean: return "euclidean";
    case ProfileKind::cone: return "cone";
    case ProfileKind::softened_cone: return "softened_cone";
    case ProfileKind::schwarzschild: return "schwarzschild";
    case ProfileKind::sinh: return "sinh";
    case ProfileKind::superlinear: return "superlinear";
    case ProfileKind::bumps: return "bumps";
    case ProfileKind::tabulated: return "tabulated";
  }
  return "unknown";
}

namespace profiles {

double Bumps::rho(double t) const {
  double r = 0.0;
  for (const auto& b : bumps) r += b.weight * t * std::exp(-(t / b.width) * (t / b.width));
  return r;
}

double Bumps::asymptotic_slope() const {
  double s = 1.0;
  for (const auto& b : bumps) s -= 0.5 * b.weight * b.width * b.width;
  return s;
}

double Schwarzschild::excess_radius(double t) const {
  if (t <= 0.0) return 0.0;
  // t(x) >= x, so the root lies in (0, t]; near the horizon x ~ t^2 / 8m.
  double lo = 0.0, hi = t;
  double x = std::min(t, t * t / (8.0 * mass));
  for (int it = 0; it < 200; ++it) {
    const double residual = geodesic_distance(x) - t;
    if (residual > 0) hi = x;
    else lo = x;
    const double step = residual / std::sqrt((x + 2.0 * mass) / x);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * next) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

Tabulated Tabulated::build(std::vector<double> t, std::vector<double> f) {
  const std::size_t n = t.size();
  if (n < 4 || f.size() != n) throw Error(ErrorCode::InvalidParam, "tabulated profile needs >= 4 matching t/f samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) throw Error(ErrorCode::InvalidParam, "tabulated t must be strictly increasing");

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t[i + 1] - t[i];

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto N = static_cast<int>(n);
  // not-a-knot: third derivative continuous at the second and penultimate knots
  entries.emplace_back(0, 0, h[1]);
  entries.emplace_back(0, 1, -(h[0] + h[1]));
  entries.emplace_back(0, 2, h[0]);
  for (int i = 1; i + 1 < N; ++i) {
    entries.emplace_back(i, i - 1, h[i - 1]);
    entries.emplace_back(i, i, 2.0 * (h[i - 1] + h[i]));
    entries.emplace_back(i, i + 1, h[i]);
    rhs(i) = 6.0 * ((f[i + 1] - f[i]) / h[i] - (f[i] - f[i - 1]) / h[i - 1]);
  }
  entries.emplace_back(N - 1, N - 3, h[N - 2]);
  entries.emplace_back(N - 1, N - 2, -(h[N - 3] + h[N - 2]));
  entries.emplace_back(N - 1, N - 1, h[N - 3]);

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::InvalidParam, "spline system is singular");
  const Eigen::VectorXd m = lu.solve(rhs);

  Tabulated out;
  out.t = std::move(t);
  out.f = std::move(f);
  out.second.assign(m.data(), m.data() + m.size());
  return out;
}

}  // namespace profiles

bool WarpProfile::pole_present() const {
  switch (kind()) {
    case ProfileKind::schwarzschild:
      return false;
    case ProfileKind::cone:
      return true;  // singular apex, but b still vanishes there
    case ProfileKind::tabulated: {
      const auto& tab = std::get<profiles::Tabulated>(v_);
      return tab.t.front() <= 0.0 && std::abs(tab.f.front()) < 1e-12;
    }
    default:
      return true;
  }
}

double WarpProfile::scale() const {
  if (const auto* s = std::get_if<profiles::Schwarzschild>(&v_)) return s->mass;
  return 1.0;
}

std::optional<double> WarpProfile::exact_green_tail(double t) const {
  switch (kind()) {
    case ProfileKind::euclidean:
      return 1.0 / t;
    case ProfileKind::cone: {
      const double a = std::get<profiles::Cone>(v_).alpha;
      return 1.0 / (a * a * t);
    }
    case ProfileKind::sinh:
      return 2.0 / std::expm1(2.0 * t);
    case ProfileKind::schwarzschild: {
      // (1/m)(1 - sqrt(1 - 2m/r)) = 2 / (r (1 + sqrt(x / r)))
      const auto& s = std::get<profiles::Schwarzschild>(v_);
      const double x = s.excess_radius(t);
      const double r = 2.0 * s.mass + x;
      return 2.0 / (r * (1.0 + std::sqrt(x / r)));
    }
    default:
      return std::nullopt;
  }
}

nlohmann::ordered_json WarpProfile::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind());
  std::visit(
      [&j](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, profiles::Cone> || std::is_same_v<P, profiles::SoftenedCone>) {
          j["alpha"] = p.alpha;
        } else if constexpr (std::is_same_v<P, profiles::Schwarzschild>) {
          j["mass"] = p.mass;
        } else if constexpr (std::is_same_v<P, profiles::Superlinear>) {
          j["c"] = p.c;
          j["d"] = p.d;
        } else if constexpr (std::is_same_v<P, profiles::Bumps>) {
          auto arr = nlohmann::ordered_json::array();
          for (const auto& b : p.bumps) arr.push_back({{"weight", b.weight}, {"width", b.width}});
          j["bumps"] = arr;
        } else if constexpr (std::is_same_v<P, profiles::Tabulated>) {
          j["t"] = p.t;
          j["f"] = p.f;
        }
      },
      v_);
  return j;
}

WarpProfile make_profile(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string())
    throw Error(ErrorCode::InvalidParam, "metric spec needs a string 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();

  auto profile = [&]() -> WarpProfile {
    if (kind == "euclidean") return WarpProfile(profiles::Euclidean{});
    if (kind == "cone") {
      const double a = require_number(spec, "alpha", 1.0);
      require_alpha(a);
      return WarpProfile(profiles::Cone{a});
    }
    if (kind == "softened_cone") {
      const double a = require_number(spec, "alpha", 0.5);
      require_alpha(a);
      return WarpProfile(profiles::SoftenedCone{a});
    }
    if (kind == "schwarzschild") {
      const double m = require_number(spec, "mass", 1.0);
      if (!(m > 0.0)) throw Error(ErrorCode::InvalidParam, "mass must be positive");
      return WarpProfile(profiles::Schwarzschild{m});
    }
    if (kind == "sinh") return WarpProfile(profiles::Sinh{});
    if (kind == "superlinear") {
      const double c = require_number(spec, "c", 0.1), d = require_number(spec, "d", 0.01);
      if (!(c >= 0.0 && d > 0.0)) throw Error(ErrorCode::InvalidParam, "superlinear needs c >= 0, d > 0");
      return WarpProfile(profiles::Superlinear{c, d});
    }
    if (kind == "bumps") {
      profiles::Bumps b;
      if (spec.contains("bumps")) {
        for (const auto& item : spec.at("bumps")) {
          const double w = require_number(item, "weight", 0.0), width = require_number(item, "width", 1.0);
          if (!(w >= 0.0 && width > 0.0)) throw Error(ErrorCode::InvalidParam, "bump needs weight >= 0, width > 0");
          b.bumps.push_back({w, width});
        }
      }
      if (!(b.asymptotic_slope() > 0.0))
        throw Error(ErrorCode::ParabolicMetric, "bump weights exhaust the slope; f' reaches 0");
      return WarpProfile(b);
    }
    if (kind == "tabulated") {
      if (!spec.contains("t") || !spec.contains("f")) throw Error(ErrorCode::InvalidParam, "tabulated needs 't' and 'f'");
      return WarpProfile(profiles::Tabulated::build(spec.at("t").get<std::vector<double>>(),
                                                    spec.at("f").get<std::vector<double>>()));
    }
    throw Error(ErrorCode::InvalidParam, "unknown metric kind '" + kind + "'");
  }();
  if (profile.kind() == ProfileKind::tabulated) {
    const auto& tab = std::get<profiles::Tabulated>(profile.variant());
    for (std::size_t i = 0; i < tab.t.size(); ++i)
      if (tab.t[i] > 0.0 && !(tab.f[i] > 0.0)) throw Error(ErrorCode::InvalidParam, "tabulated f must be positive for t > 0");
  } else {
    validate(profile);
  }
  return profile;
}

GridSpec default_grid(const WarpProfile& profile) {
  GridSpec g;
  const double s = profile.scale();
  g.t_min = 1e-4 * s;
  g.t_max = 1e3 * s;
  if (profile.kind() == ProfileKind::superlinear) g.t_max = 1e6;
  if (profile.kind() == ProfileKind::sinh) {
    // b^2 ~ e^{4t} outruns a log grid
    g.t_max = 2.0;
    g.points_per_decade = 1024;
  }
  if (profile.kind() == ProfileKind::tabulated) {
    const auto& tab = std::get<profiles::Tabulated>(profile.variant());
    g.t_min = std::max(tab.t.front(), 1e-4 * (tab.t.back() - tab.t.front()));
    if (g.t_min <= 0.0) g.t_min = tab.t[1];
    g.t_max = tab.t.back();
  }
  return g;
}

RadialWarpedMetric make_metric(WarpProfile profile, std::optional<GridSpec> grid) {
  const GridSpec g = grid.value_or(default_grid(profile));
  if (!(g.t_min > 0.0)) throw Error(ErrorCode::InvalidParam, "t_min must be positive");
  if (!(g.t_max >= 100.0 * g.t_min)) throw Error(ErrorCode::InvalidParam, "t_max must be at least 100 t_min");
  if (g.points_per_decade < 1) throw Error(ErrorCode::InvalidParam, "points_per_decade must be >= 1");
  const bool pole = profile.pole_present();
  return RadialWarpedMetric{std::move(profile), g, pole};
}

double scalar_curvature_radial(const WarpProfile& profile, double t) {
  const auto j = profile.derivatives<2>(t);
  const double f = j.coeffs()[0], df = j.coeffs()[1], ddf = 2.0 * j.coeffs()[2];
  return -4.0 * ddf / f + 2.0 * (1.0 - df * df) / (f * f);
}

double scalar_curvature_radial(const RadialWarpedMetric& metric, double t) {
  const double slack = 1e-12 * metric.t_max();
  if (!(t >= metric.t_min() * (1 - 1e-12) && t <= metric.t_max() + slack))
    throw Error(ErrorCode::DomainError, "t = " + std::to_string(t) + " outside the metric grid");
  return scalar_curvature_radial(metric.profile, t);
}

std::vector<WarpProfile> sample_s_nonneg(std::uint64_t seed, int count, const SamplerOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_bumps(options.min_bumps, options.max_bumps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<WarpProfile> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  while (static_cast<int>(out.size()) < count) {
    const int k = n_bumps(rng);
    const double slope = options.min_slope + (options.max_slope - options.min_slope) * unit(rng);
    std::vector<double> widths(static_cast<std::size_t>(k)), shares(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      widths[i] = options.min_width * std::pow(options.max_width / options.min_width, unit(rng));
      shares[i] = -std::log(1.0 - unit(rng)) + 1e-3;
      total += shares[i];
    }
    profiles::Bumps b;
    // sum_k weight_k width_k^2 / 2 = 1 - slope
    for (int i = 0; i < k; ++i)
      b.bumps.push_back({2.0 * (1.0 - slope) * shares[i] / total / (widths[i] * widths[i]), widths[i]});
    // Reject near-parabolic draws.
    if (k > 0 && b.asymptotic_slope() < 0.05) continue;
    out.emplace_back(std::move(b));
  }
  return out;
}

ChartMetric to_chart(const RadialWarpedMetric& metric) {
  ChartDomain domain;
  domain.lower.setConstant(-metric.t_max());
  domain.upper.setConstant(metric.t_max());
  domain.excluded_radius = metric.t_min();
  const WarpProfile profile = metric.profile;
  return ChartMetric::closed_form(
      [profile](const auto& x) {
        using S = typename std::decay_t<decltype(x)>::Scalar;
        using std::sqrt;
        const S t2 = x(0) * x(0) + x(1) * x(1) + x(2) * x(2);
        const S t = sqrt(t2);
        const S f = profile.f(t);
        const S ratio2 = f * f / t2;
        Mat3<S> g;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const S radial = x(i) * x(j) / t2;
            g(i, j) = (1.0 - ratio2) * radial;
            if (i == j) g(i, j) += ratio2;
          }
        return g;
      },
      domain);
}

}  // namespace greenlab
