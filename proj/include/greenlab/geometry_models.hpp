#pragma once

// Rotationally symmetric model metrics dt^2 + f(t)^2 g_{S^2} in geodesic
// radial gauge. Every profile is generic over the scalar type so the same
// formula serves plain doubles, univariate jets (radial derivatives) and
// 3-variable jets (Cartesian chart form).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "greenlab/errors.hpp"
#include "greenlab/jet.hpp"
#include "greenlab/tensor_core.hpp"
#include "json.hpp"

namespace greenlab {

enum class ProfileKind { euclidean, cone, softened_cone, schwarzschild, sinh, superlinear, bumps, tabulated };

std::string to_string(ProfileKind kind);

namespace profiles {

struct Euclidean {
  template <class S>
  S operator()(const S& t) const {
    return t;
  }
};

struct Cone {
  double alpha = 1.0;
  template <class S>
  S operator()(const S& t) const {
    return alpha * t;
  }
};

/// alpha t + (1 - alpha)(1 - e^{-t}): Euclidean at the pole, cone at infinity.
struct SoftenedCone {
  double alpha = 1.0;
  template <class S>
  S operator()(const S& t) const {
    using std::expm1;
    return alpha * t - (1.0 - alpha) * expm1(-t);
  }
};

/// Hyperbolic space, f = sinh t.
struct Sinh {
  template <class S>
  S operator()(const S& t) const {
    using std::sinh;
    return sinh(t);
  }
};

/// t + c t^2 / (1 + d t). Has S < 0 somewhere; used for the growth diagnostic.
struct Superlinear {
  double c = 0.1;
  double d = 0.01;
  template <class S>
  S operator()(const S& t) const {
    return t + c * t * t / (1.0 + d * t);
  }
};

/// One term of rho(t) = sum_k weight_k t exp(-(t/width_k)^2).
struct Bump {
  double weight = 0.0;
  double width = 1.0;
};

/// f'' = -rho(t) with f(0) = 0, f'(0) = 1. Since f'' <= 0 and 0 < f' <= 1,
/// the scalar curvature is nonnegative everywhere.
struct Bumps {
  std::vector<Bump> bumps;

  // x - (sqrt(pi)/2) erf(x), with a series near 0 to avoid cancellation.
  template <class S>
  static S erf_deficit(const S& x) {
    using std::erf;
    if (std::abs(value_of(x)) < 0.5) {
      const S x2 = x * x;
      S term = x * x2;  // (-1)^(n+1) x^(2n+1) / n!, n = 1
      S sum = term / 3.0;
      for (int n = 2; n <= 14; ++n) {
        term = term * x2 * (-1.0 / n);
        sum += term / (2.0 * n + 1.0);
      }
      return sum;
    }
    return x - (std::sqrt(std::numbers::pi) / 2.0) * erf(x);
  }

  template <class S>
  S operator()(const S& t) const {
    S f = t;
    for (const auto& b : bumps) f -= (0.5 * b.weight * b.width * b.width * b.width) * erf_deficit(t / b.width);
    return f;
  }

  double rho(double t) const;
  double asymptotic_slope() const;
};

/// Spatial Schwarzschild slice outside the horizon. With x = r - 2m the
/// geodesic distance from the horizon is t(x) = sqrt(x (x + 2m)) + 2m asinh(sqrt(x / 2m)),
/// and f(t) = r = 2m + x(t).
struct Schwarzschild {
  double mass = 1.0;

  template <class S>
  S geodesic_distance(const S& x) const {
    using std::log;
    using std::sqrt;
    const S z = sqrt(x / (2.0 * mass));
    return sqrt(x * (x + 2.0 * mass)) + 2.0 * mass * log(z + sqrt(z * z + 1.0));
  }

  double excess_radius(double t) const;  // x(t), by safeguarded Newton

  template <class S>
  S operator()(const S& t) const {
    using std::sqrt;
    const double x0 = excess_radius(value_of(t));
    if constexpr (std::is_same_v<S, double>) {
      return 2.0 * mass + x0;
    } else {
      // Newton in jet arithmetic doubles the number of correct orders per step.
      S x(x0);
      for (int it = 0; it <= S::kOrder + 1; ++it) x = x - (geodesic_distance(x) - t) / sqrt((x + 2.0 * mass) / x);
      return 2.0 * mass + x;
    }
  }
};

/// Not-a-knot cubic spline through (t_i, f_i).
struct Tabulated {
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> second;  // spline second derivatives at the knots

  static Tabulated build(std::vector<double> t, std::vector<double> f);

  template <class S>
  S operator()(const S& x) const {
    const double xv = value_of(x);
    const std::size_t n = t.size();
    std::size_t i = 0;
    if (xv >= t[n - 2]) {
      i = n - 2;
    } else if (xv > t[0]) {
      i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), xv) - t.begin()) - 1;
    }
    const double h = t[i + 1] - t[i];
    const double a = f[i];
    const double b = (f[i + 1] - f[i]) / h - h * (2.0 * second[i] + second[i + 1]) / 6.0;
    const double c = second[i] / 2.0;
    const double e = (second[i + 1] - second[i]) / (6.0 * h);
    const S d = x - t[i];
    return a + d * (b + d * (c + d * e));
  }
};

}  // namespace profiles

/// Warping profile f(t) of dt^2 + f(t)^2 g_{S^2}.
class WarpProfile {
 public:
  using Variant = std::variant<profiles::Euclidean, profiles::Cone, profiles::SoftenedCone, profiles::Schwarzschild,
                               profiles::Sinh, profiles::Superlinear, profiles::Bumps, profiles::Tabulated>;

  WarpProfile() = default;  // Euclidean
  explicit WarpProfile(Variant v) : v_(std::move(v)) {}

  template <class S>
  S f(const S& t) const {
    return std::visit([&t](const auto& p) -> S { return p(t); }, v_);
  }
  double operator()(double t) const { return f(t); }

  /// f and its first N derivatives at t as a univariate jet.
  template <int N>
  Jet<1, N> derivatives(double t) const {
    return f(Jet<1, N>::variable(t, 0));
  }

  ProfileKind kind() const { return static_cast<ProfileKind>(v_.index()); }
  const Variant& variant() const { return v_; }

  /// Smooth pole at t = 0 (f(0) = 0, f'(0) = 1).
  bool pole_present() const;
  /// Third derivatives are trustworthy (everything except splines).
  bool closed_form() const { return kind() != ProfileKind::tabulated; }
  /// Natural length scale of the profile.
  double scale() const;

  /// Integral of f^-2 from t to infinity when known in closed form.
  std::optional<double> exact_green_tail(double t) const;

  nlohmann::ordered_json to_json() const;

 private:
  Variant v_;
};

struct GridSpec {
  double t_min = 1e-4;
  double t_max = 1e3;
  int points_per_decade = 256;
};

struct RadialWarpedMetric {
  WarpProfile profile;
  GridSpec grid;
  bool pole_present = true;

  double t_min() const { return grid.t_min; }
  double t_max() const { return grid.t_max; }
};

/// Builds a profile from a JSON spec such as {"kind": "softened_cone", "alpha": 0.5}.
WarpProfile make_profile(const nlohmann::json& spec);

/// Default grid for a profile: [1e-4, 1e3] times the profile scale, 256 points per decade.
/// Exceptions: superlinear runs to 1e6, sinh to t = 2 at 1024 points per decade,
/// tabulated profiles stay inside their knots.
GridSpec default_grid(const WarpProfile& profile);

/// Validates grid bounds (t_min > 0, t_max >= 100 t_min).
RadialWarpedMetric make_metric(WarpProfile profile, std::optional<GridSpec> grid = std::nullopt);

/// -4 f''/f + 2 (1 - f'^2) / f^2.
double scalar_curvature_radial(const WarpProfile& profile, double t);
double scalar_curvature_radial(const RadialWarpedMetric& metric, double t);

struct SamplerOptions {
  int min_bumps = 1;
  int max_bumps = 4;
  double min_width = 0.2;
  double max_width = 3.0;
  double min_slope = 0.1;  // asymptotic f'
  double max_slope = 0.95;
};

/// Random profiles with S >= 0 everywhere; deterministic in `seed`.
std::vector<WarpProfile> sample_s_nonneg(std::uint64_t seed, int count, const SamplerOptions& options = {});

/// Cartesian chart x = t w with g = (f^2/t^2)(I - w w^T) + w w^T.
ChartMetric to_chart(const RadialWarpedMetric& metric);

}  // namespace greenlab
