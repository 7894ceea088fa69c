#pragma once

// Green's function u = int_t^inf f^-2 (so that the flux 4 pi f^2 |u'| is 4 pi),
// b = 1/u and the Hessian of b^2 on a logarithmic radial grid.

#include <cstdint>
#include <optional>
#include <vector>

#include "greenlab/geometry_models.hpp"
#include "greenlab/jet.hpp"
#include "greenlab/tensor_core.hpp"

namespace greenlab {

struct GreensProfile {
  RadialWarpedMetric metric;
  double log_step = 0.0;  // h in t_i = t_min exp(i h)

  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> b;
  std::vector<double> grad_b;  // b^2 / f^2
  std::vector<double> f;
  std::vector<double> df;
  std::vector<double> area;  // 4 pi f^2
  std::vector<double> S;

  // Filled by hessian_b2.
  bool has_hessian = false;
  std::vector<double> hess_b2_nn;
  std::vector<double> hess_b2_tt;
  std::vector<double> B_nn;
  std::vector<double> B_tt;
  std::vector<double> B_sq;     // B_nn^2 + 2 B_tt^2
  std::vector<double> hess_sq;  // hess_nn^2 + 2 hess_tt^2
  std::vector<double> lap_b2;   // hess_nn + 2 hess_tt
  double richardson_max = 0.0;  // worst relative FD estimate for (b^2)''

  // Tail model beyond t_max.
  bool tail_exact = false;
  std::optional<double> alpha_inf;
  std::optional<double> c_inf;
  double tail_fit_residual = 0.0;

  double flux_max_residual = 0.0;  // max |area |u'| - 4 pi|
  double pole_ratio = 0.0;         // t_min u(t_min)

  std::size_t size() const { return t.size(); }
};

/// Integrates u inward from t_max. Throws ParabolicMetric or TailFitError.
GreensProfile solve_green(const RadialWarpedMetric& metric);

/// Adds Hess b^2 and its trace-free part. Throws GridTooCoarse when the
/// Richardson estimate of the log-grid second derivative exceeds 1e-6.
GreensProfile hessian_b2(GreensProfile profile);

/// solve_green followed by hessian_b2.
GreensProfile build_profile(const RadialWarpedMetric& metric);

/// u at an arbitrary t >= t_min.
double green_value(const GreensProfile& profile, double t);

struct RadialJet {
  Jet<1, 3> f;
  Jet<1, 4> u;  // u' = -f^-2 exactly
};

/// Taylor data of f and u about t.
RadialJet radial_jet(const GreensProfile& profile, double t);

/// b^2 as a closed-form field on the Cartesian chart of the profile's metric.
ScalarField b_squared_field(const GreensProfile& profile);

struct CrossValidation {
  int samples = 0;
  double max_residual = 0.0;  // |H_chart - H_radial|_g / (1 + |H_radial|_g)
  Point3 worst_point = Point3::Zero();
};

/// Compares the chart Hessian of b^2 with the radial components at random points.
CrossValidation cross_validate(const GreensProfile& profile, int samples, std::uint64_t seed);

}  // namespace greenlab
