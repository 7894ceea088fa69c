#pragma once

// Identity and inequality checks. Every check returns an InequalityReport;
// slack is lhs - rhs divided by the check's scale, so the verdict compares it
// directly against the tolerance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "greenlab/functionals.hpp"
#include "greenlab/greens_engine.hpp"
#include "json.hpp"

namespace greenlab {

enum class CheckKind {
  identity,    // pass iff |slack| <= tolerance
  inequality,  // pass iff slack >= -tolerance
};

struct Residual {
  double location = 0.0;  // level r, radius t or sample index
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct InequalityReport {
  std::string check_id;
  CheckKind kind = CheckKind::identity;
  std::vector<Residual> residuals;
  double worst_slack = 0.0;
  double worst_location = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::size_t n_points = 0;
  std::size_t skipped = 0;
  std::optional<double> refinement_ratio;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  /// Appends one sample and updates the worst case.
  void add(double location, double lhs, double rhs, double slack);
  /// Settles the verdict from the worst slack. Empty reports pass.
  void finish();
};

InequalityReport make_report(std::string id, CheckKind kind, double tolerance);

// Pointwise algebra, metric independent.

/// |C(v,v)|^2 <= |C(v)|^2 <= (2/3)|C|^2 for random trace-free C and unit v,
/// plus the diag(2,-1,-1) sharpness witness in metadata.
InequalityReport check_matrix_lemma(std::uint64_t seed, std::size_t count);

/// |grad v|^2 |A|^2 = |Hess|^2 + Hess(n,n)^2 - 2 |grad |grad v||^2 for random
/// Hessians, gradients and metrics.
InequalityReport check_algebraic_hessian_identity(std::uint64_t seed, std::size_t count);

/// The general Bochner/Gauss formula for Delta|grad v| at random points of
/// random smooth charts, with K from the Gauss equation.
InequalityReport check_bochner_gauss_chart(std::uint64_t seed, std::size_t count);

// Radial profile checks.

/// Delta|grad b^2| / |grad b^2| = S/2 - K + |B|^2/(2|grad b^2|^2) + (3/2) Hess_b2(n,n)/b^2
/// at `samples` random radii (or every grid point when samples == 0).
/// Throws NotClosedForm for tabulated profiles.
InequalityReport check_bochner_gauss(const GreensProfile& profile, std::size_t samples, std::uint64_t seed = 1);

/// A_0 = 4 pi.
InequalityReport check_flux(const LevelSetFunctionals& lf);
/// Delta b^2 = 6 |grad b|^2.
InequalityReport check_laplacian_b2(const GreensProfile& profile);
/// |B|^2 = |Hess_b2|^2 - 12 |grad b|^4.
InequalityReport check_tracefree_norm(const GreensProfile& profile);

/// r A_1' = B_1/2 - A_1 and 2 (r A_1)' = B_1, derivatives by 4th-order
/// differences on the log grid. Returns both reports.
std::vector<InequalityReport> check_A1_derivative_identities(const LevelSetFunctionals& lf);
/// a against the finite-difference slope r (log A_1)'.
InequalityReport check_a_slope(const LevelSetFunctionals& lf);
/// Vflux = 2a + 2.
InequalityReport check_v_flux(const LevelSetFunctionals& lf);

/// r A_1' >= A_1 - 4 pi + (1/2r) int_0^r (S_1 + B_2). Throws NotPoleAnchored.
InequalityReport check_mw_inequality(const LevelSetFunctionals& lf);
/// B_1 >= 4 A_1 - 8 pi + (1/r) int_0^r (S_1 + B_2). Throws NotPoleAnchored.
InequalityReport check_B1_lower_bound(const LevelSetFunctionals& lf);
/// (r A_1')^2 <= (2/3) A_1 B_2.
InequalityReport check_cauchy_schwarz_B2(const LevelSetFunctionals& lf);

struct ADynamicsResult {
  InequalityReport integral;  // a(r2) - a(r1) >= int (1 - a^2/4 - 4 pi/A_1) dr/r
  InequalityReport weighted;  // sqrt(r1/r2) form, only where 0 <= a <= 2
};

/// Random pairs r1 < r2 drawn from the grid.
ADynamicsResult check_a_dynamics(const LevelSetFunctionals& lf, std::size_t pairs, std::uint64_t seed);

/// A_1 <= 4 pi, area(b = r) >= 4 pi r^2 and (1/r) int_0^r S_1 <= 48 pi, plus
/// the equality detector. Throws HypothesisViolated if min S < -1e-8 unless
/// `allow_indefinite`. Without a pole the integral bound is skipped.
InequalityReport check_headline(const LevelSetFunctionals& lf, bool allow_indefinite = false);

/// True when max A_1 > 4 pi - 1e-4 and max |B_nn| < 1e-6.
bool equality_case(const LevelSetFunctionals& lf);

struct GrowthReport {
  double r0 = 0.0;
  double delta = 0.0;
  double A1_at_r0 = 0.0;
  double quadratic_constant = 0.0;  // largest c with A_1 >= c r^2 on [r0, r_max]
  double growth_exponent = 0.0;     // least-squares slope of log A_1 against log r on [r0, r_max]
  double a_at_r_max = 0.0;
  double linear_bound_worst_slack = 0.0;  // min of A_1 - 4 pi - delta r / r0, scaled by A_1, over levels with S >= 0
  bool linear_bound_holds = false;
  double s_nonneg_fraction = 0.0;  // fraction of levels >= r0 with S >= 0
  bool conditional = true;         // S < 0 somewhere: no claim is asserted

  nlohmann::ordered_json to_json() const;
};

/// Growth diagnostic. With no r0, uses the first level where A_1 > 4 pi + delta.
/// Throws HypothesisNotMet when no such level exists.
GrowthReport growth_diagnostic(const LevelSetFunctionals& lf, std::optional<double> r0, double delta);

/// Residuals of the finite-difference identities at points_per_decade p and
/// 2p; the ratio must be >= 8 unless both are at the rounding floor.
InequalityReport check_grid_convergence(const RadialWarpedMetric& metric, int coarse_ppd = 64);

/// Chart Hessian of b^2 against the radial components (relative 1e-5).
InequalityReport check_cross_validation(const GreensProfile& profile, int samples, std::uint64_t seed);

struct VerifyOptions {
  bool allow_indefinite = false;
  std::uint64_t seed = 1;
  std::size_t bochner_samples = 50;
  std::size_t a_pairs = 1000;
  int cross_samples = 20;
  bool grid_convergence = true;
  std::optional<double> tolerance;  // overrides every check's tolerance
};

/// Every applicable radial check for one metric, in a fixed order.
std::vector<InequalityReport> verify_metric(const RadialWarpedMetric& metric, const VerifyOptions& options = {});

/// Report in the published key order: check_id, verdict, worst_slack,
/// tolerance, n_points, metric, seed, then details.
nlohmann::ordered_json to_json(const InequalityReport& report, const nlohmann::ordered_json& metric = nullptr,
                               std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace greenlab
