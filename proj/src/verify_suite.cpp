#include "greenlab/verify_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace greenlab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kIdentityTol = 1e-8;
constexpr double kTabulatedIdentityTol = 1e-5;
constexpr double kInequalityTol = 1e-6;

Eigen::Matrix3d random_symmetric(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m.data()[i] = n(rng);
  return 0.5 * (m + m.transpose());
}

Eigen::Matrix3d random_spd(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a.data()[i] = n(rng);
  return a * a.transpose() + 0.5 * Eigen::Matrix3d::Identity();
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  return v.normalized();
}

double identity_tolerance(const LevelSetFunctionals&, bool closed_form) {
  return closed_form ? kIdentityTol : kTabulatedIdentityTol;
}

void require_functionals(const LevelSetFunctionals& lf) {
  if (lf.Vflux.size() != lf.size()) throw Error(ErrorCode::InvalidParam, "run v_flux before the checks");
}

}  // namespace

void InequalityReport::add(double location, double lhs, double rhs, double slack) {
  residuals.push_back({location, lhs, rhs, slack});
  ++n_points;
  const bool worse = kind == CheckKind::identity ? std::abs(slack) > std::abs(worst_slack) || n_points == 1
                                                 : slack < worst_slack || n_points == 1;
  if (worse || std::isnan(slack)) {
    worst_slack = slack;
    worst_location = location;
  }
}

void InequalityReport::finish() {
  if (n_points == 0) {
    pass = true;
    return;
  }
  pass = kind == CheckKind::identity ? std::abs(worst_slack) <= tolerance : worst_slack >= -tolerance;
}

InequalityReport make_report(std::string id, CheckKind kind, double tolerance) {
  InequalityReport r;
  r.check_id = std::move(id);
  r.kind = kind;
  r.tolerance = tolerance;
  return r;
}

InequalityReport check_matrix_lemma(std::uint64_t seed, std::size_t count) {
  InequalityReport rep = make_report("matrix_lemma", CheckKind::inequality, 1e-12);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::Matrix3d C = random_symmetric(rng);
    C -= (C.trace() / 3.0) * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d v = random_unit(rng);
    const Eigen::Vector3d Cv = C * v;
    const double cvv = v.dot(Cv), cv2 = Cv.squaredNorm(), c2 = C.squaredNorm();
    const double first = cv2 - cvv * cvv;
    const double second = 2.0 / 3.0 * c2 - cv2;
    if (first <= second) rep.add(static_cast<double>(k), cv2, cvv * cvv, first);
    else rep.add(static_cast<double>(k), 2.0 / 3.0 * c2, cv2, second);
  }
  // sharpness witness
  const Eigen::Matrix3d W = Eigen::Vector3d(2.0, -1.0, -1.0).asDiagonal();
  const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
  const double w_cv2 = (W * e1).squaredNorm(), w_bound = 2.0 / 3.0 * W.squaredNorm();
  const double gap = w_bound - w_cv2;
  rep.metadata["witness"] = "diag(2,-1,-1), v = e1";
  rep.metadata["witness_Cv_sq"] = w_cv2;
  rep.metadata["witness_bound"] = w_bound;
  rep.metadata["witness_gap"] = gap;
  rep.finish();
  if (std::abs(gap) > 1e-14) rep.pass = false;
  return rep;
}

InequalityReport check_algebraic_hessian_identity(std::uint64_t seed, std::size_t count) {
  InequalityReport rep = make_report("hessian_level_set_identity", CheckKind::identity, 1e-11);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Matrix3d H = random_symmetric(rng);
    const Eigen::Matrix3d g = random_spd(rng);
    Eigen::Vector3d w(n(rng), n(rng), n(rng));
    if (w.norm() < 1e-3) w(0) += 1.0;
    const Eigen::Matrix3d g_inv = g.inverse();

    // left: tangential block of H in a g-orthonormal frame
    const Eigen::Matrix3d E = adapted_frame(w, g);
    const Eigen::Matrix3d He = E.transpose() * H * E;
    const double lhs = He.topLeftCorner<2, 2>().squaredNorm();

    // right: invariant expressions, with grad|grad v| = H(n, .)
    const double wn = std::sqrt(w.dot(g_inv * w));
    const Eigen::Vector3d nvec = g_inv * w / wn;
    const double hnn = nvec.dot(H * nvec);
    const Eigen::Vector3d dgrad = H * nvec;
    const double rhs = norm_sq(H, g) + hnn * hnn - 2.0 * norm_sq(dgrad, g);
    rep.add(static_cast<double>(k), lhs, rhs, lhs - rhs);
  }
  rep.finish();
  return rep;
}

InequalityReport check_bochner_gauss_chart(std::uint64_t seed, std::size_t count) {
  InequalityReport rep = make_report("bochner_gauss_chart", CheckKind::identity, kIdentityTol);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    // g = I + 0.2 sum_m P_m sin(k_m . x + phase_m) with symmetric P_m
    struct Mode {
      Eigen::Matrix3d P;
      Eigen::Vector3d wave;
      double phase;
    };
    std::array<Mode, 2> modes;
    for (auto& m : modes) {
      m.P = 0.2 * random_symmetric(rng) / 3.0;
      m.wave = Eigen::Vector3d(coef(rng), coef(rng), coef(rng)) * 1.5;
      m.phase = 3.0 * coef(rng);
    }
    const ChartMetric chart = ChartMetric::closed_form([modes](const auto& x) {
      using S = typename std::decay_t<decltype(x)>::Scalar;
      using std::sin;
      Mat3<S> g = Mat3<S>::Identity();
      for (const auto& m : modes) {
        const S s = sin(m.wave(0) * x(0) + m.wave(1) * x(1) + m.wave(2) * x(2) + m.phase);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) g(i, j) += m.P(i, j) * s;
      }
      return g;
    });
    // v = a.x + x^T Q x / 2 + c exp(d.x)
    const Eigen::Vector3d lin(coef(rng), coef(rng), coef(rng));
    const Eigen::Matrix3d Q = random_symmetric(rng);
    const Eigen::Vector3d d(coef(rng), coef(rng), coef(rng));
    const double c = coef(rng);
    const ScalarField field = ScalarField::closed_form([lin, Q, d, c](const auto& x) {
      using S = typename std::decay_t<decltype(x)>::Scalar;
      using std::exp;
      S v = S(0.0);
      for (int i = 0; i < 3; ++i) {
        v += lin(i) * x(i);
        for (int j = 0; j < 3; ++j) v += 0.5 * Q(i, j) * x(i) * x(j);
      }
      return S(v + c * exp(d(0) * x(0) + d(1) * x(1) + d(2) * x(2)));
    });
    const Point3 p(coef(rng), coef(rng), coef(rng));

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(chart.at(p));
    if (es.eigenvalues().minCoeff() < 0.2) {
      ++rep.skipped;
      continue;
    }
    const ScalarFieldJet j = jet_of(chart, field, p);
    if (j.degenerate || j.grad_norm < 1e-3) {
      ++rep.skipped;
      continue;
    }
    const PointFrame fr = frame_at(chart, p);
    const double wn = j.grad_norm;
    const Eigen::Matrix3d E = adapted_frame(j.grad, fr.g);
    const Eigen::Matrix3d He = E.transpose() * j.hess * E;
    const double det_A = (He(0, 0) * He(1, 1) - He(0, 1) * He(1, 0)) / (wn * wn);
    const double K = sectional_curvature(fr, E.col(0), E.col(1)) + det_A;  // Gauss equation
    const double hess_sq = norm_sq(j.hess, fr.g);
    const double lap = j.laplacian, hnn = He(2, 2);
    const double dlap_n = j.grad_laplacian.dot(E.col(2));

    const double lhs = j.grad_norm_laplacian / wn;
    const double terms[] = {0.5 * fr.scalar, -K, 0.5 * hess_sq / (wn * wn),
                            0.5 * (lap * lap - 2.0 * lap * hnn) / (wn * wn), dlap_n / wn};
    double rhs = 0.0, scale = std::abs(lhs);
    for (double x : terms) {
      rhs += x;
      scale += std::abs(x);
    }
    rep.add(static_cast<double>(k), lhs, rhs, (lhs - rhs) / scale);
  }
  rep.finish();
  return rep;
}

InequalityReport check_bochner_gauss(const GreensProfile& profile, std::size_t samples, std::uint64_t seed) {
  if (!profile.metric.profile.closed_form())
    throw Error(ErrorCode::NotClosedForm, "the third-derivative check needs a closed-form profile");
  InequalityReport rep = make_report("bochner_gauss", CheckKind::identity, 1e-6);
  std::vector<double> radii;
  if (samples == 0) {
    radii = profile.t;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lo = profile.t.front(), hi = profile.t.back();
    for (std::size_t k = 0; k < samples; ++k) radii.push_back(lo * std::pow(hi / lo, unit(rng)));
  }
  for (double t : radii) {
    const RadialJet rj = radial_jet(profile, t);
    const Jet<1, 4> b2 = 1.0 / (rj.u * rj.u);
    const Jet<1, 4> b = 1.0 / rj.u;
    const double f = rj.f.coeffs()[0], df = rj.f.coeffs()[1], ddf = 2.0 * rj.f.coeffs()[2];
    const double W = b2.coeffs()[1];  // |grad b^2| = (b^2)'
    const double dW = 2.0 * b2.coeffs()[2], ddW = 6.0 * b2.coeffs()[3];
    const double w = b.coeffs()[1];
    const double S = -4.0 * ddf / f + 2.0 * (1.0 - df * df) / (f * f);
    const double K = 1.0 / (f * f);
    const double hess_tt = W * df / f;
    const double B_sq = (dW - 2.0 * w * w) * (dW - 2.0 * w * w) + 2.0 * (hess_tt - 2.0 * w * w) * (hess_tt - 2.0 * w * w);

    const double lhs = (ddW + 2.0 * dW * df / f) / W;  // Delta of a radial function
    const double terms[] = {0.5 * S, -K, B_sq / (2.0 * W * W), 1.5 * dW / b2.coeffs()[0]};
    double rhs = 0.0, scale = std::abs(lhs);
    for (double x : terms) {
      rhs += x;
      scale += std::abs(x);
    }
    rep.add(t, lhs, rhs, (lhs - rhs) / scale);
  }
  rep.finish();
  return rep;
}

InequalityReport check_flux(const LevelSetFunctionals& lf) {
  InequalityReport rep = make_report("flux_A0", CheckKind::identity, kIdentityTol);
  for (std::size_t i = 0; i < lf.size(); ++i) rep.add(lf.r[i], lf.A0[i], kFourPi, lf.A0[i] - kFourPi);
  rep.finish();
  return rep;
}

InequalityReport check_laplacian_b2(const GreensProfile& p) {
  const bool closed = p.metric.profile.closed_form();
  InequalityReport rep = make_report("laplacian_b2", CheckKind::identity, closed ? kIdentityTol : kTabulatedIdentityTol);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double rhs = 6.0 * p.grad_b[i] * p.grad_b[i];
    rep.add(p.b[i], p.lap_b2[i], rhs, (p.lap_b2[i] - rhs) / (1.0 + rhs));
  }
  rep.finish();
  return rep;
}

InequalityReport check_tracefree_norm(const GreensProfile& p) {
  const bool closed = p.metric.profile.closed_form();
  InequalityReport rep = make_report("tracefree_norm", CheckKind::identity, closed ? kIdentityTol : kTabulatedIdentityTol);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w2 = p.grad_b[i] * p.grad_b[i];
    const double rhs = p.hess_sq[i] - 12.0 * w2 * w2;
    rep.add(p.b[i], p.B_sq[i], rhs, (p.B_sq[i] - rhs) / (1.0 + p.hess_sq[i]));
  }
  rep.finish();
  return rep;
}

std::vector<InequalityReport> check_A1_derivative_identities(const LevelSetFunctionals& lf) {
  const std::vector<double> dA = level_derivative(lf, lf.A1);
  std::vector<double> rA(lf.size());
  for (std::size_t i = 0; i < lf.size(); ++i) rA[i] = lf.r[i] * lf.A1[i];
  const std::vector<double> drA = level_derivative(lf, rA);

  InequalityReport first = make_report("A1_derivative", CheckKind::identity, 1e-6);
  InequalityReport second = make_report("rA1_derivative", CheckKind::identity, 1e-6);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double lhs1 = lf.r[i] * dA[i], rhs1 = 0.5 * lf.B1[i] - lf.A1[i];
    first.add(lf.r[i], lhs1, rhs1, (lhs1 - rhs1) / (1.0 + std::abs(lf.A1[i])));
    const double lhs2 = 2.0 * drA[i];
    second.add(lf.r[i], lhs2, lf.B1[i], (lhs2 - lf.B1[i]) / (1.0 + std::abs(lf.B1[i])));
  }
  first.finish();
  second.finish();
  return {first, second};
}

InequalityReport check_a_slope(const LevelSetFunctionals& lf) {
  const std::vector<double> dA = level_derivative(lf, lf.A1);
  InequalityReport rep = make_report("a_log_slope", CheckKind::identity, 1e-6);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double slope = lf.r[i] * dA[i] / lf.A1[i];
    rep.add(lf.r[i], slope, lf.a[i], (slope - lf.a[i]) / (1.0 + std::abs(lf.a[i])));
  }
  rep.finish();
  return rep;
}

InequalityReport check_v_flux(const LevelSetFunctionals& lf) {
  require_functionals(lf);
  InequalityReport rep = make_report("v_flux", CheckKind::identity, kIdentityTol);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double rhs = 2.0 * lf.a[i] + 2.0;
    rep.add(lf.r[i], lf.Vflux[i], rhs, lf.vflux_residual[i] / (1.0 + std::abs(lf.Vflux[i])));
  }
  rep.finish();
  return rep;
}

InequalityReport check_mw_inequality(const LevelSetFunctionals& lf) {
  const std::vector<double> cum = cumulative(lf, CumulativeOf::S1_plus_B2);
  InequalityReport rep = make_report("mw_inequality", CheckKind::inequality, kInequalityTol);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double r = lf.r[i];
    const double lhs = lf.a[i] * lf.A1[i];  // r A_1'
    const double rhs = lf.A1[i] - kFourPi + cum[i] / (2.0 * r);
    rep.add(r, lhs, rhs, (lhs - rhs) / (1.0 + std::abs(lf.A1[i])));
  }
  rep.finish();
  return rep;
}

InequalityReport check_B1_lower_bound(const LevelSetFunctionals& lf) {
  const std::vector<double> cum = cumulative(lf, CumulativeOf::S1_plus_B2);
  InequalityReport rep = make_report("B1_lower_bound", CheckKind::inequality, kInequalityTol);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double r = lf.r[i];
    // both sides divided by r
    const double lhs = lf.B1[i];
    const double rhs = 4.0 * lf.A1[i] - 2.0 * kFourPi + cum[i] / r;
    rep.add(r, lhs, rhs, (lhs - rhs) / (1.0 + std::abs(lf.A1[i])));
  }
  rep.finish();
  return rep;
}

InequalityReport check_cauchy_schwarz_B2(const LevelSetFunctionals& lf) {
  InequalityReport rep = make_report("cauchy_schwarz_B2", CheckKind::inequality, 1e-8);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double ra = lf.a[i] * lf.A1[i];
    const double rhs = 2.0 / 3.0 * lf.A1[i] * lf.B2[i];
    rep.add(lf.r[i], rhs, ra * ra, rhs - ra * ra);
  }
  rep.finish();
  return rep;
}

ADynamicsResult check_a_dynamics(const LevelSetFunctionals& lf, std::size_t pairs, std::uint64_t seed) {
  const std::size_t n = lf.size();
  ADynamicsResult out{make_report("a_dynamics", CheckKind::inequality, kInequalityTol),
                      make_report("a_dynamics_weighted", CheckKind::inequality, kInequalityTol)};
  // ds-integrands, with dr = t |grad b| ds
  std::vector<double> drift(n), weight(n);
  std::vector<std::size_t> bad(n + 1, 0);  // prefix count of levels with a outside [0, 2]
  for (std::size_t i = 0; i < n; ++i) {
    const double dr_ds = lf.t[i] * lf.grad_b[i];
    const double a = lf.a[i];
    drift[i] = (1.0 - a * a / 4.0 - kFourPi / lf.A1[i]) * dr_ds / lf.r[i];
    weight[i] = dr_ds / (std::sqrt(lf.r[i]) * lf.A1[i]);
    bad[i + 1] = bad[i] + ((a < -1e-9 || a > 2.0) ? 1 : 0);
  }
  const std::vector<double> G = uniform_cumulative(drift, lf.log_step);
  const std::vector<double> H = uniform_cumulative(weight, lf.log_step);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < pairs; ++k) {
    std::size_t i = pick(rng), j = pick(rng);
    while (j == i) j = pick(rng);
    if (i > j) std::swap(i, j);
    const double r1 = lf.r[i], r2 = lf.r[j];

    const double lhs = lf.a[j] - lf.a[i], rhs = G[j] - G[i];
    out.integral.add(r2, lhs, rhs, lhs - rhs);

    if (bad[j + 1] - bad[i] != 0) {
      ++out.weighted.skipped;
      continue;
    }
    const double q = std::sqrt(r1 / r2);
    const double bound = 2.0 + q * lf.a[i] - 2.0 * q - kFourPi / std::sqrt(r2) * (H[j] - H[i]);
    out.weighted.add(r2, lf.a[j], bound, lf.a[j] - bound);
  }
  out.integral.metadata["pairs"] = pairs;
  out.weighted.metadata["hypothesis"] = "0 <= a <= 2 on [r1, r2]";
  out.weighted.metadata["skipped_pairs"] = out.weighted.skipped;
  out.integral.finish();
  out.weighted.finish();
  return out;
}

bool equality_case(const LevelSetFunctionals& lf) {
  const double max_A1 = *std::max_element(lf.A1.begin(), lf.A1.end());
  double max_B = 0.0;
  for (double x : lf.B_nn) max_B = std::max(max_B, std::abs(x));
  return max_A1 > kFourPi - 1e-4 && max_B < 1e-6;
}

InequalityReport check_headline(const LevelSetFunctionals& lf, bool allow_indefinite) {
  const double min_S = *std::min_element(lf.S.begin(), lf.S.end());
  if (min_S < -1e-8 && !allow_indefinite)
    throw Error(ErrorCode::HypothesisViolated, "scalar curvature is negative (min S = " + std::to_string(min_S) + ")");

  InequalityReport rep = make_report("headline", CheckKind::inequality, kInequalityTol);
  std::vector<double> cum;
  if (lf.pole_present) cum = cumulative(lf, CumulativeOf::S1);
  double worst[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < lf.size(); ++i) {
    const double r = lf.r[i];
    const double s_area = 4.0 * std::numbers::pi * r * r;
    double s[3] = {kFourPi - lf.A1[i], lf.area[i] / s_area - 1.0, std::numeric_limits<double>::infinity()};
    double lhs[3] = {lf.A1[i], lf.area[i], 0.0};
    double rhs[3] = {kFourPi, s_area, 48.0 * std::numbers::pi};
    if (lf.pole_present) {
      lhs[2] = cum[i] / r;
      s[2] = 48.0 * std::numbers::pi - lhs[2];
    }
    int m = 0;
    for (int c = 0; c < 3; ++c) {
      worst[c] = std::min(worst[c], s[c]);
      if (s[c] < s[m]) m = c;
    }
    rep.add(r, lhs[m], rhs[m], s[m]);
  }
  double max_B = 0.0;
  for (double x : lf.B_nn) max_B = std::max(max_B, std::abs(x));
  rep.metadata["A1_bound_slack"] = worst[0];
  rep.metadata["area_bound_slack"] = worst[1];
  if (lf.pole_present) rep.metadata["scalar_integral_slack"] = worst[2];
  else rep.metadata["scalar_integral_slack"] = nullptr;
  rep.metadata["functional_only"] = !lf.pole_present;
  rep.metadata["max_A1"] = *std::max_element(lf.A1.begin(), lf.A1.end());
  rep.metadata["max_abs_B_nn"] = max_B;
  rep.metadata["min_S"] = min_S;
  rep.metadata["equality_case"] = equality_case(lf);
  rep.metadata["conditional"] = min_S < -1e-8;
  rep.finish();
  return rep;
}

nlohmann::ordered_json GrowthReport::to_json() const {
  nlohmann::ordered_json j;
  j["r0"] = r0;
  j["delta"] = delta;
  j["A1_at_r0"] = A1_at_r0;
  j["quadratic_constant"] = quadratic_constant;
  j["growth_exponent"] = growth_exponent;
  j["a_at_r_max"] = a_at_r_max;
  j["linear_bound_worst_slack"] = linear_bound_worst_slack;
  j["linear_bound_holds"] = linear_bound_holds;
  j["s_nonneg_fraction"] = s_nonneg_fraction;
  j["conditional"] = conditional;
  return j;
}

GrowthReport growth_diagnostic(const LevelSetFunctionals& lf, std::optional<double> r0, double delta) {
  const std::size_t n = lf.size();
  std::size_t start = n;
  if (r0) {
    start = static_cast<std::size_t>(std::lower_bound(lf.r.begin(), lf.r.end(), *r0) - lf.r.begin());
    if (start < n && !(lf.A1[start] > kFourPi + delta)) start = n;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (lf.A1[i] > kFourPi + delta) {
        start = i;
        break;
      }
  }
  if (start >= n)
    throw Error(ErrorCode::HypothesisNotMet, "A_1(r0) > 4 pi + delta fails at every computed level");

  GrowthReport g;
  g.r0 = lf.r[start];
  g.delta = delta;
  g.A1_at_r0 = lf.A1[start];
  g.quadratic_constant = std::numeric_limits<double>::infinity();
  g.linear_bound_worst_slack = std::numeric_limits<double>::infinity();
  std::size_t nonneg = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t i = start; i < n; ++i) {
    const double r = lf.r[i], A = lf.A1[i];
    g.quadratic_constant = std::min(g.quadratic_constant, A / (r * r));
    if (lf.S[i] >= -1e-8) {
      ++nonneg;
      g.linear_bound_worst_slack = std::min(g.linear_bound_worst_slack, (A - kFourPi - delta * r / g.r0) / A);
    }
    const double x = std::log(r), y = std::log(A);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  const double denom = m * sxx - sx * sx;
  g.growth_exponent = denom > 0 ? (m * sxy - sx * sy) / denom : 0.0;
  g.a_at_r_max = lf.a.back();
  if (nonneg == 0) g.linear_bound_worst_slack = 0.0;  // nothing to check
  g.linear_bound_holds = g.linear_bound_worst_slack >= -kInequalityTol;
  g.s_nonneg_fraction = static_cast<double>(nonneg) / static_cast<double>(n - start);
  double min_S = *std::min_element(lf.S.begin(), lf.S.end());
  g.conditional = min_S < -1e-8;
  return g;
}

namespace {

struct FdResidual {
  std::vector<double> t;
  std::vector<double> residual;  // worst of the two identities, scaled
  std::vector<double> floor;     // rounding level of the finite differences
};

FdResidual fd_identity_residual(const RadialWarpedMetric& metric) {
  const LevelSetFunctionals lf = functionals_of(build_profile(metric));
  const std::vector<InequalityReport> reps = check_A1_derivative_identities(lf);
  // samples carry the 1e-14 relative error of the u quadrature; the
  // stencil weights sum to 18/12 in absolute value
  constexpr double noise = 1.5 * 2e-14;
  FdResidual out{lf.t, std::vector<double>(lf.size()), std::vector<double>(lf.size())};
  for (std::size_t i = 0; i < lf.size(); ++i) {
    out.residual[i] = std::max(std::abs(reps[0].residuals[i].slack), std::abs(reps[1].residuals[i].slack));
    // differences of O(A_1) samples divided by h dr/ds
    const double amp = noise / (lf.log_step * lf.t[i] * lf.grad_b[i]);
    out.floor[i] = std::max(lf.r[i] * amp * lf.A1[i] / (1.0 + lf.A1[i]),
                            2.0 * amp * lf.r[i] * lf.A1[i] / (1.0 + std::abs(lf.B1[i])));
  }
  return out;
}

}  // namespace

InequalityReport check_grid_convergence(const RadialWarpedMetric& metric, int coarse_ppd) {
  InequalityReport rep = make_report("grid_convergence", CheckKind::inequality, 0.0);
  constexpr double kFloor = 1e-11;
  int ppd = coarse_ppd;
  FdResidual coarse, fine;
  for (;; ppd *= 2) {
    RadialWarpedMetric a = metric, b = metric;
    a.grid.points_per_decade = ppd;
    b.grid.points_per_decade = 2 * ppd;
    try {
      coarse = fd_identity_residual(a);
      fine = fd_identity_residual(b);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GridTooCoarse || ppd >= 512) throw;
    }
  }
  // compare at shared levels where truncation error dominates rounding
  double worst_coarse = 0.0, worst_fine = 0.0, all_coarse = 0.0, all_fine = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < coarse.t.size(); ++i) {
    all_coarse = std::max(all_coarse, coarse.residual[i]);
    const auto it = std::lower_bound(fine.t.begin(), fine.t.end(), coarse.t[i] * (1.0 - 1e-12));
    if (it == fine.t.end() || std::abs(*it / coarse.t[i] - 1.0) > 1e-10) continue;
    const std::size_t j = static_cast<std::size_t>(it - fine.t.begin());
    if (coarse.residual[i] < 10.0 * coarse.floor[i] || coarse.residual[i] < kFloor) continue;
    worst_coarse = std::max(worst_coarse, coarse.residual[i]);
    worst_fine = std::max(worst_fine, fine.residual[j]);
    ++used;
  }
  for (double x : fine.residual) all_fine = std::max(all_fine, x);
  const bool at_floor = used == 0;
  const double ratio = at_floor ? std::numeric_limits<double>::infinity()
                                : (worst_fine > 0.0 ? worst_coarse / worst_fine : std::numeric_limits<double>::infinity());
  rep.refinement_ratio = ratio;
  rep.metadata["coarse_ppd"] = ppd;
  rep.metadata["fine_ppd"] = 2 * ppd;
  rep.metadata["coarse_residual"] = all_coarse;
  rep.metadata["fine_residual"] = all_fine;
  rep.metadata["levels_compared"] = used;
  rep.metadata["at_rounding_floor"] = at_floor;
  rep.add(static_cast<double>(ppd), std::isfinite(ratio) ? ratio : 1e300, 8.0, at_floor ? 0.0 : std::min(ratio - 8.0, 1e300));
  rep.finish();
  return rep;
}

InequalityReport check_cross_validation(const GreensProfile& profile, int samples, std::uint64_t seed) {
  InequalityReport rep = make_report("chart_cross_validation", CheckKind::identity, 1e-5);
  const CrossValidation cv = cross_validate(profile, samples, seed);
  rep.add(cv.worst_point.norm(), cv.max_residual, 0.0, cv.max_residual);
  rep.n_points = static_cast<std::size_t>(cv.samples);
  rep.finish();
  return rep;
}

std::vector<InequalityReport> verify_metric(const RadialWarpedMetric& metric, const VerifyOptions& options) {
  const GreensProfile profile = build_profile(metric);
  const LevelSetFunctionals lf = functionals_of(profile);
  const double min_S = *std::min_element(lf.S.begin(), lf.S.end());
  if (min_S < -1e-8 && !options.allow_indefinite)
    throw Error(ErrorCode::HypothesisViolated,
                "scalar curvature is negative (min S = " + std::to_string(min_S) + "); pass --allow-indefinite");
  const bool closed = metric.profile.closed_form();

  std::vector<InequalityReport> out;
  out.push_back(check_flux(lf));
  out.push_back(check_laplacian_b2(profile));
  out.push_back(check_tracefree_norm(profile));
  for (auto& r : check_A1_derivative_identities(lf)) out.push_back(std::move(r));
  out.push_back(check_a_slope(lf));
  out.push_back(check_v_flux(lf));
  if (closed) {
    out.push_back(check_bochner_gauss(profile, options.bochner_samples, options.seed));
    out.push_back(check_cross_validation(profile, options.cross_samples, options.seed));
    if (options.grid_convergence) out.push_back(check_grid_convergence(metric));
  }
  if (lf.pole_present) {
    out.push_back(check_mw_inequality(lf));
    out.push_back(check_B1_lower_bound(lf));
  }
  out.push_back(check_cauchy_schwarz_B2(lf));
  ADynamicsResult ad = check_a_dynamics(lf, options.a_pairs, options.seed);
  out.push_back(std::move(ad.integral));
  out.push_back(std::move(ad.weighted));
  out.push_back(check_headline(lf, options.allow_indefinite));

  for (auto& r : out) {
    if (!closed && r.kind == CheckKind::identity) {
      r.tolerance = std::max(r.tolerance, identity_tolerance(lf, false));
      r.finish();
    }
    if (options.tolerance && r.check_id != "grid_convergence") {
      r.tolerance = *options.tolerance;
      r.finish();
    }
    if (min_S < -1e-8 && r.kind == CheckKind::inequality) r.metadata["conditional"] = true;
  }
  return out;
}

nlohmann::ordered_json to_json(const InequalityReport& report, const nlohmann::ordered_json& metric,
                               std::optional<std::uint64_t> seed) {
  const auto num = [](double x) -> nlohmann::ordered_json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["check_id"] = report.check_id;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["worst_slack"] = num(report.worst_slack);
  j["tolerance"] = report.tolerance;
  j["n_points"] = report.n_points;
  j["metric"] = metric;
  if (seed) j["seed"] = *seed;
  else j["seed"] = nullptr;
  j["kind"] = report.kind == CheckKind::identity ? "identity" : "inequality";
  j["worst_location"] = num(report.worst_location);
  j["skipped"] = report.skipped;
  j["refinement_ratio"] = report.refinement_ratio ? num(*report.refinement_ratio) : nlohmann::ordered_json(nullptr);
  j["metadata"] = report.metadata;
  return j;
}

}  // namespace greenlab
