#pragma once

// Pointwise Riemannian geometry in a single coordinate chart of a 3-manifold.
//
// Curvature convention: R_ijkl = g(R(d_i, d_j) d_l, d_k), with
// R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]. Sectional curvature of the plane
// spanned by orthonormal e1, e2 is then R(e1, e2, e1, e2), Ric_jl = g^ik R_ijkl
// and S = g^jl Ric_jl. Round spheres have positive curvature.

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "greenlab/errors.hpp"
#include "greenlab/jet.hpp"

namespace greenlab {

template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Point3 = Eigen::Vector3d;
using Jet3 = Jet<3, 3>;

/// Axis-aligned box, optionally with a ball around the origin removed.
struct ChartDomain {
  Eigen::Vector3d lower = Eigen::Vector3d::Constant(-1e300);
  Eigen::Vector3d upper = Eigen::Vector3d::Constant(1e300);
  double excluded_radius = 0.0;

  bool contains(const Point3& p) const {
    return p.allFinite() && (p.array() >= lower.array()).all() &&
           (p.array() <= upper.array()).all() && p.norm() >= excluded_radius;
  }
};

/// Seeds the three chart coordinates of `p` as independent jet variables.
template <int O>
Vec3<Jet<3, O>> seed_point(const Point3& p) {
  Vec3<Jet<3, O>> x;
  for (int i = 0; i < 3; ++i) x(i) = Jet<3, O>::variable(p(i), i);
  return x;
}

/// Cofactor inverse of a 3x3 matrix over any field-like scalar.
template <class S>
Mat3<S> inverse3(const Mat3<S>& m) {
  Mat3<S> c;
  c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  c(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  c(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  c(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  c(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  c(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  c(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const S det = m(0, 0) * c(0, 0) + m(0, 1) * c(1, 0) + m(0, 2) * c(2, 0);
  const S inv_det = S(1.0) / det;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = c(i, j) * inv_det;
  return c;
}

/// Finite-difference settings for sampled metrics.
struct FiniteDifferenceConfig {
  /// Coordinate scale multiplying eps^(1/5).
  double coordinate_scale = 1.0;

  double step() const;
};

/// Smooth field of symmetric positive-definite 3x3 matrices on a chart.
///
/// A closed-form metric is stored as a map over order-3 jets, so every
/// derivative the curvature code needs is exact to rounding. A sampled metric
/// only provides values and falls back to Richardson-extrapolated 4th-order
/// central differences.
class ChartMetric {
 public:
  using JetMap = std::function<Mat3<Jet3>(const Vec3<Jet3>&)>;
  using SampleMap = std::function<Eigen::Matrix3d(const Point3&)>;

  /// `map` must be generic over the scalar type, e.g.
  /// `[](const auto& x) { ... return Mat3<S>{...}; }`.
  template <class F>
  static ChartMetric closed_form(F map, ChartDomain domain = {}) {
    ChartMetric m;
    m.jet_map_ = [map](const Vec3<Jet3>& x) -> Mat3<Jet3> { return map(x); };
    m.sample_map_ = [map](const Point3& x) -> Eigen::Matrix3d { return map(x); };
    m.domain_ = domain;
    m.order_ = 3;
    return m;
  }

  static ChartMetric sampled(SampleMap map, ChartDomain domain = {}, FiniteDifferenceConfig fd = {});

  Eigen::Matrix3d at(const Point3& p) const { return sample_map_(p); }
  bool is_closed_form() const { return static_cast<bool>(jet_map_); }
  Mat3<Jet3> jets_at(const Point3& p) const;

  const ChartDomain& domain() const { return domain_; }
  int differentiability_order() const { return order_; }
  const FiniteDifferenceConfig& fd_config() const { return fd_; }

 private:
  JetMap jet_map_;
  SampleMap sample_map_;
  ChartDomain domain_;
  FiniteDifferenceConfig fd_;
  int order_ = 3;
};

/// Closed-form scalar field on a chart; `scale` sets the degeneracy threshold.
class ScalarField {
 public:
  using JetMap = std::function<Jet3(const Vec3<Jet3>&)>;
  using SampleMap = std::function<double(const Point3&)>;

  template <class F>
  static ScalarField closed_form(F map, double scale = 1.0) {
    ScalarField s;
    s.jet_map_ = [map](const Vec3<Jet3>& x) -> Jet3 { return map(x); };
    s.sample_map_ = [map](const Point3& x) -> double { return map(x); };
    s.scale_ = scale;
    return s;
  }

  double at(const Point3& p) const { return sample_map_(p); }
  Jet3 jets_at(const Point3& p) const { return jet_map_(seed_point<3>(p)); }
  double scale() const { return scale_; }

 private:
  JetMap jet_map_;
  SampleMap sample_map_;
  double scale_ = 1.0;
};

/// Fully covariant Riemann tensor with the convention stated at the top.
struct RiemannTensor {
  std::array<double, 81> data{};

  double& operator()(int i, int j, int k, int l) { return data[((i * 3 + j) * 3 + k) * 3 + l]; }
  double operator()(int i, int j, int k, int l) const { return data[((i * 3 + j) * 3 + k) * 3 + l]; }
};

/// Metric value plus first and second coordinate derivatives at a point.
struct MetricDerivatives {
  Eigen::Matrix3d g;
  std::array<Eigen::Matrix3d, 3> dg;                 // dg[a] = d_a g
  std::array<std::array<Eigen::Matrix3d, 3>, 3> ddg;  // ddg[a][b] = d_a d_b g
};

struct PointFrame {
  Point3 point;
  Eigen::Matrix3d g;
  Eigen::Matrix3d g_inv;
  std::array<Eigen::Matrix3d, 3> gamma;  // gamma[k](i, j) = Gamma^k_ij
  RiemannTensor riemann;
  Eigen::Matrix3d ricci;
  double scalar = 0.0;
  bool from_finite_differences = false;
};

/// Value, covariant derivatives and the |grad v| data used by Bochner-type
/// identities. Covectors are stored with lower indices.
struct ScalarFieldJet {
  double value = 0.0;
  Eigen::Vector3d grad;       // d_i v
  Eigen::Matrix3d hess;       // nabla_i nabla_j v
  double laplacian = 0.0;     // g^ij hess_ij
  Eigen::Vector3d grad_laplacian;  // d_i (Delta v)
  double grad_norm = 0.0;     // |grad v|
  bool degenerate = false;    // |grad v| below 1e-10 * field scale
  Eigen::Vector3d grad_norm_grad;  // d_i |grad v|
  double grad_norm_laplacian = 0.0;  // Delta |grad v|
};

MetricDerivatives metric_derivatives(const ChartMetric& metric, const Point3& p);

PointFrame frame_at(const ChartMetric& metric, const Point3& p);

ScalarFieldJet jet_of(const ChartMetric& metric, const ScalarField& field, const Point3& p);

/// Max |Riemann symmetry defect| relative to max |R_ijkl|.
double riemann_symmetry_residual(const PointFrame& frame);
/// Max |R_ijkl + R_iklj + R_iljk| relative to max |R_ijkl|.
double bianchi_residual(const PointFrame& frame);

/// R(X, Y, X, Y) / (|X|^2 |Y|^2 - <X, Y>^2) for contravariant X, Y.
double sectional_curvature(const PointFrame& frame, const Eigen::Vector3d& x, const Eigen::Vector3d& y);

/// h - weight * g.
Eigen::Matrix3d tracefree_part(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g, double weight);
/// h - (tr_g h / 3) g, which always has zero g-trace.
Eigen::Matrix3d tracefree_part(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g);

/// g-trace g^ij h_ij.
double trace_g(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g);

/// |T|^2 = g^ik g^jl T_ij T_kl for a covariant 2-tensor.
double norm_sq(const Eigen::Matrix3d& tensor, const Eigen::Matrix3d& g);
/// |w|^2 = g^ij w_i w_j for a covector.
double norm_sq(const Eigen::Vector3d& covector, const Eigen::Matrix3d& g);

/// g-orthonormal basis (columns) whose last vector is the unit normal
/// w^# / |w| of a covector w.
Eigen::Matrix3d adapted_frame(const Eigen::Vector3d& covector, const Eigen::Matrix3d& g);

}  // namespace greenlab
