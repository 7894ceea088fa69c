#include "greenlab/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace greenlab {

namespace {

using J2 = Jet<3, 2>;
using J1 = Jet<3, 1>;

std::string describe(const Point3& p) {
  std::ostringstream os;
  os << "(" << p(0) << ", " << p(1) << ", " << p(2) << ")";
  return os.str();
}

void require_in_domain(const ChartMetric& metric, const Point3& p) {
  if (!metric.domain().contains(p)) throw Error(ErrorCode::DomainError, "point " + describe(p) + " outside chart domain");
}

// 4th-order central first derivative along direction `dir` with step h.
template <class F>
Eigen::Matrix3d first_difference(const F& g, const Point3& p, const Point3& dir, double h) {
  return (-g(p + 2 * h * dir) + 8 * g(p + h * dir) - 8 * g(p - h * dir) + g(p - 2 * h * dir)) / (12 * h);
}

template <class F>
Eigen::Matrix3d second_difference(const F& g, const Point3& p, const Point3& dir, double h) {
  return (-g(p + 2 * h * dir) + 16 * g(p + h * dir) - 30 * g(p) + 16 * g(p - h * dir) - g(p - 2 * h * dir)) /
         (12 * h * h);
}

template <class F>
Eigen::Matrix3d mixed_difference(const F& g, const Point3& p, const Point3& da, const Point3& db, double h) {
  constexpr std::array<std::pair<int, double>, 4> w{{{2, -1.0}, {1, 8.0}, {-1, -8.0}, {-2, 1.0}}};
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const auto& [m, wm] : w)
    for (const auto& [n, wn] : w) acc += wm * wn * g(p + m * h * da + n * h * db);
  return acc / (144 * h * h);
}

MetricDerivatives finite_difference_derivatives(const ChartMetric& metric, const Point3& p) {
  const auto g = [&metric](const Point3& x) { return metric.at(x); };
  const double h = metric.fd_config().step();
  const Eigen::Matrix3d e = Eigen::Matrix3d::Identity();
  MetricDerivatives md;
  md.g = g(p);
  // Richardson: combine steps h and h/2 of a 4th-order stencil.
  const auto richardson = [](const Eigen::Matrix3d& coarse, const Eigen::Matrix3d& fine) {
    return Eigen::Matrix3d((16 * fine - coarse) / 15);
  };
  for (int a = 0; a < 3; ++a) {
    md.dg[a] = richardson(first_difference(g, p, e.col(a), h), first_difference(g, p, e.col(a), h / 2));
    md.ddg[a][a] = richardson(second_difference(g, p, e.col(a), h), second_difference(g, p, e.col(a), h / 2));
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      md.ddg[a][b] = richardson(mixed_difference(g, p, e.col(a), e.col(b), h),
                                mixed_difference(g, p, e.col(a), e.col(b), h / 2));
      md.ddg[b][a] = md.ddg[a][b];
    }
  }
  return md;
}

// Second-order Taylor polynomial of the metric about the point.
Mat3<J2> metric_polynomial(const MetricDerivatives& md) {
  Mat3<J2> G;
  const auto& mono = J2::monomials();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      J2 entry;
      for (int m = 0; m < J2::kSize; ++m) {
        const auto& e = mono.exps[m];
        int axes[2] = {-1, -1};
        int n = 0;
        for (int v = 0; v < 3; ++v)
          for (int k = 0; k < e[v]; ++k) axes[n++] = v;
        if (n == 0) {
          entry.coeffs()[m] = md.g(i, j);
        } else if (n == 1) {
          entry.coeffs()[m] = md.dg[axes[0]](i, j);
        } else {
          const double factor = axes[0] == axes[1] ? 0.5 : 1.0;
          entry.coeffs()[m] = factor * md.ddg[axes[0]][axes[1]](i, j);
        }
      }
      G(i, j) = entry;
    }
  }
  return G;
}

struct ConnectionJets {
  Mat3<J2> g;
  Mat3<J2> g_inv;
  std::array<Mat3<J1>, 3> gamma;
};

ConnectionJets connection(const MetricDerivatives& md) {
  ConnectionJets c;
  c.g = metric_polynomial(md);
  c.g_inv = inverse3(c.g);
  std::array<Mat3<J1>, 3> dg;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dg[a](i, j) = partial(c.g(i, j), a);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        J1 acc;
        for (int l = 0; l < 3; ++l)
          acc += truncate<1>(c.g_inv(k, l)) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        c.gamma[k](i, j) = acc * 0.5;
      }
    }
  }
  return c;
}

void require_spd(const Eigen::Matrix3d& g, const Point3& p) {
  if (!g.allFinite()) throw Error(ErrorCode::NonSPDMetric, "non-finite metric at " + describe(p));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorCode::NonSPDMetric, "metric not positive definite at " + describe(p));
}

double max_abs(const RiemannTensor& r) {
  double m = 0.0;
  for (double x : r.data) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double FiniteDifferenceConfig::step() const {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.2) * coordinate_scale;
}

ChartMetric ChartMetric::sampled(SampleMap map, ChartDomain domain, FiniteDifferenceConfig fd) {
  ChartMetric m;
  m.sample_map_ = std::move(map);
  m.domain_ = domain;
  m.fd_ = fd;
  m.order_ = 3;
  return m;
}

Mat3<Jet3> ChartMetric::jets_at(const Point3& p) const {
  if (!jet_map_) throw Error(ErrorCode::NotClosedForm, "sampled metric has no jet map");
  return jet_map_(seed_point<3>(p));
}

MetricDerivatives metric_derivatives(const ChartMetric& metric, const Point3& p) {
  require_in_domain(metric, p);
  MetricDerivatives md;
  if (!metric.is_closed_form()) {
    md = finite_difference_derivatives(metric, p);
  } else {
    const Mat3<Jet3> G = metric.jets_at(p);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        md.g(i, j) = G(i, j).value();
        for (int a = 0; a < 3; ++a) {
          md.dg[a](i, j) = G(i, j).d(a);
          for (int b = 0; b < 3; ++b) md.ddg[a][b](i, j) = G(i, j).d(a, b);
        }
      }
    }
  }
  require_spd(md.g, p);
  return md;
}

PointFrame frame_at(const ChartMetric& metric, const Point3& p) {
  const MetricDerivatives md = metric_derivatives(metric, p);
  const ConnectionJets conn = connection(md);

  PointFrame f;
  f.point = p;
  f.from_finite_differences = !metric.is_closed_form();
  f.g = md.g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.g_inv(i, j) = conn.g_inv(i, j).value();
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f.gamma[k](i, j) = conn.gamma[k](i, j).value();

  // up[l][i][j][k]: component l of R(d_i, d_j) d_k.
  double up[3][3][3][3];
  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          double r = conn.gamma[l](j, k).d(i) - conn.gamma[l](i, k).d(j);
          for (int m = 0; m < 3; ++m)
            r += f.gamma[l](i, m) * f.gamma[m](j, k) - f.gamma[l](j, m) * f.gamma[m](i, k);
          up[l][i][j][k] = r;
        }
      }
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double r = 0.0;
          for (int m = 0; m < 3; ++m) r += f.g(k, m) * up[m][i][j][l];
          f.riemann(i, j, k, l) = r;
        }

  f.ricci.setZero();
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) f.ricci(j, l) += f.g_inv(i, k) * f.riemann(i, j, k, l);
  f.ricci = 0.5 * (f.ricci + f.ricci.transpose()).eval();
  f.scalar = (f.g_inv.cwiseProduct(f.ricci)).sum();
  return f;
}

ScalarFieldJet jet_of(const ChartMetric& metric, const ScalarField& field, const Point3& p) {
  const MetricDerivatives md = metric_derivatives(metric, p);
  const ConnectionJets conn = connection(md);
  const Jet3 v = field.jets_at(p);

  std::array<J2, 3> dv;
  for (int i = 0; i < 3; ++i) dv[i] = partial(v, i);

  Eigen::Matrix3d g_inv;
  std::array<Eigen::Matrix3d, 3> gamma;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      g_inv(i, j) = conn.g_inv(i, j).value();
      for (int k = 0; k < 3; ++k) gamma[k](i, j) = conn.gamma[k](i, j).value();
    }

  ScalarFieldJet out;
  out.value = v.value();
  for (int i = 0; i < 3; ++i) out.grad(i) = v.d(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double h = v.d(i, j);
      for (int k = 0; k < 3; ++k) h -= gamma[k](i, j) * out.grad(k);
      out.hess(i, j) = h;
    }
  out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  out.laplacian = g_inv.cwiseProduct(out.hess).sum();

  // Delta v as a first-order jet, for grad(Delta v).
  J1 lap;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      J1 h = partial(dv[i], j);
      for (int k = 0; k < 3; ++k) h -= conn.gamma[k](i, j) * truncate<1>(dv[k]);
      lap += truncate<1>(conn.g_inv(i, j)) * h;
    }
  for (int a = 0; a < 3; ++a) out.grad_laplacian(a) = lap.d(a);

  J2 q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q += conn.g_inv(i, j) * dv[i] * dv[j];
  out.grad_norm = std::sqrt(std::max(q.value(), 0.0));
  out.degenerate = out.grad_norm < 1e-10 * field.scale();
  if (out.degenerate) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.grad_norm_grad.setConstant(nan);
    out.grad_norm_laplacian = nan;
    return out;
  }
  const J2 phi = sqrt(q);
  for (int a = 0; a < 3; ++a) out.grad_norm_grad(a) = phi.d(a);
  double lap_phi = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double h = phi.d(i, j);
      for (int k = 0; k < 3; ++k) h -= gamma[k](i, j) * phi.d(k);
      lap_phi += g_inv(i, j) * h;
    }
  out.grad_norm_laplacian = lap_phi;
  return out;
}

double riemann_symmetry_residual(const PointFrame& f) {
  const auto& R = f.riemann;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          worst = std::max({worst, std::abs(R(i, j, k, l) + R(j, i, k, l)), std::abs(R(i, j, k, l) + R(i, j, l, k)),
                            std::abs(R(i, j, k, l) - R(k, l, i, j))});
        }
  return worst / std::max(max_abs(R), 1e-300);
}

double bianchi_residual(const PointFrame& f) {
  const auto& R = f.riemann;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          worst = std::max(worst, std::abs(R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)));
  return worst / std::max(max_abs(R), 1e-300);
}

double sectional_curvature(const PointFrame& f, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) r += f.riemann(i, j, k, l) * x(i) * y(j) * x(k) * y(l);
  const double xx = x.dot(f.g * x), yy = y.dot(f.g * y), xy = x.dot(f.g * y);
  return r / (xx * yy - xy * xy);
}

Eigen::Matrix3d tracefree_part(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g, double weight) {
  return h - weight * g;
}

Eigen::Matrix3d tracefree_part(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g) {
  return tracefree_part(h, g, trace_g(h, g) / 3.0);
}

double trace_g(const Eigen::Matrix3d& h, const Eigen::Matrix3d& g) {
  return g.inverse().cwiseProduct(h).sum();
}

double norm_sq(const Eigen::Matrix3d& tensor, const Eigen::Matrix3d& g) {
  const Eigen::Matrix3d g_inv = g.inverse();
  return (g_inv * tensor * g_inv * tensor.transpose()).trace();
}

double norm_sq(const Eigen::Vector3d& covector, const Eigen::Matrix3d& g) {
  return covector.dot(g.ldlt().solve(covector));
}

Eigen::Matrix3d adapted_frame(const Eigen::Vector3d& covector, const Eigen::Matrix3d& g) {
  const Eigen::Vector3d raised = g.ldlt().solve(covector);
  const Eigen::Vector3d n = raised / std::sqrt(raised.dot(g * raised));
  const auto inner = [&g](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.dot(g * b); };

  // Start Gram-Schmidt from the coordinate axes least aligned with n.
  std::array<int, 3> axes{0, 1, 2};
  std::sort(axes.begin(), axes.end(), [&](int a, int b) { return std::abs(n(a)) < std::abs(n(b)); });
  Eigen::Matrix3d frame;
  frame.col(2) = n;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector3d e = Eigen::Vector3d::Unit(axes[c]);
    e -= inner(e, n) * n;
    for (int prev = 0; prev < c; ++prev) e -= inner(e, frame.col(prev)) * frame.col(prev);
    frame.col(c) = e / std::sqrt(inner(e, e));
  }
  return frame;
}

}  // namespace greenlab
