#include <cmath>
#include <random>

#include "doctest.h"
#include "greenlab/geometry_models.hpp"
#include "greenlab/tensor_core.hpp"

using namespace greenlab;

namespace {

ChartMetric euclidean_chart() {
  return ChartMetric::closed_form([](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    return Mat3<S>(Mat3<S>::Identity());
  });
}

// Non-symmetric test metric with curvature in every component.
ChartMetric lumpy_chart() {
  return ChartMetric::closed_form([](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    using std::exp;
    using std::sin;
    Mat3<S> g;
    g(0, 0) = 1.0 + 0.3 * sin(x(1)) * x(2);
    g(1, 1) = exp(0.2 * x(0)) + 0.1 * x(2) * x(2);
    g(2, 2) = 1.5 + 0.2 * x(0) * x(1);
    g(0, 1) = g(1, 0) = 0.1 * x(2);
    g(0, 2) = g(2, 0) = 0.05 * x(0) * x(1);
    g(1, 2) = g(2, 1) = 0.1 * sin(x(0));
    return g;
  });
}

RadialWarpedMetric radial(const char* spec) { return make_metric(make_profile(nlohmann::json::parse(spec))); }

}  // namespace

TEST_CASE("flat chart has no curvature") {
  const PointFrame fr = frame_at(euclidean_chart(), Point3(0.3, -1.0, 2.0));
  for (int k = 0; k < 3; ++k) CHECK(fr.gamma[k].norm() == 0.0);
  for (double r : fr.riemann.data) CHECK(r == 0.0);
  CHECK(fr.scalar == 0.0);
}

TEST_CASE("Riemann symmetries and Bianchi identity") {
  const Point3 p(0.4, -0.2, 0.7);
  const PointFrame exact = frame_at(lumpy_chart(), p);
  CHECK(riemann_symmetry_residual(exact) < 1e-12);
  CHECK(bianchi_residual(exact) < 1e-9);

  const ChartMetric lumpy = lumpy_chart();
  const ChartMetric sampled = ChartMetric::sampled([lumpy](const Point3& x) { return lumpy.at(x); });
  const PointFrame fd = frame_at(sampled, p);
  CHECK(fd.from_finite_differences);
  CHECK(bianchi_residual(fd) < 1e-5);
  CHECK(std::abs(fd.scalar - exact.scalar) < 1e-5 * (1 + std::abs(exact.scalar)));
}

TEST_CASE("hyperbolic chart scalar curvature") {
  const ChartMetric chart = to_chart(radial(R"({"kind": "sinh"})"));
  const PointFrame fr = frame_at(chart, Point3(0.6, 0.0, 0.8));
  CHECK(fr.scalar == doctest::Approx(-6.0).epsilon(1e-9));
  // constant sectional curvature -1
  CHECK(sectional_curvature(fr, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0.3)) ==
        doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("chart curvature matches the radial formula") {
  for (const char* spec : {R"({"kind": "softened_cone", "alpha": 0.5})", R"({"kind": "cone", "alpha": 0.8})",
                           R"({"kind": "schwarzschild", "mass": 1.0})", R"({"kind": "superlinear"})"}) {
    CAPTURE(std::string(spec));
    const RadialWarpedMetric m = radial(spec);
    const ChartMetric chart = to_chart(m);
    for (double t : {0.5, 2.0, 7.0}) {
      const Point3 p = t * Point3(1, 2, -2) / 3.0;
      const double expected = scalar_curvature_radial(m, t);
      CHECK(std::abs(frame_at(chart, p).scalar - expected) <= 1e-6 * (1 + std::abs(expected)));
    }
  }
}

TEST_CASE("frame_at errors") {
  const ChartMetric chart = to_chart(radial(R"({"kind": "euclidean"})"));
  CHECK_THROWS_AS(frame_at(chart, Point3(0, 0, 0)), Error);
  const ChartMetric bad = ChartMetric::closed_form([](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat3<S> g = Mat3<S>::Identity();
    g(2, 2) = S(-1.0);
    return g;
  });
  try {
    frame_at(bad, Point3(1, 1, 1));
    FAIL("expected NonSPDMetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSPDMetric);
  }
}

TEST_CASE("jet_of on the flat chart") {
  const ChartMetric flat = euclidean_chart();
  const auto coord = ScalarField::closed_form([](const auto& x) { return x(0); });
  const ScalarFieldJet a = jet_of(flat, coord, Point3(0.1, 0.2, 0.3));
  CHECK((a.grad - Eigen::Vector3d::UnitX()).norm() == 0.0);
  CHECK(a.hess.norm() == 0.0);

  const auto square = ScalarField::closed_form([](const auto& x) { return x(0) * x(0) + x(1) * x(1) + x(2) * x(2); });
  const ScalarFieldJet b = jet_of(flat, square, Point3(1.0, -2.0, 0.5));
  CHECK((b.hess - 2.0 * Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(b.laplacian == doctest::Approx(6.0));
  // |grad v| = 2|x| has Laplacian 4/|x|
  CHECK(b.grad_norm_laplacian == doctest::Approx(4.0 / std::sqrt(5.25)));
}

TEST_CASE("jet_of commutes with translations of the flat chart") {
  const ChartMetric flat = euclidean_chart();
  const Point3 shift(0.7, -1.1, 0.4);
  const auto field = ScalarField::closed_form([](const auto& x) {
    using std::sin;
    return sin(x(0)) * x(1) + x(2) * x(2) * x(0);
  });
  const auto moved = ScalarField::closed_form([shift](const auto& x) {
    using std::sin;
    const auto y0 = x(0) - shift(0), y1 = x(1) - shift(1), y2 = x(2) - shift(2);
    return sin(y0) * y1 + y2 * y2 * y0;
  });
  const Point3 p(0.3, 0.9, -0.6);
  const ScalarFieldJet a = jet_of(flat, field, p), b = jet_of(flat, moved, p + shift);
  CHECK((a.grad - b.grad).norm() < 1e-10);
  CHECK((a.hess - b.hess).norm() < 1e-10);
  CHECK(std::abs(a.grad_norm_laplacian - b.grad_norm_laplacian) < 1e-10);
}

TEST_CASE("degenerate gradient is flagged") {
  const auto square = ScalarField::closed_form([](const auto& x) { return x(0) * x(0) + x(1) * x(1) + x(2) * x(2); });
  const ScalarFieldJet j = jet_of(euclidean_chart(), square, Point3(0, 0, 0));
  CHECK(j.degenerate);
}

TEST_CASE("tracefree_part and norm_sq") {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(tracefree_part(2.0 * I, I, 2.0).norm() == 0.0);
  const Eigen::Matrix3d d = Eigen::Vector3d(4, 1, 1).asDiagonal();
  CHECK((tracefree_part(d, I, 2.0) - Eigen::Matrix3d(Eigen::Vector3d(2, -1, -1).asDiagonal())).norm() == 0.0);
  CHECK(norm_sq(I, I) == 3.0);
  CHECK(norm_sq(Eigen::Matrix3d(Eigen::Vector3d(2, -1, -1).asDiagonal()), I) == 6.0);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  for (int k = 0; k < 200; ++k) {
    Eigen::Matrix3d a, h;
    for (int i = 0; i < 9; ++i) a.data()[i] = n(rng), h.data()[i] = n(rng);
    const Eigen::Matrix3d g = a * a.transpose() + 0.5 * I;
    h = (h + h.transpose()).eval();
    CHECK(std::abs(trace_g(tracefree_part(h, g), g)) < 1e-12 * (1 + h.norm()));
    CHECK(norm_sq(g, g) == doctest::Approx(3.0).epsilon(1e-12));
    const Eigen::Matrix3d frame = adapted_frame(Eigen::Vector3d(n(rng), n(rng), n(rng)), g);
    CHECK((frame.transpose() * g * frame - I).norm() < 1e-12);
  }
}
