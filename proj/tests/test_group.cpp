#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include <gavg/group.hpp>

using namespace gavg;

namespace {

std::shared_ptr<const Group> u1() {
  return std::make_shared<const Group>(GroupFamily::U1);
}
std::shared_ptr<const Group> su2() {
  return std::make_shared<const Group>(GroupFamily::SU2);
}
std::shared_ptr<const Group> so3() {
  return std::make_shared<const Group>(GroupFamily::SO3);
}

GroupPoint u1_angle(double theta) {
  Matrix m(1, 1);
  m(0, 0) = std::exp(Complex(0.0, theta));
  return {m};
}

double angle_of(const GroupPoint& g) { return std::arg(g.m(0, 0)); }

// Quaternion (a, b, c, d) as a 2x2 special unitary matrix.
Matrix quat_matrix(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m(0, 0) = Complex(a, b);
  m(0, 1) = Complex(c, d);
  m(1, 0) = Complex(-c, d);
  m(1, 1) = Complex(a, -b);
  return m;
}

struct Quat {
  double a, b, c, d;
};

Quat quat_product(const Quat& x, const Quat& y) {
  return {x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
          x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
          x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
          x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a};
}

Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Quat q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
  const double n = std::sqrt(q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d);
  return {q.a / n, q.b / n, q.c / n, q.d / n};
}

}  // namespace

TEST_CASE("u1 multiplication adds angles") {
  auto g = u1();
  const GroupPoint p = g->multiply(u1_angle(0.3), u1_angle(0.5));
  CHECK(angle_of(p) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("multiplying by the identity is a no-op") {
  auto g = su2();
  std::mt19937_64 rng(3);
  const GroupPoint a = g->random_point(rng);
  CHECK(g->distance(g->multiply(a, g->identity()), a) <= 1e-12);
  CHECK(g->distance(g->multiply(g->identity(), a), a) <= 1e-12);
}

TEST_CASE("su2 product matches the quaternion product") {
  auto g = su2();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Quat x = random_unit_quat(rng);
    const Quat y = random_unit_quat(rng);
    const GroupPoint p =
        g->multiply({quat_matrix(x.a, x.b, x.c, x.d)},
                    {quat_matrix(y.a, y.b, y.c, y.d)});
    const Quat xy = quat_product(x, y);
    const Matrix expected = quat_matrix(xy.a, xy.b, xy.c, xy.d);
    CHECK((p.m - expected).norm() <= 1e-12);
  }
}

TEST_CASE("inverse of the identity is the identity") {
  auto g = so3();
  CHECK(g->distance(g->inverse(g->identity()), g->identity()) == 0.0);
}

TEST_CASE("u1 inverse negates the angle") {
  auto g = u1();
  CHECK(angle_of(g->inverse(u1_angle(0.3))) == doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("so3 inverse is the transpose") {
  auto g = so3();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const GroupPoint r = g->random_point(rng);
    const GroupPoint rinv = g->inverse(r);
    CHECK((rinv.m - r.m.transpose()).norm() <= 1e-12);
    CHECK((r.m * r.m.transpose() - Matrix::Identity(3, 3)).norm() <= 1e-12);
  }
}

TEST_CASE("exp of zero is the identity") {
  for (auto g : {u1(), su2(), so3()}) {
    CHECK(g->distance(g->exp_map(g->zero_algebra()), g->identity()) <= 1e-14);
  }
}

TEST_CASE("su2 exp lands at distance equal to the algebra norm") {
  auto g = su2();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    AlgebraVector v = g->random_algebra(rng, 1.0);
    v.m *= 0.5 / g->algebra_norm(v);
    CHECK(g->distance_to_identity(g->exp_map(v)) ==
          doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("log of the identity is zero") {
  auto g = su2();
  CHECK(g->algebra_norm(g->log_map(g->identity())) <= 1e-14);
}

TEST_CASE("log inverts exp inside the chart") {
  std::mt19937_64 rng(13);
  for (auto g : {u1(), su2(), so3()}) {
    for (int k = 0; k < 25; ++k) {
      AlgebraVector v = g->random_algebra(rng, 0.99);
      AlgebraVector w = g->log_map(g->exp_map(v));
      AlgebraVector diff{w.m - v.m};
      CHECK(g->algebra_norm(diff) <= 1e-10);
    }
  }
}

TEST_CASE("log throws outside the scaled unit ball") {
  auto g = su2();
  // Scaled distance 1 corresponds to a geodesic angle of pi/2 on SU(2);
  // a rotation beyond that must be rejected rather than branch-picked.
  Matrix m(2, 2);
  m.setZero();
  m(0, 0) = std::exp(Complex(0.0, 1.8));
  m(1, 1) = std::exp(Complex(0.0, -1.8));
  CHECK_THROWS_AS((void)g->log_map({m}), OutOfChartError);
}

TEST_CASE("su2 log of a diagonal element is the diagonal algebra element") {
  auto g = su2();
  const double theta = 0.2;
  Matrix m(2, 2);
  m.setZero();
  m(0, 0) = std::exp(Complex(0.0, theta));
  m(1, 1) = std::exp(Complex(0.0, -theta));
  const AlgebraVector v = g->log_map({m});
  Matrix expected(2, 2);
  expected.setZero();
  expected(0, 0) = Complex(0.0, theta);
  expected(1, 1) = Complex(0.0, -theta);
  CHECK((v.m - expected).norm() <= 1e-12);
}

TEST_CASE("distance is zero on the diagonal and bi-invariant") {
  auto g = su2();
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const GroupPoint a = g->random_point(rng);
    GroupPoint b = g->multiply(a, g->exp_map(g->random_algebra(rng, 0.4)));
    const GroupPoint t = g->random_point(rng);
    CHECK(g->distance(a, a) <= 1e-14);
    const double d = g->distance(a, b);
    CHECK(std::abs(g->distance(g->multiply(t, a), g->multiply(t, b)) - d) <= 1e-10);
    CHECK(std::abs(g->distance(g->multiply(a, t), g->multiply(b, t)) - d) <= 1e-10);
  }
}

TEST_CASE("geodesic distance from the identity equals the algebra norm") {
  auto g = su2();
  std::mt19937_64 rng(19);
  AlgebraVector v = g->random_algebra(rng, 1.0);
  v.m *= 0.7 / g->algebra_norm(v);
  CHECK(g->distance(g->identity(), g->exp_map(v)) ==
        doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("adjoint by the identity and on abelian groups is trivial") {
  std::mt19937_64 rng(23);
  auto s = su2();
  const AlgebraVector v = s->random_algebra(rng, 0.5);
  CHECK((s->adjoint(s->identity(), v).m - v.m).norm() <= 1e-14);

  auto a = u1();
  const AlgebraVector w = a->random_algebra(rng, 0.5);
  CHECK((a->adjoint(a->random_point(rng), w).m - w.m).norm() <= 1e-14);
}

TEST_CASE("so3 adjoint rotates the axis vector") {
  auto g = so3();
  std::mt19937_64 rng(29);
  for (int k = 0; k < 10; ++k) {
    const GroupPoint r = g->random_point(rng);
    const AlgebraVector v = g->random_algebra(rng, 0.8);
    // Axis vector under the hat map: v = [w]_x.
    Eigen::Vector3d w(v.m(2, 1).real(), v.m(0, 2).real(), v.m(1, 0).real());
    const AlgebraVector av = g->adjoint(r, v);
    Eigen::Vector3d aw(av.m(2, 1).real(), av.m(0, 2).real(), av.m(1, 0).real());
    CHECK((aw - r.m.real() * w).norm() <= 1e-12);
  }
}

TEST_CASE("exp commutes with the adjoint action") {
  std::mt19937_64 rng(31);
  for (auto g : {su2(), so3()}) {
    for (int k = 0; k < 15; ++k) {
      const GroupPoint a = g->random_point(rng);
      const AlgebraVector v = g->random_algebra(rng, 0.9);
      const GroupPoint lhs = g->exp_map(g->adjoint(a, v));
      const GroupPoint rhs =
          g->multiply(g->multiply(a, g->exp_map(v)), g->inverse(a));
      CHECK(g->distance(lhs, rhs) <= 1e-10);
    }
  }
}

TEST_CASE("quadrature weights are a probability vector") {
  for (auto g : {u1(), su2(), so3()}) {
    const GroupQuadrature q = g->haar_quadrature(6);
    CHECK(std::abs(q.weights.sum() - 1.0) <= 1e-12);
    CHECK(q.weights.minCoeff() >= 0.0);
  }
}

TEST_CASE("u1 quadrature integrates trigonometric polynomials exactly") {
  auto g = u1();
  const int n = 8;
  const GroupQuadrature q = g->haar_quadrature(n);
  for (int k = 1; k < n; ++k) {
    Complex acc = 0.0;
    for (int j = 0; j < static_cast<int>(q.nodes.size()); ++j) {
      acc += q.weights[j] * std::pow(q.nodes[j].m(0, 0), k);
    }
    CHECK(std::abs(acc) <= 1e-13);
  }
}

TEST_CASE("su2 quadrature kills matrix coefficients") {
  auto g = su2();
  const GroupQuadrature q = g->haar_quadrature(8);
  std::mt19937_64 rng(37);
  const GroupPoint h = g->random_point(rng);
  double acc = 0.0;
  for (int j = 0; j < static_cast<int>(q.nodes.size()); ++j) {
    acc += q.weights[j] * (q.nodes[j].m * h.m).trace().real();
  }
  // The exact Haar integral of any nontrivial matrix coefficient is zero.
  CHECK(std::abs(acc) <= 1e-8);
}

TEST_CASE("quadrature is translation invariant on matrix coefficients") {
  std::mt19937_64 rng(41);
  for (auto g : {u1(), su2(), so3()}) {
    const GroupQuadrature q = g->haar_quadrature(8);
    const GroupPoint t = g->random_point(rng);
    const GroupPoint h = g->random_point(rng);
    auto f = [&](const GroupPoint& x) { return (x.m * h.m).trace().real(); };
    double base = 0.0, left = 0.0, right = 0.0;
    for (int j = 0; j < static_cast<int>(q.nodes.size()); ++j) {
      base += q.weights[j] * f(q.nodes[j]);
      left += q.weights[j] * f(g->multiply(t, q.nodes[j]));
      right += q.weights[j] * f(g->multiply(q.nodes[j], t));
    }
    CHECK(std::abs(left - base) <= std::max(q.declared_tol, 1e-10));
    CHECK(std::abs(right - base) <= std::max(q.declared_tol, 1e-10));
  }
}

TEST_CASE("group invariants survive long products") {
  auto g = su2();
  std::mt19937_64 rng(43);
  GroupPoint acc = g->identity();
  for (int k = 0; k < 200; ++k) {
    acc = g->multiply(acc, g->random_point(rng));
    CHECK(g->unitarity_residual(acc) <= 1e-12);
    CHECK(g->determinant_residual(acc) <= 1e-10);
  }
}

TEST_CASE("family names parse case-insensitively") {
  CHECK(family_from_string("su2") == GroupFamily::SU2);
  CHECK(family_from_string("SU2") == GroupFamily::SU2);
  CHECK(family_from_string("U1") == GroupFamily::U1);
  CHECK_THROWS((void)family_from_string("sp4"));
}
