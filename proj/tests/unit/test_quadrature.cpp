#include <doctest.h>

#include "oracles.hpp"

#include <weberlab/quadrature.hpp>

#include <cmath>
#include <random>

using namespace weberlab;
using oracle::Rational;

namespace {

double monomial_sum(const QuadRule& r, int a, int b, int c, const Point3& x0 = Point3::Zero()) {
  double s = 0.;
  for (Eigen::Index q = 0; q < r.size(); ++q) {
    Point3 p = r.points.col(q) - x0;
    s += r.weights[q] * std::pow(p.x(), a) * std::pow(p.y(), b) * std::pow(p.z(), c);
  }
  return s;
}

Rational grid_coord(double x, int n) { return Rational(int(std::lround(x * n)), n); }

}  // namespace

TEST_CASE("Gauss-Jacobi rules integrate weighted monomials exactly") {
  for (int alpha : {0, 1, 2})
    for (int n = 1; n <= 6; ++n) {
      Eigen::VectorXd x, w;
      gauss_jacobi01(n, alpha, x, w);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        // int_0^1 s^k (1-s)^alpha ds = k! alpha! / (k+alpha+1)!
        double exact = oracle::to_double(oracle::factorial(k) * oracle::factorial(alpha) / oracle::factorial(k + alpha + 1));
        double s = 0.;
        for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
        CHECK(std::abs(s - exact) <= 1e-14 * exact);
      }
      CHECK((w.array() > 0.).all());
    }
}

TEST_CASE("unit cube cell rule") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  auto r0 = cell_rule(m, 0, 0);
  CHECK(std::abs(r0.weights.sum() - 1.) <= 1e-13);
  auto r3 = cell_rule(m, 0, 3);
  CHECK(std::abs(monomial_sum(r3, 2, 1, 0) - 1. / 6.) <= 1e-13);
  CHECK((r3.weights.array() > 0.).all());
}

TEST_CASE("cell rules match exact rational moments over the sub-tetrahedra") {
  const int n = 3;
  auto m = gen_structured(DomainKind::solid_cube, n);
  std::mt19937 gen(7);
  for (int trial = 0; trial < 3; ++trial) {
    std::size_t t = std::uniform_int_distribution<std::size_t>(0, m.n_cells() - 1)(gen);
    const auto& T = m.cells[t];
    const int d = 5;
    auto r = cell_rule(m, t, d);
    // exact: vertex centroid of a grid hexahedron has denominator 2n
    oracle::RPoint xt{Rational(int(std::lround(T.center.x() * 2 * n)), 2 * n),
                      Rational(int(std::lround(T.center.y() * 2 * n)), 2 * n),
                      Rational(int(std::lround(T.center.z() * 2 * n)), 2 * n)};
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b)
        for (int c = 0; a + b + c <= d; ++c) {
          Rational exact = 0;
          for (std::size_t i = 0; i < T.faces.size(); ++i) {
            const auto& F = m.faces[T.faces[i]];
            oracle::RPoint xf{0, 0, 0};
            for (std::size_t v : F.vertices)
              for (int k = 0; k < 3; ++k) xf[k] += grid_coord(m.vertices[v][k], n) / Rational(int(F.vertices.size()));
            for (std::size_t k = 0; k < F.vertices.size(); ++k) {
              const auto& pa = m.vertices[F.vertices[k]];
              const auto& pb = m.vertices[F.vertices[(k + 1) % F.vertices.size()]];
              oracle::RPoint va{grid_coord(pa.x(), n), grid_coord(pa.y(), n), grid_coord(pa.z(), n)};
              oracle::RPoint vb{grid_coord(pb.x(), n), grid_coord(pb.y(), n), grid_coord(pb.z(), n)};
              exact += oracle::tet_monomial_integral({xt, xf, va, vb}, {a, b, c});
            }
          }
          double ex = oracle::to_double(exact);
          double q = monomial_sum(r, a, b, c);
          CHECK(std::abs(q - ex) <= 1e-12 * std::max(std::abs(ex), 1e-3 * oracle::to_double(1 / Rational(n * n * n))));
        }
  }
}

TEST_CASE("face rules on squares and a pentagon") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  const auto& F = m.faces[0];
  auto r0 = face_rule(m, 0, 0);
  CHECK(std::abs(r0.weights.sum() - 1.) <= 1e-13);
  auto r2 = face_rule(m, 0, 2);
  double s = 0.;
  for (Eigen::Index q = 0; q < r2.size(); ++q) {
    double xi = (r2.points.col(q) - F.center).dot(F.tangent1);
    s += r2.weights[q] * xi * xi;
  }
  CHECK(std::abs(s - 1. / 12.) <= 1e-13);

  // pentagon in the plane z = 0: a single prism-like cell is not needed, build the face directly
  MeshInput in;
  std::vector<std::array<Rational, 2>> poly{{Rational(0), Rational(0)}, {Rational(2), Rational(0)},
                                            {Rational(3), Rational(1)}, {Rational(1), Rational(2)},
                                            {Rational(-1, 2), Rational(1)}};
  for (const auto& p : poly) in.vertices.emplace_back(oracle::to_double(p[0]), oracle::to_double(p[1]), 0.);
  in.vertices.emplace_back(1., 1., 1.);  // apex
  in.faces.push_back({{0, 1, 2, 3, 4}, {0}});
  for (std::size_t k = 0; k < 5; ++k) in.faces.push_back({{k, (k + 1) % 5, 5}, {0}});
  in.cells.push_back({{0, 1, 2, 3, 4, 5}, std::nullopt});
  auto pm = build_mesh(in);
  const int d = 6;
  auto r = face_rule(pm, 0, d);
  for (int a = 0; a <= d; ++a)
    for (int b = 0; a + b <= d; ++b) {
      double ex = oracle::to_double(oracle::polygon_monomial_integral(poly, a, b));
      double q = monomial_sum(r, a, b, 0);
      CHECK(std::abs(q - ex) <= 1e-12 * std::max(1., std::abs(ex)));
    }
  // the pyramid volume: base area 5.5 (shoelace), height 1
  auto rc = cell_rule(pm, 0, 0);
  CHECK(std::abs(rc.weights.sum() - oracle::to_double(oracle::polygon_monomial_integral(poly, 0, 0)) / 3.) <= 1e-13);
}

TEST_CASE("cell rule rejects a star point that sees a face from behind") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  m.cells[0].center = Point3(1.2, 0.5, 0.5);
  CHECK_THROWS_WITH_AS(cell_rule(m, 0, 2), doctest::Contains("star-shaped"), QuadratureError);
}
