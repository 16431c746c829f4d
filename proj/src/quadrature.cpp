// Collapsed-coordinate product rules on simplices and their assembly on polytopes.

#include <weberlab/quadrature.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace weberlab {

void gauss_jacobi01(int n, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw QuadratureError("Gauss-Jacobi rule needs at least one point");
  // Golub-Welsch on [-1,1] with weight (1-x)^alpha, beta = 0
  const double a = alpha, b = 0.;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double s = 2. * k + a + b;
    J(k, k) = (k == 0) ? (b - a) / (a + b + 2.) : (b * b - a * a) / (s * (s + 2.));
    if (k + 1 < n) {
      double m = k + 1;
      double t = 2. * m + a + b;
      double beta = 4. * m * (m + a) * (m + b) * (m + a + b) / (t * t * (t + 1.) * (t - 1.));
      J(k, k + 1) = J(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2., a + b + 1.) * std::tgamma(a + 1.) * std::tgamma(b + 1.) / std::tgamma(a + b + 2.);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = 0.5 * (es.eigenvalues()[k] + 1.);
    double v0 = es.eigenvectors()(0, k);
    weights[k] = mu0 * v0 * v0 * std::pow(2., -(a + 1.));
  }
}

namespace {

int points_for(int degree) { return std::max(1, (degree + 2) / 2); }

QuadRule make_reference_triangle(int degree) {
  const int n = points_for(degree);
  Eigen::VectorXd s, ws, t, wt;
  gauss_jacobi01(n, 1, s, ws);
  gauss_jacobi01(n, 0, t, wt);
  QuadRule r;
  r.degree = degree;
  r.points.resize(3, n * n);
  r.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j, ++q) {
      r.points.col(q) << s[i], t[j] * (1. - s[i]), 0.;
      r.weights[q] = ws[i] * wt[j];
    }
  return r;
}

QuadRule make_reference_tetrahedron(int degree) {
  const int n = points_for(degree);
  Eigen::VectorXd s, ws, t, wt, u, wu;
  gauss_jacobi01(n, 2, s, ws);
  gauss_jacobi01(n, 1, t, wt);
  gauss_jacobi01(n, 0, u, wu);
  QuadRule r;
  r.degree = degree;
  r.points.resize(3, n * n * n);
  r.weights.resize(n * n * n);
  int q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++q) {
        r.points.col(q) << s[i], t[j] * (1. - s[i]), u[k] * (1. - s[i]) * (1. - t[j]);
        r.weights[q] = ws[i] * wt[j] * wu[k];
      }
  return r;
}

template <class Make>
const QuadRule& cached(std::map<int, std::unique_ptr<QuadRule>>& cache, std::mutex& mtx, int degree, Make make) {
  if (degree < 0) throw QuadratureError("quadrature degree must be non-negative");
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[degree];
  if (!slot) slot = std::make_unique<QuadRule>(make(degree));
  return *slot;
}

void append(QuadRule& out, const QuadRule& part) {
  const Eigen::Index n0 = out.size();
  out.points.conservativeResize(3, n0 + part.size());
  out.weights.conservativeResize(n0 + part.size());
  out.points.rightCols(part.size()) = part.points;
  out.weights.tail(part.size()) = part.weights;
}

}  // namespace

const QuadRule& reference_triangle_rule(int degree) {
  static std::map<int, std::unique_ptr<QuadRule>> cache;
  static std::mutex mtx;
  return cached(cache, mtx, degree, make_reference_triangle);
}

const QuadRule& reference_tetrahedron_rule(int degree) {
  static std::map<int, std::unique_ptr<QuadRule>> cache;
  static std::mutex mtx;
  return cached(cache, mtx, degree, make_reference_tetrahedron);
}

QuadRule triangle_rule(const Point3& a, const Point3& b, const Point3& c, int degree) {
  const QuadRule& ref = reference_triangle_rule(degree);
  Eigen::Matrix3d B;
  B << b - a, c - a, Point3::Zero();
  const double jac = (b - a).cross(c - a).norm();
  QuadRule r;
  r.degree = degree;
  r.points = (B * ref.points).colwise() + a;
  r.weights = jac * ref.weights;
  return r;
}

QuadRule tetrahedron_rule(const Point3& a, const Point3& b, const Point3& c, const Point3& d, int degree) {
  const QuadRule& ref = reference_tetrahedron_rule(degree);
  Eigen::Matrix3d B;
  B << b - a, c - a, d - a;
  QuadRule r;
  r.degree = degree;
  r.points = (B * ref.points).colwise() + a;
  r.weights = std::abs(B.determinant()) * ref.weights;
  return r;
}

QuadRule cell_rule(const PolyMesh& mesh, std::size_t cell, int degree) {
  const auto& T = mesh.cells.at(cell);
  QuadRule out;
  out.degree = degree;
  out.points.resize(3, 0);
  out.weights.resize(0);
  for (std::size_t i = 0; i < T.faces.size(); ++i) {
    const auto& F = mesh.faces[T.faces[i]];
    const Point3 n = double(T.orientations[i]) * F.normal;
    const std::size_t nv = F.vertices.size();
    for (std::size_t k = 0; k < nv; ++k) {
      const Point3& a = mesh.vertices[F.vertices[k]];
      const Point3& b = mesh.vertices[F.vertices[(k + 1) % nv]];
      // signed volume w.r.t. the outward normal; fan triangles follow the face loop
      Point3 tri = (a - F.center).cross(b - F.center);
      double sign = tri.dot(n) >= 0. ? 1. : -1.;
      double vol = sign * (F.center - T.center).dot(tri) / 6.;
      if (!(vol > 1e-14 * std::pow(T.diameter, 3)))
        throw QuadratureError("cell " + std::to_string(cell) + " is not star-shaped with respect to its star point "
                              "(non-positive sub-tetrahedron on face " + std::to_string(F.id) + ")");
      append(out, tetrahedron_rule(T.center, F.center, a, b, degree));
    }
  }
  return out;
}

QuadRule face_rule(const PolyMesh& mesh, std::size_t face, int degree) {
  const auto& F = mesh.faces.at(face);
  QuadRule out;
  out.degree = degree;
  out.points.resize(3, 0);
  out.weights.resize(0);
  const std::size_t nv = F.vertices.size();
  for (std::size_t k = 0; k < nv; ++k) {
    const Point3& a = mesh.vertices[F.vertices[k]];
    const Point3& b = mesh.vertices[F.vertices[(k + 1) % nv]];
    if ((a - F.center).cross(b - F.center).norm() / 2. <= 1e-14 * F.diameter * F.diameter)
      throw QuadratureError("face " + std::to_string(face) + " has a degenerate fan triangle");
    append(out, triangle_rule(F.center, a, b, degree));
  }
  return out;
}

}  // namespace weberlab
