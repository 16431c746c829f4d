// Quadrature rules on polygonal faces and star-shaped polyhedral cells.
//
// Cells are split into sub-tetrahedra (x_T, x_F, v_i, v_{i+1}); faces are fanned from x_F.
// Each simplex carries a collapsed-coordinate Gauss-Jacobi product rule, so all weights are
// positive and the union is exact to the requested degree.
//
#ifndef WEBERLAB_QUADRATURE_HPP
#define WEBERLAB_QUADRATURE_HPP

#include <weberlab/mesh.hpp>

#include <Eigen/Dense>

namespace weberlab {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct QuadRule {
  Eigen::Matrix3Xd points;  // physical coordinates
  Eigen::VectorXd weights;
  int degree = 0;

  Eigen::Index size() const { return weights.size(); }
};

// Gauss-Jacobi rule on [0,1] for the weight (1-s)^alpha, n points.
void gauss_jacobi01(int n, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

// Reference rules: triangle (0,0),(1,0),(0,1) and tetrahedron (0,0,0),e1,e2,e3.
const QuadRule& reference_triangle_rule(int degree);
const QuadRule& reference_tetrahedron_rule(int degree);

QuadRule triangle_rule(const Point3& a, const Point3& b, const Point3& c, int degree);
QuadRule tetrahedron_rule(const Point3& a, const Point3& b, const Point3& c, const Point3& d, int degree);

QuadRule cell_rule(const PolyMesh& mesh, std::size_t cell, int degree);
QuadRule face_rule(const PolyMesh& mesh, std::size_t face, int degree);

}  // namespace weberlab

#endif
