// Scaled monomial bases on cells (3D) and faces (2D, in the face frame), orthonormalized
// by a repeated Cholesky factorization of the Gram matrix, and L2-orthogonal projectors.
//
// Monomials are ordered by total degree, so the first dim P^k members of an orthonormal
// basis of degree K >= k span P^k. Vector-valued coefficients are stored component-major:
// index c*n + i is component c of basis function i.
//
#ifndef WEBERLAB_POLYBASIS_HPP
#define WEBERLAB_POLYBASIS_HPP

#include <weberlab/mesh.hpp>
#include <weberlab/quadrature.hpp>

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace weberlab {

// dim P^k in d variables; 0 for k < 0
std::size_t poly_dim(int d, int k);

class PolyBasis {
public:
  // Cell basis: variables (x - x_T)/h_T.
  static PolyBasis cell(const PolyMesh& mesh, std::size_t t, int degree, int quad_degree = -1);
  // Face basis: variables ((x - x_F).tau1, (x - x_F).tau2)/h_F.
  static PolyBasis face(const PolyMesh& mesh, std::size_t f, int degree, int quad_degree = -1);

  int vars() const { return vars_; }
  int degree() const { return degree_; }
  std::size_t dim() const { return exponents_.size(); }
  std::size_t dim(int k) const { return poly_dim(vars_, std::min(k, degree_)); }
  const Point3& center() const { return center_; }
  double scale() const { return scale_; }
  // rows of the 2x3 frame for faces (tau1, tau2), identity rows for cells
  const Eigen::Matrix3d& frame() const { return frame_; }
  const std::vector<std::array<int, 3>>& exponents() const { return exponents_; }
  // orthonormal basis function i = sum_j coeffs(i, j) * monomial j
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  double raw_gram_condition() const { return raw_condition_; }
  bool ill_conditioned() const { return raw_condition_ > 1e14; }

  // Local coordinates (vars x npts) of physical points.
  Eigen::MatrixXd local_coordinates(const Eigen::Matrix3Xd& pts) const;
  // Values (npts x dim) of the orthonormal functions.
  Eigen::MatrixXd values(const Eigen::Matrix3Xd& pts) const;
  // Derivatives with respect to the physical coordinates: for cells d/dx, d/dy, d/dz;
  // for faces the in-plane derivatives along tau1, tau2 (third entry zero).
  std::array<Eigen::MatrixXd, 3> gradients(const Eigen::Matrix3Xd& pts) const;

private:
  int vars_ = 3;
  int degree_ = 0;
  Point3 center_ = Point3::Zero();
  double scale_ = 1.;
  Eigen::Matrix3d frame_ = Eigen::Matrix3d::Identity();
  std::vector<std::array<int, 3>> exponents_;
  Eigen::MatrixXd coeffs_;
  double raw_condition_ = 1.;

  Eigen::MatrixXd monomials(const Eigen::MatrixXd& xi) const;
  void orthonormalize(const QuadRule& rule);
};

// Gram matrix sum_q w_q phi_i phi_j for values (npts x n).
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& values, const Eigen::VectorXd& weights);

// L2 projector onto the first `dim` functions of a basis, with its own quadrature rule.
class Projector {
public:
  Projector(const PolyBasis& basis, QuadRule rule, std::size_t dim);

  const QuadRule& rule() const { return rule_; }
  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  // Coefficients of the projection of samples f (one per quadrature node).
  Eigen::VectorXd project(const Eigen::VectorXd& samples) const;
  // Component-major coefficients for vector samples (components x npts).
  Eigen::VectorXd project_vector(const Eigen::MatrixXd& samples) const;
  Eigen::VectorXd project(const std::function<double(const Point3&)>& f) const;
  Eigen::VectorXd project_vector(const std::function<Eigen::VectorXd(const Point3&)>& f, int components) const;

  // Values at the rule nodes of a scalar / vector element given by coefficients.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coeffs) const;
  Eigen::MatrixXd evaluate_vector(const Eigen::VectorXd& coeffs, int components) const;

private:
  QuadRule rule_;
  std::size_t dim_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> gram_llt_;
};

//------------------------------------------------------------------------------
// Traces of cell polynomials on faces
//------------------------------------------------------------------------------

struct FaceTrace {
  Eigen::VectorXd scalar;       // p|F, or empty for vector input
  Eigen::MatrixXd rotated;      // 2 x npts: v|F x n_F in (tau1, tau2) coordinates
  Eigen::MatrixXd tangential;   // 2 x npts: n_F x (v|F x n_F) in (tau1, tau2) coordinates
  Eigen::VectorXd normal;       // v|F . n_F
};

// Vector values (3 x npts) of a component-major coefficient vector over the first n functions.
Eigen::MatrixXd evaluate_vector_field(const Eigen::MatrixXd& values, const Eigen::VectorXd& coeffs);

// Evaluates the traces at the given face nodes of a cell polynomial (scalar if coeffs has at most
// basis.dim() entries and `vector` is false, else a component-major vector field).
FaceTrace trace_evaluate(const PolyMesh& mesh, std::size_t t, std::size_t f, const PolyBasis& cell_basis,
                         const Eigen::VectorXd& coeffs, bool vector, const Eigen::Matrix3Xd& face_pts);

}  // namespace weberlab

#endif
