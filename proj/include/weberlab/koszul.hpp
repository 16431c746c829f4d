// Polynomial subspace decompositions on cells and faces, and the inverse differential maps.
//
// Cell, degree l (parent space P^l(T)^3, orthonormal component-major coordinates):
//   G   = Grad P^{l+1}(T)                R   = Curl P^{l+1}(T)^3
//   Gc  = P^{l-1}(T)^3 x (x - x_T)       Rc  = P^{l-1}(T) (x - x_T)
// Face, degree l (parent space P^l(F)^2 in the (tau1, tau2) frame):
//   R_F = rot_F P^{l+1}(F), rot_F w = (d2 w, -d1 w)
//   Rc_F = P^{l-1}(F) (x - x_F)
//
// Differential operator matrices are L2 pairings of derivative samples against the target
// basis at quadrature nodes, solved with the target Gram matrix.
//
#ifndef WEBERLAB_KOSZUL_HPP
#define WEBERLAB_KOSZUL_HPP

#include <weberlab/polybasis.hpp>

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace weberlab {

class KoszulError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Orthonormal basis of the column range, threshold relative to the largest singular value.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& a, double rel_tol = 1e-10);
// Singular values, descending.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& a);
double condition_number(const Eigen::MatrixXd& a);

// Cell polynomial data of maximal degree K with an exact rule of degree 2K.
class CellPolyContext {
public:
  CellPolyContext(const PolyMesh& mesh, std::size_t t, int max_degree);

  const PolyMesh& mesh() const { return *mesh_; }
  std::size_t cell() const { return t_; }
  int max_degree() const { return K_; }
  const PolyBasis& basis() const { return basis_; }
  const QuadRule& rule() const { return rule_; }
  std::size_t n(int k) const { return basis_.dim(k); }  // dim P^k(T), 0 if k < 0
  const Eigen::MatrixXd& values() const { return phi_; }
  const std::array<Eigen::MatrixXd, 3>& gradients() const { return dphi_; }

  // Gram of the first n(k) functions on the rule.
  Eigen::MatrixXd mass(int k) const;
  // L2 projection onto P^to of scalar samples (npts x ncols).
  Eigen::MatrixXd project_samples(const Eigen::MatrixXd& samples, int to) const;
  // L2 projection onto P^to(T)^3 of three sample blocks.
  Eigen::MatrixXd project_vector_samples(const std::array<Eigen::MatrixXd, 3>& samples, int to) const;

  Eigen::MatrixXd grad(int from, int to) const;           // P^from -> P^to^3
  Eigen::MatrixXd curl(int from, int to) const;           // P^from^3 -> P^to^3
  Eigen::MatrixXd div(int from, int to) const;            // P^from^3 -> P^to
  Eigen::MatrixXd koszul_cross(int from, int to) const;   // q -> q x (x - x_T)
  Eigen::MatrixXd koszul_scalar(int from, int to) const;  // r -> r (x - x_T)
  // Embedding of P^from^3 into P^to^3 coordinates (to >= from).
  Eigen::MatrixXd vector_embedding(int from, int to) const;

private:
  const PolyMesh* mesh_;
  std::size_t t_;
  int K_;
  PolyBasis basis_;
  QuadRule rule_;
  Eigen::MatrixXd phi_;
  std::array<Eigen::MatrixXd, 3> dphi_;
  Eigen::Matrix3Xd rel_;
};

// Face polynomial data of maximal degree K with an exact rule of degree 2K.
class FacePolyContext {
public:
  FacePolyContext(const PolyMesh& mesh, std::size_t f, int max_degree);

  std::size_t face() const { return f_; }
  int max_degree() const { return K_; }
  const PolyBasis& basis() const { return basis_; }
  const QuadRule& rule() const { return rule_; }
  std::size_t n(int k) const { return basis_.dim(k); }
  const Eigen::MatrixXd& values() const { return psi_; }

  Eigen::MatrixXd mass(int k) const;
  Eigen::MatrixXd project_samples(const Eigen::MatrixXd& samples, int to) const;

  Eigen::MatrixXd rot(int from, int to) const;     // P^from(F) -> P^to(F)^2
  Eigen::MatrixXd koszul(int from, int to) const;  // r -> r (x - x_F) in frame coordinates
  Eigen::MatrixXd vector_embedding(int from, int to) const;

private:
  std::size_t f_;
  int K_;
  PolyBasis basis_;
  QuadRule rule_;
  Eigen::MatrixXd psi_;
  std::array<Eigen::MatrixXd, 3> dpsi_;
  Eigen::Matrix2Xd rel_;
};

// Projections onto P^to(F) of traces of cell polynomials of degree <= from.
struct TraceMatrices {
  Eigen::MatrixXd scalar;      // n_F(to) x n_T(from)
  Eigen::MatrixXd rotated;     // 2 n_F(to) x 3 n_T(from): v x n_F
  Eigen::MatrixXd tangential;  // 2 n_F(to) x 3 n_T(from): n_F x (v x n_F)
  Eigen::MatrixXd normal;      // n_F(to) x 3 n_T(from): v . n_F
};

TraceMatrices trace_matrices(const CellPolyContext& cell, const FacePolyContext& face, int from, int to);

struct CellSubspaces {
  int degree = 0;
  Eigen::MatrixXd G, Gc, R, Rc;  // columns in P^l(T)^3 coordinates
  double cond_G_Gc = 1.;
  double cond_R_Rc = 1.;
};

struct FaceSubspaces {
  int degree = 0;
  Eigen::MatrixXd RF, RcF;  // columns in P^l(F)^2 coordinates
  double cond = 1.;
};

// Closed-form dimensions
struct KoszulDims {
  std::size_t G, Gc, R, Rc, RF, RcF;
};
KoszulDims koszul_dimensions(int degree);

// ctx.max_degree() must be at least degree + 1.
CellSubspaces build_cell_subspaces(const CellPolyContext& ctx, int degree);
FaceSubspaces build_face_subspaces(const FacePolyContext& ctx, int degree);
// P^{k-1}(F)(x - x_F) inside P^l(F)^2, for 0 <= k <= l
Eigen::MatrixXd face_koszul_complement(const FacePolyContext& ctx, int k, int degree);

// Curl^{-1}: R^{l-1}(T) -> Gc^l(T). c holds P^{l-1}(T)^3 coordinates; result in P^l(T)^3.
Eigen::VectorXd curl_inverse(const CellPolyContext& ctx, int degree, const Eigen::VectorXd& c);
// Div^{-1}: P^{l-1}(T) -> Rc^l(T). d holds P^{l-1}(T) coordinates; result in P^l(T)^3.
Eigen::VectorXd div_inverse(const CellPolyContext& ctx, int degree, const Eigen::VectorXd& d);
// L2 operator norms of the inverse maps (0 for degree 0, where both domains are trivial).
double curl_inverse_norm(const CellPolyContext& ctx, int degree);
double div_inverse_norm(const CellPolyContext& ctx, int degree);

struct TraceIdentityReport {
  std::size_t face = 0;
  std::size_t rotated_rank = 0;   // rank of tangential traces of G
  std::size_t rf_dim = 0;
  double containment = 0.;        // max of the two relative containment residuals
  std::size_t normal_rank = 0;    // rank of normal traces of R
  std::size_t face_dim = 0;       // dim P^l(F)
  bool ok = false;
};

std::vector<TraceIdentityReport> verify_trace_identities(const CellPolyContext& ctx, int degree);

}  // namespace weberlab

#endif
