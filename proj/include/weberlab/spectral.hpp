// Global quadratic forms on the free hybrid DOFs and the generalized eigenvalue problems that
// realize the discrete Weber constants.
//
//   M = ||eta^{1/2} v_h||^2
//   A = eta_min^{-1} |v|_Div^2 + eta_max |v|_Curl^2 + eta_min^{-1} sum_j |flux_j(v)|^2
//
// Flux functionals are boundary components Gamma_j (tangential flavor) or cutting surfaces
// Sigma_i (normal flavor). c_W = sqrt(lambda_max) of M x = lambda A x.
//
#ifndef WEBERLAB_SPECTRAL_HPP
#define WEBERLAB_SPECTRAL_HPP

#include <weberlab/hybridspace.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace weberlab {

class SpectralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Problem size above a configured cap.
class BudgetError : public SpectralError {
public:
  using SpectralError::SpectralError;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct QuadraticFormPair {
  BcFlavor flavor = BcFlavor::tangential;
  bool include_flux = false;
  std::size_t n_free = 0;
  double eta_min = 1., eta_max = 1.;
  SparseMatrix A_base;   // without flux terms
  SparseMatrix M;
  Eigen::MatrixXd flux;  // n_free x r, columns carry the eta_min^{-1/2} weight (r = 0 without flux)
  SparseMatrix X;        // ||.||_X^2 = M + eta_min^{-1}|.|_Div^2 + eta_max |.|_Curl^2

  SparseMatrix A() const;  // A_base + flux flux^T
  Eigen::MatrixXd dense_A() const;
};

// Layout flavor must fix boundary traces; fluxes through Gamma_j unless the flavor is normal.
QuadraticFormPair assemble_forms(const HybridLayout& layout, bool include_flux);

struct EigenOptions {
  enum class Method { automatic, dense, iterative };
  Method method = Method::automatic;
  std::size_t dense_limit = 4000;
  double tol = 1e-11;       // Ritz residual relative to the Ritz value
  int max_iterations = 800;
  std::uint64_t seed = 1;
};

struct WeberResult {
  double lambda_max = 0.;
  double c_w = 0.;
  double lambda_min_A = 0.;
  double residual = 0.;   // ||M x - lambda A x|| / ||A x||
  double rayleigh = 0.;   // x^T M x / x^T A x
  int iterations = 0;
  std::string method;
  Eigen::VectorXd eigenvector;  // free DOFs
};

// Throws SpectralError when A is not positive definite.
WeberResult weber_constant(const QuadraticFormPair& pair, const EigenOptions& opt = {});
double lambda_min_A(const QuadraticFormPair& pair, const EigenOptions& opt = {});

// Largest eigenvalue of the pencil (left, right) with right symmetric positive definite, through
// Lanczos on L^{-1} P left P^T L^{-T} (right = P^T L L^T P). Exposed for testing.
struct LanczosResult {
  double value = 0.;
  Eigen::VectorXd vector;
  int iterations = 0;
  bool converged = false;
};
LanczosResult lanczos_largest(const SparseMatrix& left, const SparseMatrix& right, const EigenOptions& opt);

//------------------------------------------------------------------------------
// Studies
//------------------------------------------------------------------------------

struct WeberRow {
  int level = 0;
  int n = 0;  // cells per direction
  double h = 0.;
  std::size_t dofs = 0;
  int degree = 0;
  std::string policy;
  BcFlavor flavor = BcFlavor::tangential;
  bool include_flux = true;
  double lambda_max = 0., c_w = 0., lambda_min_A = 0., residual = 0.;
  double wall_ms = 0.;
  std::string method;
  std::string mesh_hash;
};

struct StudyConfig {
  DomainKind kind = DomainKind::solid_cube;
  int degree = 0;
  FaceSpacePolicy policy;
  BcFlavor flavor = BcFlavor::tangential;
  bool include_flux = true;
  int levels = 3;
  int base_n = 0;  // 0: 2 for solid_cube, 3 otherwise; level k uses base_n * 2^k
  std::optional<EtaSpec> eta;  // a checkerboard without a block size is anchored to the coarsest level's cells
  std::size_t dof_cap = 40000;
  EigenOptions eigen;
};

struct StudyResult {
  std::vector<WeberRow> rows;
  bool truncated = false;  // a level exceeded the DOF cap
  std::string notice;
  std::optional<EtaSpec> eta;  // the coefficient actually used on every level
};

StudyResult refinement_study(const StudyConfig& cfg);
// Weber estimate on a given mesh, one row.
WeberRow weber_row(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, BcFlavor flavor, bool include_flux,
                   const EigenOptions& opt, int level = 0);

struct DegeneracyReport {
  std::size_t n_free = 0;
  std::size_t flux_rank = 0;
  double lambda_min_with_flux = 0.;     // smallest eigenvalue of A (coefficient space)
  double lambda_min_without_flux = 0.;
  // Weber pencil mu: A with face DOFs condensed out, against M on the cell DOFs (mu = 1/lambda)
  double mu_min_with_flux = 0.;
  double mu_min_without_flux = 0.;
  double mu_median_without_flux = 0.;
  std::size_t near_kernel_dim = 0;  // flux-free pencil eigenvalues below 1e-6 * median
  std::vector<double> smallest_without_flux;  // a few smallest pencil eigenvalues
  std::vector<double> smallest_with_flux;
};

DegeneracyReport degeneracy_probe(const HybridLayout& layout, std::size_t dense_limit = 4000);

//------------------------------------------------------------------------------
// Curl-only variants and norm equivalence
//------------------------------------------------------------------------------

enum class Variant { first, second };  // tangential boundary space / unconstrained boundary

struct VariantResult {
  double constant = 0.;            // sqrt of the extremal eigenvalue (inf if unbounded)
  bool bounded = false;            // mass vanishes on the curl kernel of the constrained space
  std::size_t constraint_rows = 0;
  std::size_t constraint_rank = 0;
  std::size_t n_space = 0;         // dimension of the constrained space
  double constraint_residual = 0.; // |G x| / (|G| |x|) for the extremal vector
  double kernel_violation = 0.;
};

// sup ||eta^{1/2} v||^2 / (eta_max |v|_Curl^2) over cell and tangential DOFs, eta-orthogonal to
// broken gradients of continuous piecewise-linear functions on the face/cell-center fan
// tetrahedralization (vanishing on the boundary for the first variant). constrained = false
// drops the orthogonality.
VariantResult variant_constant(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, Variant variant,
                               bool constrained = true, std::size_t dense_limit = 4000);

struct NormEquivalence {
  double lower = 0.;  // min of ||.||_{X_flavor}^2 / ||.||_X^2
  double upper = 0.;
};
NormEquivalence norm_equivalence(const QuadraticFormPair& pair, const EigenOptions& opt = {});

}  // namespace weberlab

#endif
