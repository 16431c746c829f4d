// Hybrid spaces with cell unknowns v_T in P^l(T)^3, tangential face unknowns v_{F,t} in
// Q_F (R_F in Q_F in P^l(F)^2) and normal face unknowns [eta v]_{F,n} in P^l(F).
//
// Global DOF layout: all cell blocks first (cell id order), then per face (face id order)
// the tangential block followed by the normal block. Boundary-condition flavors fix whole
// face blocks on boundary faces; fixed DOFs are eliminated from the free index set.
//
// Face and cell coordinates refer to orthonormal polynomial bases, so Euclidean products of
// coefficient vectors are L2 products.
//
#ifndef WEBERLAB_HYBRIDSPACE_HPP
#define WEBERLAB_HYBRIDSPACE_HPP

#include <weberlab/koszul.hpp>

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace weberlab {

struct FaceSpacePolicy {
  enum class Kind { minimal, trimmed, full, custom };
  Kind kind = Kind::minimal;
  int trimmed_degree = 0;
  // custom: columns in P^l(F)^2 coordinates built from the face subspaces (testing hook)
  std::function<Eigen::MatrixXd(const FaceSubspaces&)> custom;

  static FaceSpacePolicy minimal() { return {}; }
  static FaceSpacePolicy full() { return {Kind::full, 0, {}}; }
  static FaceSpacePolicy trimmed(int k) { return {Kind::trimmed, k, {}}; }
  static FaceSpacePolicy parse(const std::string& text);  // minimal | full | trimmed:K
  std::string name() const;
};

enum class BcFlavor { none, tangential, normal, both };
std::string to_string(BcFlavor bc);
BcFlavor bc_flavor_from_string(const std::string& name);

class LayoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr int max_supported_degree = 4;

struct HybridLayout {
  const PolyMesh* mesh = nullptr;
  int degree = 0;
  FaceSpacePolicy policy;
  BcFlavor bc = BcFlavor::none;

  std::size_t cell_block = 0;     // 3 dim P^l(T)
  std::size_t normal_block = 0;   // dim P^l(F)
  std::vector<std::size_t> tangential_block;  // dim Q_F per face
  std::vector<Eigen::MatrixXd> face_space;    // orthonormal columns of Q_F in P^l(F)^2
  std::vector<std::size_t> face_offset;
  std::size_t n_total = 0;

  std::vector<char> fixed;
  std::vector<long> full_to_free;  // -1 for fixed DOFs
  std::vector<std::size_t> free_to_full;

  std::size_t cell_offset(std::size_t t) const { return t * cell_block; }
  std::size_t tangential_offset(std::size_t f) const { return face_offset[f]; }
  std::size_t normal_offset(std::size_t f) const { return face_offset[f] + tangential_block[f]; }
  std::size_t n_free() const { return free_to_full.size(); }

  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
  Eigen::VectorXd extend_from_free(const Eigen::VectorXd& free) const;
  // Full indices of the local DOFs of cell t: cell block, then per face tangential + normal.
  std::vector<std::size_t> local_dofs(std::size_t t) const;
};

HybridLayout build_layout(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, BcFlavor bc);

//------------------------------------------------------------------------------
// Reduction
//------------------------------------------------------------------------------

using VectorField = std::function<Eigen::Vector3d(const Point3&)>;
// Single-valued normal flux (eta v).n_F at a point of face f.
using FluxField = std::function<double(const Point3&, std::size_t)>;

struct ReduceOptions {
  int quad_degree = -1;  // default 2l + 2
  std::optional<FluxField> normal_flux;  // default: eta of the cell T+ times v.n_F
};

struct ReducedVector {
  Eigen::VectorXd full;
  bool forced_zero = false;  // fixed DOFs had non-negligible values and were zeroed
  double max_forced = 0.;
};

ReducedVector reduce(const HybridLayout& layout, const VectorField& v, const ReduceOptions& opt = {});

// Local reduction I_T on the local DOF ordering of cell t, with eta_T on every face.
Eigen::VectorXd reduce_local(const HybridLayout& layout, std::size_t t, const VectorField& v, int quad_degree = -1);

//------------------------------------------------------------------------------
// Local forms
//------------------------------------------------------------------------------

struct LocalForms {
  std::size_t cell = 0;
  std::vector<std::size_t> dofs;  // full indices
  Eigen::MatrixXd mass;           // eta_T (v_T, w_T)
  Eigen::MatrixXd curl_vol;       // (Curl v_T, Curl w_T)
  Eigen::MatrixXd div_vol;        // (Div(eta_T v_T), Div(eta_T w_T))
  Eigen::MatrixXd s_curl;
  Eigen::MatrixXd s_div;
  Eigen::MatrixXd jump;           // sum_F h_F^{-1} (v_T x n_F - v_{F,t}, .)_F without projection
  // local positions
  std::size_t cell_dofs = 0;
  std::vector<std::size_t> tangential_pos, normal_pos;  // per local face
};

LocalForms assemble_local_forms(const HybridLayout& layout, std::size_t t);
std::vector<LocalForms> assemble_local_forms(const HybridLayout& layout);

//------------------------------------------------------------------------------
// Norms, fluxes, jump control
//------------------------------------------------------------------------------

struct Seminorms {
  double curl = 0.;  // |v|_{Curl,h}
  double div = 0.;   // |v|_{Div,h}
  double l2 = 0.;    // ||eta^{1/2} v_h||
  double x = 0.;     // ||v||_{X,h}
};

Seminorms seminorms(const HybridLayout& layout, const std::vector<LocalForms>& forms, const Eigen::VectorXd& full);

// Full-length vector u with u.v = sum_{F in set} int_F [eta v]_{F,n}
Eigen::VectorXd flux_functional(const HybridLayout& layout, const std::vector<std::size_t>& faces);

struct FluxValues {
  std::vector<double> gamma;  // j = 1..beta2
  std::vector<double> sigma;  // i = 1..beta1
};

FluxValues flux_functionals(const HybridLayout& layout, const Eigen::VectorXd& full);

// sup of left/right over the quotient by ker(right); infinite when left does not vanish there.
struct FormRatio {
  double sup = 0.;
  double kernel_violation = 0.;  // max |V0^T left V0| / max |left|
  std::size_t kernel_dim = 0;
  bool kernel_ok = true;
};
FormRatio form_ratio(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right, double violation_tol = 1e-9);

struct JumpControl {
  double constant = 0.;          // C_T
  double kernel_violation = 0.;  // relative size of the left form on the right-form kernel
  bool kernel_ok = false;
};

// Smallest C_T with jump <= C_T^2 (||Curl v_T||^2 + s_Curl) on the local cell and tangential DOFs.
JumpControl jump_control_constant(const LocalForms& forms);

}  // namespace weberlab

#endif
