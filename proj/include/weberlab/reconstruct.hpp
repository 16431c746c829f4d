// Local rotational and divergence reconstructions on the hybrid space.
//
//   (C_T v, q)_T = (v_T, Curl q)_T - sum_F eps_TF (v_{F,t}, n_F x (q x n_F))_F   q in P^m(T)^3
//   (D_T v, q)_T = -(eta_T v_T, Grad q)_T + sum_F eps_TF ([eta v]_{F,n}, q)_F     q in P^p(T)
//
// Matrices act on the local DOF ordering of HybridLayout::local_dofs and return orthonormal
// cell-basis coefficients (component-major for C_T).
//
#ifndef WEBERLAB_RECONSTRUCT_HPP
#define WEBERLAB_RECONSTRUCT_HPP

#include <weberlab/hybridspace.hpp>

#include <Eigen/Dense>

#include <vector>

namespace weberlab {

struct ReconstructionOperator {
  enum class Kind { rotational, divergence };
  Kind kind = Kind::rotational;
  std::size_t cell = 0;
  int degree = 0;
  Eigen::MatrixXd matrix;  // target coefficients x local DOFs
  Eigen::MatrixXd mass;    // Gram of the target basis
  Eigen::MatrixXd rhs;     // right-hand sides of the defining relation, mass * matrix
};

struct CellReconstructions {
  ReconstructionOperator C, D;
};

// Both operators on one cell, sharing one factorization of the cell mass matrix.
CellReconstructions build_reconstructions(const HybridLayout& layout, std::size_t t, int m, int p);
ReconstructionOperator build_CT(const HybridLayout& layout, std::size_t t, int m);
ReconstructionOperator build_DT(const HybridLayout& layout, std::size_t t, int p);
std::vector<CellReconstructions> build_reconstructions(const HybridLayout& layout, int m, int p);

// Local DOF values of a full-length vector.
Eigen::VectorXd local_values(const std::vector<std::size_t>& dofs, const Eigen::VectorXd& full);

struct BoundednessReport {
  int m = 0, p = 0;
  double c_C = 0., c_D = 0.;                  // max over cells of the local constants
  double c_C_global = -1., c_D_global = -1.;  // global dense values (-1 when above the size cap)
  double reverse_C = 0., reverse_D = 0.;      // local constants of the reverse bounds (max over cells)
  double max_kernel_violation = 0.;
  std::vector<std::size_t> failing_cells;     // left form nonzero on the right-form kernel
  bool ok() const { return failing_cells.empty(); }
};

// Constants c with sum_T (||C_T v||^2 + s_Curl,T) <= c_C^2 |v|^2_Curl,h (and the Div analogue), as
// square roots of generalized eigenvalues on the quotient by the right-form kernel.
BoundednessReport boundedness_constants(const HybridLayout& layout, int m, int p, std::size_t global_cap = 1500);

struct AdjointCheck {
  double lhs = 0.;        // (C_h v, z) - (v_h, Curl z)
  double remainder = 0.;  // computable remainder term
  double mismatch = 0.;   // |lhs - remainder|
};

// Discrete integration by parts for v in the tangential-boundary space and a smooth field z.
AdjointCheck adjoint_consistency(const HybridLayout& layout, int m, const Eigen::VectorXd& full, const VectorField& z,
                                 const VectorField& curl_z, int quad_degree);

}  // namespace weberlab

#endif
