// Direct-quadrature evaluation of the reconstruction defining relations and of cell projections,
// written independently of the library assembly.
#ifndef WEBERLAB_TEST_DIRECT_HPP
#define WEBERLAB_TEST_DIRECT_HPP

#include <weberlab/reconstruct.hpp>

#include <functional>

namespace oracle {

struct DirectRhs {
  Eigen::VectorXd c, d;    // against the first 3 n(m) / n(p) basis functions
  Eigen::VectorXd cl, dl;  // left sides (C v, q), (D v, q)
};

DirectRhs direct_relations(const weberlab::HybridLayout& L, std::size_t t, int m, int p, const Eigen::VectorXd& v,
                           const weberlab::CellReconstructions& r);

// pi^k_T of cell samples of an analytic field, via an independent rule
Eigen::VectorXd project_cell(const weberlab::PolyMesh& mesh, std::size_t t, int K, int k, int qd,
                             const std::function<Eigen::VectorXd(const weberlab::Point3&)>& f, int comps);

}  // namespace oracle

#endif
