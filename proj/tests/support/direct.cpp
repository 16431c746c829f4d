#include "direct.hpp"

#include <weberlab/polybasis.hpp>
#include <weberlab/quadrature.hpp>

using namespace weberlab;

namespace oracle {

// Right-hand sides of both defining relations evaluated pointwise with an independent rule.
DirectRhs direct_relations(const HybridLayout& L, std::size_t t, int m, int p, const Eigen::VectorXd& v,
                           const CellReconstructions& r) {
  const auto& mesh = *L.mesh;
  const auto& T = mesh.cells[t];
  const int l = L.degree;
  const int K = std::max({l + 1, m, p});
  const int qd = 2 * K + 3;
  PolyBasis b = PolyBasis::cell(mesh, t, K, qd);
  const Eigen::Index nl = Eigen::Index(b.dim(l)), nm = Eigen::Index(b.dim(m)), np = Eigen::Index(b.dim(p));
  const QuadRule rule = cell_rule(mesh, t, qd);
  const Eigen::MatrixXd phi = b.values(rule.points);
  const auto dphi = b.gradients(rule.points);
  const Eigen::VectorXd vT = v.head(Eigen::Index(L.cell_block));
  const Eigen::MatrixXd vv = evaluate_vector_field(phi.leftCols(nl), vT);
  const Eigen::MatrixXd cv = evaluate_vector_field(phi.leftCols(nm), r.C.matrix * v);
  const Eigen::VectorXd dv = phi.leftCols(np) * (r.D.matrix * v);

  DirectRhs out;
  out.c = Eigen::VectorXd::Zero(3 * nm);
  out.cl = out.c;
  out.d = Eigen::VectorXd::Zero(np);
  out.dl = out.d;
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q];
    for (Eigen::Index j = 0; j < nm; ++j) {
      const Eigen::Vector3d g(dphi[0](q, j), dphi[1](q, j), dphi[2](q, j));
      for (int c = 0; c < 3; ++c) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[c] = 1.;
        out.c[c * nm + j] += w * vv.col(q).dot(g.cross(e));  // curl(phi e_c) = grad phi x e_c
        out.cl[c * nm + j] += w * cv(c, q) * phi(q, j);
      }
    }
    for (Eigen::Index j = 0; j < np; ++j) {
      const Eigen::Vector3d g(dphi[0](q, j), dphi[1](q, j), dphi[2](q, j));
      out.d[j] -= w * T.eta * vv.col(q).dot(g);
      out.dl[j] += w * dv[q] * phi(q, j);
    }
  }
  Eigen::Index pos = Eigen::Index(L.cell_block);
  for (std::size_t i = 0; i < T.faces.size(); ++i) {
    const std::size_t f = T.faces[i];
    const auto& F = mesh.faces[f];
    const QuadRule fr = face_rule(mesh, f, qd);
    PolyBasis fb = PolyBasis::face(mesh, f, K, qd);
    const Eigen::Index nf = Eigen::Index(fb.dim(l));
    const Eigen::MatrixXd psi = fb.values(fr.points).leftCols(nf);
    const Eigen::Index nq = Eigen::Index(L.tangential_block[f]);
    const Eigen::VectorXd y = L.face_space[f] * v.segment(pos, nq);
    const Eigen::VectorXd nv = v.segment(pos + nq, Eigen::Index(L.normal_block));
    const Eigen::MatrixXd phif = b.values(fr.points);
    for (Eigen::Index q = 0; q < fr.size(); ++q) {
      const double w = T.orientations[i] * fr.weights[q];
      const Eigen::Vector2d vf(psi.row(q).dot(y.head(nf)), psi.row(q).dot(y.tail(nf)));
      const double nflux = psi.row(q).dot(nv);
      for (Eigen::Index j = 0; j < nm; ++j)
        for (int c = 0; c < 3; ++c) {
          Eigen::Vector3d e = Eigen::Vector3d::Zero();
          e[c] = phif(q, j);
          out.c[c * nm + j] -= w * vf.dot(Eigen::Vector2d(e.dot(F.tangent1), e.dot(F.tangent2)));
        }
      for (Eigen::Index j = 0; j < np; ++j) out.d[j] += w * nflux * phif(q, j);
    }
    pos += nq + Eigen::Index(L.normal_block);
  }
  return out;
}

// pi^k_T of cell samples of an analytic field, via an independent rule
Eigen::VectorXd project_cell(const PolyMesh& mesh, std::size_t t, int K, int k, int qd,
                             const std::function<Eigen::VectorXd(const Point3&)>& f, int comps) {
  PolyBasis b = PolyBasis::cell(mesh, t, K, qd);
  Projector pr(b, cell_rule(mesh, t, qd), b.dim(k));
  return pr.project_vector(f, comps);
}

}  // namespace oracle
