#include <weberlab/reconstruct.hpp>
#include <weberlab/parallel.hpp>

#include <algorithm>
#include <cmath>

namespace weberlab {

namespace {

Eigen::MatrixXd block_diag3(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int c = 0; c < 3; ++c) out.block(c * n, c * n, n, n) = m;
  return out;
}

// Solves G x = b with G the leading n x n block of the factorized Gram (leading blocks of a
// Cholesky factor factorize leading blocks of the matrix).
Eigen::MatrixXd leading_solve(const Eigen::MatrixXd& chol, Eigen::Index n, const Eigen::MatrixXd& b) {
  const auto Lk = chol.topLeftCorner(n, n);
  Eigen::MatrixXd y = Lk.triangularView<Eigen::Lower>().solve(b);
  return Lk.transpose().triangularView<Eigen::Upper>().solve(y);
}

}  // namespace

Eigen::VectorXd local_values(const std::vector<std::size_t>& dofs, const Eigen::VectorXd& full) {
  Eigen::VectorXd v(Eigen::Index(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) v[Eigen::Index(i)] = full[Eigen::Index(dofs[i])];
  return v;
}

CellReconstructions build_reconstructions(const HybridLayout& L, std::size_t t, int m, int p) {
  if (m < 0 || p < 0) throw LayoutError("reconstruction degrees must be non-negative");
  const auto& mesh = *L.mesh;
  const auto& T = mesh.cells[t];
  const int l = L.degree;
  const int K = std::max({l + 1, m, p});
  CellPolyContext ctx(mesh, t, K);
  const Eigen::Index nloc = Eigen::Index(L.local_dofs(t).size());
  const Eigen::Index nc = Eigen::Index(L.cell_block);
  const Eigen::Index nm = Eigen::Index(ctx.n(m)), np = Eigen::Index(ctx.n(p));

  const Eigen::MatrixXd gram = ctx.mass(std::max(m, p));
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::MatrixXd chol = llt.matrixL();

  CellReconstructions r;
  auto& C = r.C;
  auto& D = r.D;
  C.kind = ReconstructionOperator::Kind::rotational;
  D.kind = ReconstructionOperator::Kind::divergence;
  C.cell = D.cell = t;
  C.degree = m;
  D.degree = p;
  C.rhs = Eigen::MatrixXd::Zero(3 * nm, nloc);
  D.rhs = Eigen::MatrixXd::Zero(np, nloc);

  const Eigen::MatrixXd M3l = block_diag3(ctx.mass(l));
  C.rhs.leftCols(nc) = ctx.curl(m, l).transpose() * M3l;
  D.rhs.leftCols(nc) = -T.eta * ctx.grad(p, l).transpose() * M3l;

  Eigen::Index pos = nc;
  for (std::size_t i = 0; i < T.faces.size(); ++i) {
    const std::size_t f = T.faces[i];
    const double eps = T.orientations[i];
    FacePolyContext fctx(mesh, f, K);
    const Eigen::MatrixXd Mf = fctx.mass(l);
    const Eigen::MatrixXd& Q = L.face_space[f];
    const Eigen::Index nq = Q.cols(), nn = Eigen::Index(L.normal_block);
    const auto tmC = trace_matrices(ctx, fctx, m, l);
    Eigen::MatrixXd Mf2 = Eigen::MatrixXd::Zero(2 * Mf.rows(), 2 * Mf.rows());
    Mf2.topLeftCorner(Mf.rows(), Mf.rows()) = Mf;
    Mf2.bottomRightCorner(Mf.rows(), Mf.rows()) = Mf;
    C.rhs.middleCols(pos, nq) = -eps * tmC.tangential.transpose() * Mf2 * Q;
    const auto tmD = trace_matrices(ctx, fctx, p, l);
    D.rhs.middleCols(pos + nq, nn) = eps * tmD.scalar.transpose() * Mf;
    pos += nq + nn;
  }

  C.mass = block_diag3(gram.topLeftCorner(nm, nm));
  D.mass = gram.topLeftCorner(np, np);
  C.matrix.resize(3 * nm, nloc);
  for (int c = 0; c < 3; ++c) C.matrix.middleRows(c * nm, nm) = leading_solve(chol, nm, C.rhs.middleRows(c * nm, nm));
  D.matrix = leading_solve(chol, np, D.rhs);
  return r;
}

ReconstructionOperator build_CT(const HybridLayout& L, std::size_t t, int m) { return build_reconstructions(L, t, m, 0).C; }
ReconstructionOperator build_DT(const HybridLayout& L, std::size_t t, int p) { return build_reconstructions(L, t, 0, p).D; }

std::vector<CellReconstructions> build_reconstructions(const HybridLayout& L, int m, int p) {
  std::vector<CellReconstructions> out(L.mesh->n_cells());
  parallel_for(out.size(), [&](std::size_t t) { out[t] = build_reconstructions(L, t, m, p); });
  return out;
}

//------------------------------------------------------------------------------
// Boundedness
//------------------------------------------------------------------------------

namespace {

struct LocalBound {
  FormRatio c, d, rc, rd;
};

void scatter(Eigen::MatrixXd& global, const std::vector<std::size_t>& dofs, const Eigen::MatrixXd& local) {
  for (std::size_t i = 0; i < dofs.size(); ++i)
    for (std::size_t j = 0; j < dofs.size(); ++j) global(Eigen::Index(dofs[i]), Eigen::Index(dofs[j])) += local(Eigen::Index(i), Eigen::Index(j));
}

Eigen::MatrixXd restrict_free(const HybridLayout& L, const Eigen::MatrixXd& a) {
  const Eigen::Index n = Eigen::Index(L.n_free());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = a(Eigen::Index(L.free_to_full[std::size_t(i)]), Eigen::Index(L.free_to_full[std::size_t(j)]));
  return out;
}

}  // namespace

BoundednessReport boundedness_constants(const HybridLayout& L, int m, int p, std::size_t global_cap) {
  const std::size_t nt = L.mesh->n_cells();
  const auto forms = assemble_local_forms(L);
  const auto recs = build_reconstructions(L, m, p);
  std::vector<Eigen::MatrixXd> leftC(nt), rightC(nt), leftD(nt), rightD(nt);
  std::vector<LocalBound> local(nt);
  parallel_for(nt, [&](std::size_t t) {
    const auto& lf = forms[t];
    const auto& r = recs[t];
    leftC[t] = r.C.matrix.transpose() * r.C.mass * r.C.matrix + lf.s_curl;
    rightC[t] = lf.curl_vol + lf.s_curl;
    leftD[t] = r.D.matrix.transpose() * r.D.mass * r.D.matrix + lf.s_div;
    rightD[t] = lf.div_vol + lf.s_div;
    local[t].c = form_ratio(leftC[t], rightC[t]);
    local[t].d = form_ratio(leftD[t], rightD[t]);
    local[t].rc = form_ratio(rightC[t], leftC[t]);
    local[t].rd = form_ratio(rightD[t], leftD[t]);
  });

  BoundednessReport rep;
  rep.m = m;
  rep.p = p;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& b = local[t];
    rep.max_kernel_violation = std::max({rep.max_kernel_violation, b.c.kernel_violation, b.d.kernel_violation});
    if (!b.c.kernel_ok || !b.d.kernel_ok) rep.failing_cells.push_back(t);
    rep.c_C = std::max(rep.c_C, std::sqrt(b.c.sup));
    rep.c_D = std::max(rep.c_D, std::sqrt(b.d.sup));
    rep.reverse_C = std::max(rep.reverse_C, std::sqrt(b.rc.sup));
    rep.reverse_D = std::max(rep.reverse_D, std::sqrt(b.rd.sup));
  }

  if (L.n_free() <= global_cap) {
    const Eigen::Index n = Eigen::Index(L.n_total);
    Eigen::MatrixXd lc = Eigen::MatrixXd::Zero(n, n), rc = lc, ld = lc, rd = lc;
    for (std::size_t t = 0; t < nt; ++t) {
      scatter(lc, forms[t].dofs, leftC[t]);
      scatter(rc, forms[t].dofs, rightC[t]);
      scatter(ld, forms[t].dofs, leftD[t]);
      scatter(rd, forms[t].dofs, rightD[t]);
    }
    rep.c_C_global = std::sqrt(form_ratio(restrict_free(L, lc), restrict_free(L, rc)).sup);
    rep.c_D_global = std::sqrt(form_ratio(restrict_free(L, ld), restrict_free(L, rd)).sup);
  }
  return rep;
}

//------------------------------------------------------------------------------
// Discrete integration by parts
//------------------------------------------------------------------------------

AdjointCheck adjoint_consistency(const HybridLayout& L, int m, const Eigen::VectorXd& full, const VectorField& z,
                                 const VectorField& curl_z, int quad_degree) {
  const auto& mesh = *L.mesh;
  const int l = L.degree;
  const std::size_t nt = mesh.n_cells();
  std::vector<double> lhs(nt, 0.), rem(nt, 0.);
  parallel_for(nt, [&](std::size_t t) {
    const auto& T = mesh.cells[t];
    const int K = std::max(l + 1, m);
    CellPolyContext ctx(mesh, t, K);
    const auto rec = build_reconstructions(L, t, m, 0).C;
    const Eigen::VectorXd v = local_values(L.local_dofs(t), full);
    const Eigen::Index nl = Eigen::Index(ctx.n(l)), nm = Eigen::Index(ctx.n(m));
    const Eigen::VectorXd vT = v.head(Eigen::Index(L.cell_block));
    const Eigen::VectorXd cT = rec.matrix * v;

    const QuadRule rule = cell_rule(mesh, t, quad_degree);
    Projector proj(ctx.basis(), rule, std::size_t(nm));
    Eigen::Matrix3Xd zs(3, rule.size()), czs(3, rule.size());
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      zs.col(q) = z(rule.points.col(q));
      czs.col(q) = curl_z(rule.points.col(q));
    }
    const Eigen::VectorXd pz = proj.project_vector(zs);
    const Eigen::MatrixXd phi = ctx.basis().values(rule.points);
    const auto dphi = ctx.basis().gradients(rule.points);
    const Eigen::MatrixXd vvals = evaluate_vector_field(phi.leftCols(nl), vT);
    const Eigen::MatrixXd cvals = evaluate_vector_field(phi.leftCols(nm), cT);
    const Eigen::MatrixXd pzvals = evaluate_vector_field(phi.leftCols(nm), pz);
    Eigen::Matrix3Xd curlv(3, rule.size());
    {
      Eigen::Matrix3Xd comp_grad[3];  // comp_grad[c].row(d) = d v_c / d x_d
      for (int c = 0; c < 3; ++c) {
        comp_grad[c].resize(3, rule.size());
        for (int d = 0; d < 3; ++d) comp_grad[c].row(d) = (dphi[d].leftCols(nl) * vT.segment(c * nl, nl)).transpose();
      }
      curlv.row(0) = comp_grad[2].row(1) - comp_grad[1].row(2);
      curlv.row(1) = comp_grad[0].row(2) - comp_grad[2].row(0);
      curlv.row(2) = comp_grad[1].row(0) - comp_grad[0].row(1);
    }
    double a = 0., b = 0.;
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      a += rule.weights[q] * (cvals.col(q).dot(zs.col(q)) - vvals.col(q).dot(czs.col(q)));
      b += rule.weights[q] * curlv.col(q).dot(pzvals.col(q) - zs.col(q));
    }

    Eigen::Index pos = Eigen::Index(L.cell_block);
    for (std::size_t i = 0; i < T.faces.size(); ++i) {
      const std::size_t f = T.faces[i];
      const auto& F = mesh.faces[f];
      const Eigen::Index nq = Eigen::Index(L.tangential_block[f]);
      const QuadRule fr = face_rule(mesh, f, quad_degree);
      FacePolyContext fctx(mesh, f, K);
      const Eigen::MatrixXd psi = fctx.basis().values(fr.points).leftCols(Eigen::Index(fctx.n(l)));
      const Eigen::VectorXd y = L.face_space[f] * v.segment(pos, nq);
      Eigen::MatrixXd face_vals(2, fr.size());
      face_vals.row(0) = (psi * y.head(psi.cols())).transpose();
      face_vals.row(1) = (psi * y.tail(psi.cols())).transpose();
      const FaceTrace tr = trace_evaluate(mesh, t, f, ctx.basis(), vT, true, fr.points);
      const Eigen::MatrixXd phif = ctx.basis().values(fr.points).leftCols(nm);
      const Eigen::MatrixXd pzf = evaluate_vector_field(phif, pz);
      for (Eigen::Index q = 0; q < fr.size(); ++q) {
        const Eigen::Vector3d d = pzf.col(q) - z(fr.points.col(q));
        const Eigen::Vector2d dt(d.dot(F.tangent1), d.dot(F.tangent2));
        b += T.orientations[i] * fr.weights[q] * (tr.rotated.col(q) - face_vals.col(q)).dot(dt);
      }
      pos += nq + Eigen::Index(L.normal_block);
    }
    lhs[t] = a;
    rem[t] = b;
  });
  AdjointCheck out;
  for (std::size_t t = 0; t < nt; ++t) {
    out.lhs += lhs[t];
    out.remainder += rem[t];
  }
  out.mismatch = std::abs(out.lhs - out.remainder);
  return out;
}

}  // namespace weberlab
