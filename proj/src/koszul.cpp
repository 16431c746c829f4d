// Koszul decompositions, operator matrices and inverse differential maps.

#include <weberlab/koszul.hpp>

#include <Eigen/SVD>

namespace weberlab {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return Eigen::VectorXd();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.cols() == 0 || a.rows() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > rel_tol * s[0]) ++r;
  return svd.matrixU().leftCols(r);
}

double condition_number(const Eigen::MatrixXd& a) {
  Eigen::VectorXd s = singular_values(a);
  if (s.size() == 0) return 1.;
  return s[s.size() - 1] > 0. ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
}

//------------------------------------------------------------------------------
// Cell context
//------------------------------------------------------------------------------

CellPolyContext::CellPolyContext(const PolyMesh& mesh, std::size_t t, int max_degree)
    : mesh_(&mesh), t_(t), K_(max_degree), basis_(PolyBasis::cell(mesh, t, max_degree, 2 * max_degree)),
      rule_(cell_rule(mesh, t, 2 * max_degree)) {
  phi_ = basis_.values(rule_.points);
  dphi_ = basis_.gradients(rule_.points);
  rel_ = rule_.points.colwise() - mesh.cells[t].center;
}

Eigen::MatrixXd CellPolyContext::mass(int k) const {
  return weighted_gram(phi_.leftCols(Eigen::Index(n(k))), rule_.weights);
}

Eigen::MatrixXd CellPolyContext::project_samples(const Eigen::MatrixXd& samples, int to) const {
  const Eigen::Index m = Eigen::Index(n(to));
  if (m == 0) return Eigen::MatrixXd(0, samples.cols());
  Eigen::MatrixXd rhs = phi_.leftCols(m).transpose() * rule_.weights.asDiagonal() * samples;
  return mass(to).llt().solve(rhs);
}

Eigen::MatrixXd CellPolyContext::project_vector_samples(const std::array<Eigen::MatrixXd, 3>& samples, int to) const {
  const Eigen::Index m = Eigen::Index(n(to));
  Eigen::MatrixXd out(3 * m, samples[0].cols());
  for (int a = 0; a < 3; ++a) out.middleRows(a * m, m) = project_samples(samples[a], to);
  return out;
}

Eigen::MatrixXd CellPolyContext::grad(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from));
  return project_vector_samples({dphi_[0].leftCols(nf), dphi_[1].leftCols(nf), dphi_[2].leftCols(nf)}, to);
}

Eigen::MatrixXd CellPolyContext::curl(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), np = rule_.size();
  std::array<Eigen::MatrixXd, 3> s;
  for (auto& m : s) m = Eigen::MatrixXd::Zero(np, 3 * nf);
  // curl(phi e_c) = grad(phi) x e_c
  for (int c = 0; c < 3; ++c) {
    const int a1 = (c + 1) % 3, a2 = (c + 2) % 3;
    // (grad phi x e_c)_{a1} = d_{a2} phi, (grad phi x e_c)_{a2} = -d_{a1} phi
    s[a1].middleCols(c * nf, nf) = dphi_[a2].leftCols(nf);
    s[a2].middleCols(c * nf, nf) = -dphi_[a1].leftCols(nf);
  }
  return project_vector_samples(s, to);
}

Eigen::MatrixXd CellPolyContext::div(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), np = rule_.size();
  Eigen::MatrixXd s(np, 3 * nf);
  for (int c = 0; c < 3; ++c) s.middleCols(c * nf, nf) = dphi_[c].leftCols(nf);
  return project_samples(s, to);
}

Eigen::MatrixXd CellPolyContext::koszul_cross(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), np = rule_.size();
  std::array<Eigen::MatrixXd, 3> s;
  for (auto& m : s) m = Eigen::MatrixXd::Zero(np, 3 * nf);
  // (e_c x r)_{a1} = -r_{a2}, (e_c x r)_{a2} = r_{a1}
  for (int c = 0; c < 3; ++c) {
    const int a1 = (c + 1) % 3, a2 = (c + 2) % 3;
    s[a1].middleCols(c * nf, nf) = -(rel_.row(a2).transpose().asDiagonal() * phi_.leftCols(nf));
    s[a2].middleCols(c * nf, nf) = rel_.row(a1).transpose().asDiagonal() * phi_.leftCols(nf);
  }
  return project_vector_samples(s, to);
}

Eigen::MatrixXd CellPolyContext::koszul_scalar(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from));
  std::array<Eigen::MatrixXd, 3> s;
  for (int a = 0; a < 3; ++a) s[a] = rel_.row(a).transpose().asDiagonal() * phi_.leftCols(nf);
  return project_vector_samples(s, to);
}

Eigen::MatrixXd CellPolyContext::vector_embedding(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), nt = Eigen::Index(n(to));
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3 * nt, 3 * nf);
  for (int c = 0; c < 3; ++c) e.block(c * nt, c * nf, std::min(nt, nf), std::min(nt, nf)).setIdentity();
  return e;
}

//------------------------------------------------------------------------------
// Face context
//------------------------------------------------------------------------------

FacePolyContext::FacePolyContext(const PolyMesh& mesh, std::size_t f, int max_degree)
    : f_(f), K_(max_degree), basis_(PolyBasis::face(mesh, f, max_degree, 2 * max_degree)),
      rule_(face_rule(mesh, f, 2 * max_degree)) {
  psi_ = basis_.values(rule_.points);
  dpsi_ = basis_.gradients(rule_.points);
  const auto& F = mesh.faces[f];
  Eigen::Matrix3Xd d = rule_.points.colwise() - F.center;
  rel_.resize(2, d.cols());
  rel_.row(0) = F.tangent1.transpose() * d;
  rel_.row(1) = F.tangent2.transpose() * d;
}

Eigen::MatrixXd FacePolyContext::mass(int k) const {
  return weighted_gram(psi_.leftCols(Eigen::Index(n(k))), rule_.weights);
}

Eigen::MatrixXd FacePolyContext::project_samples(const Eigen::MatrixXd& samples, int to) const {
  const Eigen::Index m = Eigen::Index(n(to));
  if (m == 0) return Eigen::MatrixXd(0, samples.cols());
  Eigen::MatrixXd rhs = psi_.leftCols(m).transpose() * rule_.weights.asDiagonal() * samples;
  return mass(to).llt().solve(rhs);
}

Eigen::MatrixXd FacePolyContext::rot(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), m = Eigen::Index(n(to));
  Eigen::MatrixXd out(2 * m, nf);
  out.topRows(m) = project_samples(dpsi_[1].leftCols(nf), to);
  out.bottomRows(m) = project_samples(-dpsi_[0].leftCols(nf), to);
  return out;
}

Eigen::MatrixXd FacePolyContext::koszul(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), m = Eigen::Index(n(to));
  Eigen::MatrixXd out(2 * m, nf);
  for (int a = 0; a < 2; ++a)
    out.middleRows(a * m, m) = project_samples(rel_.row(a).transpose().asDiagonal() * psi_.leftCols(nf), to);
  return out;
}

Eigen::MatrixXd FacePolyContext::vector_embedding(int from, int to) const {
  const Eigen::Index nf = Eigen::Index(n(from)), nt = Eigen::Index(n(to));
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2 * nt, 2 * nf);
  for (int c = 0; c < 2; ++c) e.block(c * nt, c * nf, std::min(nt, nf), std::min(nt, nf)).setIdentity();
  return e;
}

TraceMatrices trace_matrices(const CellPolyContext& cell, const FacePolyContext& face, int from, int to) {
  const auto& F = cell.mesh().faces[face.face()];
  const Eigen::Index nf = Eigen::Index(cell.n(from)), m = Eigen::Index(face.n(to));
  const Eigen::MatrixXd phi = cell.basis().values(face.rule().points).leftCols(nf);
  TraceMatrices tm;
  tm.scalar = face.project_samples(phi, to);
  tm.rotated.resize(2 * m, 3 * nf);
  tm.tangential.resize(2 * m, 3 * nf);
  tm.normal.resize(m, 3 * nf);
  for (int c = 0; c < 3; ++c) {
    tm.rotated.block(0, c * nf, m, nf) = F.tangent2[c] * tm.scalar;
    tm.rotated.block(m, c * nf, m, nf) = -F.tangent1[c] * tm.scalar;
    tm.tangential.block(0, c * nf, m, nf) = F.tangent1[c] * tm.scalar;
    tm.tangential.block(m, c * nf, m, nf) = F.tangent2[c] * tm.scalar;
    tm.normal.block(0, c * nf, m, nf) = F.normal[c] * tm.scalar;
  }
  return tm;
}

//------------------------------------------------------------------------------
// Subspaces
//------------------------------------------------------------------------------

KoszulDims koszul_dimensions(int l) {
  KoszulDims d;
  d.G = poly_dim(3, l + 1) - 1;
  d.Gc = 3 * poly_dim(3, l) - d.G;
  d.Rc = poly_dim(3, l - 1);
  d.R = 3 * poly_dim(3, l) - d.Rc;
  d.RF = poly_dim(2, l + 1) - 1;
  d.RcF = poly_dim(2, l - 1);
  return d;
}

namespace {

void check_dim(const Eigen::MatrixXd& m, std::size_t expected, const char* tag, std::size_t id) {
  if (std::size_t(m.cols()) != expected)
    throw KoszulError(std::string("subspace ") + tag + " on region " + std::to_string(id) + " has rank " +
                      std::to_string(m.cols()) + ", expected " + std::to_string(expected));
}

double pair_condition(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* tag, std::size_t id) {
  Eigen::MatrixXd ab(a.rows(), a.cols() + b.cols());
  ab << a, b;
  if (ab.rows() != ab.cols())
    throw KoszulError(std::string("direct sum ") + tag + " on region " + std::to_string(id) + " is not square");
  return condition_number(ab);
}

}  // namespace

CellSubspaces build_cell_subspaces(const CellPolyContext& ctx, int l) {
  if (l < 0 || ctx.max_degree() < l + 1) throw KoszulError("cell context degree too small for the decomposition");
  const auto dims = koszul_dimensions(l);
  CellSubspaces s;
  s.degree = l;
  s.G = range_basis(ctx.grad(l + 1, l));
  s.Gc = range_basis(ctx.koszul_cross(l - 1, l));
  s.R = range_basis(ctx.curl(l + 1, l));
  s.Rc = range_basis(ctx.koszul_scalar(l - 1, l));
  check_dim(s.G, dims.G, "G", ctx.cell());
  check_dim(s.Gc, dims.Gc, "Gc", ctx.cell());
  check_dim(s.R, dims.R, "R", ctx.cell());
  check_dim(s.Rc, dims.Rc, "Rc", ctx.cell());
  s.cond_G_Gc = pair_condition(s.G, s.Gc, "G+Gc", ctx.cell());
  s.cond_R_Rc = pair_condition(s.R, s.Rc, "R+Rc", ctx.cell());
  return s;
}

FaceSubspaces build_face_subspaces(const FacePolyContext& ctx, int l) {
  if (l < 0 || ctx.max_degree() < l + 1) throw KoszulError("face context degree too small for the decomposition");
  const auto dims = koszul_dimensions(l);
  FaceSubspaces s;
  s.degree = l;
  s.RF = range_basis(ctx.rot(l + 1, l));
  s.RcF = range_basis(ctx.koszul(l - 1, l));
  check_dim(s.RF, dims.RF, "R_F", ctx.face());
  check_dim(s.RcF, dims.RcF, "Rc_F", ctx.face());
  s.cond = pair_condition(s.RF, s.RcF, "R_F+Rc_F", ctx.face());
  return s;
}

Eigen::MatrixXd face_koszul_complement(const FacePolyContext& ctx, int k, int l) {
  if (k < 0 || k > l) throw KoszulError("trimmed face degree must lie in [0, l]");
  Eigen::MatrixXd m = range_basis(ctx.koszul(k - 1, l));
  check_dim(m, poly_dim(2, k - 1), "Rc_F", ctx.face());
  return m;
}

//------------------------------------------------------------------------------
// Inverse maps
//------------------------------------------------------------------------------

namespace {

// Curl restricted to Gc^l, in orthonormal coordinates: P^l^3 (Gc columns) -> P^{l-1}^3
Eigen::MatrixXd restricted_curl(const CellPolyContext& ctx, int l, Eigen::MatrixXd& gc) {
  gc = range_basis(ctx.koszul_cross(l - 1, l));
  return ctx.curl(l, l - 1) * gc;
}

}  // namespace

Eigen::VectorXd curl_inverse(const CellPolyContext& ctx, int l, const Eigen::VectorXd& c) {
  if (l < 0 || ctx.max_degree() < l) throw KoszulError("cell context degree too small for Curl^-1");
  const Eigen::Index nv = 3 * Eigen::Index(ctx.n(l));
  if (c.size() != 3 * Eigen::Index(ctx.n(l - 1))) throw KoszulError("Curl^-1 input has the wrong size");
  if (l == 0 || c.norm() == 0.) return Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd gc;
  Eigen::MatrixXd a = restricted_curl(ctx, l, gc);
  Eigen::VectorXd y = a.completeOrthogonalDecomposition().solve(c);
  double res = (a * y - c).norm();
  if (res > 1e-9 * c.norm())
    throw KoszulError("Curl^-1 input is not in the curl image (relative residual " + std::to_string(res / c.norm()) + ")");
  return gc * y;
}

Eigen::VectorXd div_inverse(const CellPolyContext& ctx, int l, const Eigen::VectorXd& d) {
  if (l < 0 || ctx.max_degree() < l) throw KoszulError("cell context degree too small for Div^-1");
  const Eigen::Index nv = 3 * Eigen::Index(ctx.n(l));
  if (d.size() != Eigen::Index(ctx.n(l - 1))) throw KoszulError("Div^-1 input has the wrong size");
  if (l == 0) return Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd kq = ctx.koszul_scalar(l - 1, l);
  Eigen::MatrixXd dm = ctx.div(l, l - 1) * kq;
  return kq * dm.fullPivLu().solve(d);
}

double curl_inverse_norm(const CellPolyContext& ctx, int l) {
  if (l == 0) return 0.;
  Eigen::MatrixXd gc;
  Eigen::VectorXd s = singular_values(restricted_curl(ctx, l, gc));
  return 1. / s[s.size() - 1];
}

double div_inverse_norm(const CellPolyContext& ctx, int l) {
  if (l == 0) return 0.;
  Eigen::MatrixXd kq = ctx.koszul_scalar(l - 1, l);
  Eigen::MatrixXd dm = ctx.div(l, l - 1) * kq;
  return singular_values(kq * dm.inverse())[0];
}

//------------------------------------------------------------------------------
// Trace identities
//------------------------------------------------------------------------------

std::vector<TraceIdentityReport> verify_trace_identities(const CellPolyContext& ctx, int l) {
  const auto sub = build_cell_subspaces(ctx, l);
  std::vector<TraceIdentityReport> out;
  for (std::size_t f : ctx.mesh().cells[ctx.cell()].faces) {
    FacePolyContext fctx(ctx.mesh(), f, l + 1);
    const auto fs = build_face_subspaces(fctx, l);
    const auto tm = trace_matrices(ctx, fctx, l, l);
    TraceIdentityReport r;
    r.face = f;
    const Eigen::MatrixXd x = tm.rotated * sub.G;
    const Eigen::MatrixXd xb = range_basis(x);
    r.rotated_rank = std::size_t(xb.cols());
    r.rf_dim = std::size_t(fs.RF.cols());
    const double c1 = (x - fs.RF * (fs.RF.transpose() * x)).norm() / std::max(x.norm(), 1e-300);
    const double c2 = (fs.RF - xb * (xb.transpose() * fs.RF)).norm() / std::max(fs.RF.norm(), 1e-300);
    r.containment = std::max(c1, c2);
    r.normal_rank = std::size_t(range_basis(tm.normal * sub.R).cols());
    r.face_dim = fctx.n(l);
    r.ok = r.rotated_rank == r.rf_dim && r.containment <= 1e-10 && r.normal_rank == r.face_dim;
    out.push_back(r);
  }
  return out;
}

}  // namespace weberlab
