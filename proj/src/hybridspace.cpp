// Hybrid layout, reduction operators, local forms, norms and flux functionals.

#include <weberlab/hybridspace.hpp>
#include <weberlab/parallel.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace weberlab {

FaceSpacePolicy FaceSpacePolicy::parse(const std::string& text) {
  if (text == "minimal") return minimal();
  if (text == "full") return full();
  const std::string prefix = "trimmed:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t pos = 0;
      int k = std::stoi(text.substr(prefix.size()), &pos);
      if (pos == text.size() - prefix.size() && k >= 0) return trimmed(k);
    } catch (const std::exception&) {
    }
  }
  throw LayoutError("invalid face-space policy '" + text + "' (expected minimal, full or trimmed:K)");
}

std::string FaceSpacePolicy::name() const {
  switch (kind) {
  case Kind::minimal: return "minimal";
  case Kind::full: return "full";
  case Kind::trimmed: return "trimmed:" + std::to_string(trimmed_degree);
  case Kind::custom: return "custom";
  }
  return "unknown";
}

std::string to_string(BcFlavor bc) {
  switch (bc) {
  case BcFlavor::none: return "none";
  case BcFlavor::tangential: return "tangential";
  case BcFlavor::normal: return "normal";
  case BcFlavor::both: return "both";
  }
  return "unknown";
}

BcFlavor bc_flavor_from_string(const std::string& name) {
  if (name == "none") return BcFlavor::none;
  if (name == "tangential") return BcFlavor::tangential;
  if (name == "normal") return BcFlavor::normal;
  if (name == "both") return BcFlavor::both;
  throw LayoutError("invalid boundary flavor '" + name + "' (expected tangential, normal, none or both)");
}

//------------------------------------------------------------------------------
// Layout
//------------------------------------------------------------------------------

Eigen::VectorXd HybridLayout::restrict_to_free(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_free()));
  for (std::size_t i = 0; i < n_free(); ++i) out[Eigen::Index(i)] = full[Eigen::Index(free_to_full[i])];
  return out;
}

Eigen::VectorXd HybridLayout::extend_from_free(const Eigen::VectorXd& free) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index(n_total));
  for (std::size_t i = 0; i < n_free(); ++i) out[Eigen::Index(free_to_full[i])] = free[Eigen::Index(i)];
  return out;
}

std::vector<std::size_t> HybridLayout::local_dofs(std::size_t t) const {
  std::vector<std::size_t> d;
  for (std::size_t i = 0; i < cell_block; ++i) d.push_back(cell_offset(t) + i);
  for (std::size_t f : mesh->cells[t].faces) {
    for (std::size_t i = 0; i < tangential_block[f] + normal_block; ++i) d.push_back(face_offset[f] + i);
  }
  return d;
}

HybridLayout build_layout(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, BcFlavor bc) {
  if (degree < 0 || degree > max_supported_degree)
    throw LayoutError("unsupported degree " + std::to_string(degree) + " (supported: 0.." +
                      std::to_string(max_supported_degree) + ")");
  if (policy.kind == FaceSpacePolicy::Kind::trimmed && (policy.trimmed_degree < 0 || policy.trimmed_degree > degree))
    throw LayoutError("trimmed face degree must lie in [0, " + std::to_string(degree) + "]");
  if (policy.kind == FaceSpacePolicy::Kind::custom && !policy.custom)
    throw LayoutError("custom face-space policy without a builder");
  HybridLayout L;
  L.mesh = &mesh;
  L.degree = degree;
  L.policy = policy;
  L.bc = bc;
  L.cell_block = 3 * poly_dim(3, degree);
  L.normal_block = poly_dim(2, degree);
  const std::size_t nf = mesh.n_faces();
  L.face_space.resize(nf);
  L.tangential_block.resize(nf);
  parallel_for(nf, [&](std::size_t f) {
    FacePolyContext fctx(mesh, f, degree + 1);
    const auto fs = build_face_subspaces(fctx, degree);
    Eigen::MatrixXd q;
    switch (policy.kind) {
    case FaceSpacePolicy::Kind::minimal: q = fs.RF; break;
    case FaceSpacePolicy::Kind::full: q = Eigen::MatrixXd::Identity(2 * Eigen::Index(fctx.n(degree)), 2 * Eigen::Index(fctx.n(degree))); break;
    case FaceSpacePolicy::Kind::trimmed: {
      Eigen::MatrixXd rc = face_koszul_complement(fctx, policy.trimmed_degree, degree);
      Eigen::MatrixXd both(fs.RF.rows(), fs.RF.cols() + rc.cols());
      both << fs.RF, rc;
      q = range_basis(both);
      break;
    }
    case FaceSpacePolicy::Kind::custom: q = range_basis(policy.custom(fs)); break;
    }
    L.face_space[f] = q;
    L.tangential_block[f] = std::size_t(q.cols());
  });
  std::size_t off = mesh.n_cells() * L.cell_block;
  L.face_offset.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    L.face_offset[f] = off;
    off += L.tangential_block[f] + L.normal_block;
  }
  L.n_total = off;
  L.fixed.assign(L.n_total, 0);
  const bool fix_t = bc == BcFlavor::tangential || bc == BcFlavor::both;
  const bool fix_n = bc == BcFlavor::normal || bc == BcFlavor::both;
  for (const auto& F : mesh.faces) {
    if (!F.is_boundary()) continue;
    if (fix_t)
      for (std::size_t i = 0; i < L.tangential_block[F.id]; ++i) L.fixed[L.tangential_offset(F.id) + i] = 1;
    if (fix_n)
      for (std::size_t i = 0; i < L.normal_block; ++i) L.fixed[L.normal_offset(F.id) + i] = 1;
  }
  L.full_to_free.assign(L.n_total, -1);
  for (std::size_t i = 0; i < L.n_total; ++i)
    if (!L.fixed[i]) {
      L.full_to_free[i] = long(L.free_to_full.size());
      L.free_to_full.push_back(i);
    }
  return L;
}

//------------------------------------------------------------------------------
// Reduction
//------------------------------------------------------------------------------

namespace {

int reduce_degree(const HybridLayout& L, int quad_degree) { return quad_degree < 0 ? 2 * L.degree + 2 : quad_degree; }

Eigen::VectorXd reduce_cell(const HybridLayout& L, std::size_t t, const VectorField& v, int qd) {
  const PolyBasis b = PolyBasis::cell(*L.mesh, t, L.degree + 1, 2 * L.degree + 2);
  Projector pr(b, cell_rule(*L.mesh, t, qd), b.dim(L.degree));
  return pr.project_vector([&](const Point3& x) { return Eigen::VectorXd(v(x)); }, 3);
}

struct FaceReduction {
  Eigen::VectorXd tangential;  // Q coordinates
  Eigen::VectorXd normal;
};

FaceReduction reduce_face(const HybridLayout& L, std::size_t f, const VectorField& v,
                          const std::function<double(const Point3&, const Eigen::Vector3d&)>& flux, int qd) {
  const auto& F = L.mesh->faces[f];
  const PolyBasis b = PolyBasis::face(*L.mesh, f, L.degree + 1, 2 * L.degree + 2);
  Projector pr(b, face_rule(*L.mesh, f, qd), b.dim(L.degree));
  const auto& pts = pr.rule().points;
  Eigen::MatrixXd rot(2, pts.cols());
  Eigen::VectorXd nrm(pts.cols());
  for (Eigen::Index q = 0; q < pts.cols(); ++q) {
    const Point3 x = pts.col(q);
    const Eigen::Vector3d val = v(x);
    rot(0, q) = val.dot(F.tangent2);
    rot(1, q) = -val.dot(F.tangent1);
    nrm[q] = flux(x, val);
  }
  FaceReduction r;
  r.tangential = L.face_space[f].transpose() * pr.project_vector(rot);
  r.normal = pr.project(nrm);
  return r;
}

}  // namespace

ReducedVector reduce(const HybridLayout& L, const VectorField& v, const ReduceOptions& opt) {
  const auto& mesh = *L.mesh;
  const int qd = reduce_degree(L, opt.quad_degree);
  ReducedVector out;
  out.full = Eigen::VectorXd::Zero(Eigen::Index(L.n_total));
  parallel_for(mesh.n_cells(), [&](std::size_t t) {
    out.full.segment(Eigen::Index(L.cell_offset(t)), Eigen::Index(L.cell_block)) = reduce_cell(L, t, v, qd);
  });
  parallel_for(mesh.n_faces(), [&](std::size_t f) {
    const auto& F = mesh.faces[f];
    const double eta = mesh.cells[F.cell_plus].eta;
    auto flux = [&](const Point3& x, const Eigen::Vector3d& val) {
      return opt.normal_flux ? (*opt.normal_flux)(x, f) : eta * val.dot(F.normal);
    };
    FaceReduction r = reduce_face(L, f, v, flux, qd);
    out.full.segment(Eigen::Index(L.tangential_offset(f)), r.tangential.size()) = r.tangential;
    out.full.segment(Eigen::Index(L.normal_offset(f)), r.normal.size()) = r.normal;
  });
  const double scale = std::max(1., out.full.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < L.n_total; ++i)
    if (L.fixed[i]) {
      const double a = std::abs(out.full[Eigen::Index(i)]);
      out.max_forced = std::max(out.max_forced, a);
      if (a > 1e-12 * scale) out.forced_zero = true;
      out.full[Eigen::Index(i)] = 0.;
    }
  return out;
}

Eigen::VectorXd reduce_local(const HybridLayout& L, std::size_t t, const VectorField& v, int quad_degree) {
  const auto& mesh = *L.mesh;
  const auto& T = mesh.cells[t];
  const int qd = reduce_degree(L, quad_degree);
  std::vector<Eigen::VectorXd> parts{reduce_cell(L, t, v, qd)};
  Eigen::Index size = parts[0].size();
  for (std::size_t f : T.faces) {
    const auto& F = mesh.faces[f];
    FaceReduction r = reduce_face(L, f, v, [&](const Point3&, const Eigen::Vector3d& val) { return T.eta * val.dot(F.normal); }, qd);
    size += r.tangential.size() + r.normal.size();
    parts.push_back(r.tangential);
    parts.push_back(r.normal);
  }
  Eigen::VectorXd out(size);
  Eigen::Index pos = 0;
  for (const auto& p : parts) {
    out.segment(pos, p.size()) = p;
    pos += p.size();
  }
  return out;
}

//------------------------------------------------------------------------------
// Local forms
//------------------------------------------------------------------------------

namespace {

Eigen::MatrixXd block_diag3(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int c = 0; c < 3; ++c) out.block(c * n, c * n, n, n) = m;
  return out;
}

}  // namespace

LocalForms assemble_local_forms(const HybridLayout& L, std::size_t t) {
  const auto& mesh = *L.mesh;
  const auto& T = mesh.cells[t];
  const int l = L.degree;
  CellPolyContext ctx(mesh, t, l + 1);
  LocalForms lf;
  lf.cell = t;
  lf.dofs = L.local_dofs(t);
  const Eigen::Index n = Eigen::Index(lf.dofs.size());
  const Eigen::Index nc = Eigen::Index(L.cell_block);
  lf.cell_dofs = L.cell_block;

  lf.mass = Eigen::MatrixXd::Zero(n, n);
  lf.mass.topLeftCorner(nc, nc) = T.eta * block_diag3(ctx.mass(l));
  const Eigen::MatrixXd C = ctx.curl(l, l - 1);
  const Eigen::MatrixXd D = ctx.div(l, l - 1);
  lf.curl_vol = Eigen::MatrixXd::Zero(n, n);
  lf.curl_vol.topLeftCorner(nc, nc) = C.transpose() * block_diag3(ctx.mass(l - 1)) * C;
  lf.div_vol = Eigen::MatrixXd::Zero(n, n);
  lf.div_vol.topLeftCorner(nc, nc) = T.eta * T.eta * D.transpose() * ctx.mass(l - 1) * D;

  lf.s_curl = Eigen::MatrixXd::Zero(n, n);
  lf.s_div = Eigen::MatrixXd::Zero(n, n);
  lf.jump = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index pos = nc;
  for (std::size_t f : T.faces) {
    const auto& F = mesh.faces[f];
    FacePolyContext fctx(mesh, f, l + 1);
    const auto tm = trace_matrices(ctx, fctx, l, l);
    const Eigen::MatrixXd& Q = L.face_space[f];
    const Eigen::Index nq = Q.cols(), m = Eigen::Index(L.normal_block);
    const double w = 1. / F.diameter;
    lf.tangential_pos.push_back(std::size_t(pos));
    lf.normal_pos.push_back(std::size_t(pos + nq));

    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nq, n);
    S.leftCols(nc) = Q.transpose() * tm.rotated;
    S.block(0, pos, nq, nq) = -Eigen::MatrixXd::Identity(nq, nq);
    lf.s_curl += w * S.transpose() * S;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(tm.rotated.rows(), n);
    J.leftCols(nc) = tm.rotated;
    J.block(0, pos, J.rows(), nq) = -Q;
    lf.jump += w * J.transpose() * J;

    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(m, n);
    N.leftCols(nc) = T.eta * tm.normal;
    N.block(0, pos + nq, m, m) = -Eigen::MatrixXd::Identity(m, m);
    lf.s_div += w * N.transpose() * N;

    pos += nq + m;
  }
  return lf;
}

std::vector<LocalForms> assemble_local_forms(const HybridLayout& L) {
  std::vector<LocalForms> out(L.mesh->n_cells());
  parallel_for(out.size(), [&](std::size_t t) { out[t] = assemble_local_forms(L, t); });
  return out;
}

//------------------------------------------------------------------------------
// Norms and fluxes
//------------------------------------------------------------------------------

Seminorms seminorms(const HybridLayout& L, const std::vector<LocalForms>& forms, const Eigen::VectorXd& full) {
  double c2 = 0., d2 = 0., m2 = 0.;
  for (const auto& lf : forms) {
    Eigen::VectorXd v(Eigen::Index(lf.dofs.size()));
    for (std::size_t i = 0; i < lf.dofs.size(); ++i) v[Eigen::Index(i)] = full[Eigen::Index(lf.dofs[i])];
    c2 += v.dot((lf.curl_vol + lf.s_curl) * v);
    d2 += v.dot((lf.div_vol + lf.s_div) * v);
    m2 += v.dot(lf.mass * v);
  }
  Seminorms s;
  s.curl = std::sqrt(std::max(0., c2));
  s.div = std::sqrt(std::max(0., d2));
  s.l2 = std::sqrt(std::max(0., m2));
  s.x = std::sqrt(std::max(0., m2 + d2 / L.mesh->eta_min + L.mesh->eta_max * c2));
  return s;
}

Eigen::VectorXd flux_functional(const HybridLayout& L, const std::vector<std::size_t>& faces) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(Eigen::Index(L.n_total));
  for (std::size_t f : faces) {
    const PolyBasis b = PolyBasis::face(*L.mesh, f, L.degree + 1, 2 * L.degree + 2);
    const QuadRule r = face_rule(*L.mesh, f, L.degree);
    Eigen::VectorXd ints = b.values(r.points).leftCols(Eigen::Index(L.normal_block)).transpose() * r.weights;
    u.segment(Eigen::Index(L.normal_offset(f)), ints.size()) += ints;
  }
  return u;
}

FluxValues flux_functionals(const HybridLayout& L, const Eigen::VectorXd& full) {
  const auto& topo = L.mesh->topology;
  FluxValues fv;
  for (int j = 1; j <= topo.beta2; ++j) {
    if (std::size_t(j) >= topo.gamma_sets.size()) throw LayoutError("boundary component sets are missing");
    fv.gamma.push_back(flux_functional(L, topo.gamma_sets[std::size_t(j)]).dot(full));
  }
  if (topo.beta1 > 0 && topo.sigma_sets.size() != std::size_t(topo.beta1))
    throw LayoutError("mesh declares beta1 = " + std::to_string(topo.beta1) + " but carries no cutting surfaces");
  for (const auto& s : topo.sigma_sets) fv.sigma.push_back(flux_functional(L, s.faces).dot(full));
  return fv;
}

//------------------------------------------------------------------------------
// Jump control
//------------------------------------------------------------------------------

FormRatio form_ratio(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right, double violation_tol) {
  const Eigen::Index n = right.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(right);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double tol = 1e-10 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Eigen::Index> ker, rng;
  for (Eigen::Index i = 0; i < n; ++i) (lam[i] <= tol ? ker : rng).push_back(i);
  FormRatio r;
  r.kernel_dim = ker.size();
  const double lnorm = std::max(left.cwiseAbs().maxCoeff(), 1e-300);
  if (!ker.empty()) {
    Eigen::MatrixXd V0(n, Eigen::Index(ker.size()));
    for (std::size_t k = 0; k < ker.size(); ++k) V0.col(Eigen::Index(k)) = es.eigenvectors().col(ker[k]);
    r.kernel_violation = (V0.transpose() * left * V0).cwiseAbs().maxCoeff() / lnorm;
  }
  r.kernel_ok = r.kernel_violation <= violation_tol;
  if (rng.empty()) return r;
  Eigen::MatrixXd V1(n, Eigen::Index(rng.size()));
  for (std::size_t k = 0; k < rng.size(); ++k)
    V1.col(Eigen::Index(k)) = es.eigenvectors().col(rng[k]) / std::sqrt(lam[rng[k]]);
  Eigen::MatrixXd B = V1.transpose() * left * V1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  r.sup = r.kernel_ok ? std::max(0., eb.eigenvalues().maxCoeff()) : std::numeric_limits<double>::infinity();
  return r;
}

JumpControl jump_control_constant(const LocalForms& lf) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < lf.cell_dofs; ++i) idx.push_back(Eigen::Index(i));
  for (std::size_t k = 0; k < lf.tangential_pos.size(); ++k)
    for (std::size_t i = lf.tangential_pos[k]; i < lf.normal_pos[k]; ++i) idx.push_back(Eigen::Index(i));
  const Eigen::Index n = Eigen::Index(idx.size());
  Eigen::MatrixXd R(n, n), Lf(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      R(i, j) = lf.curl_vol(idx[i], idx[j]) + lf.s_curl(idx[i], idx[j]);
      Lf(i, j) = lf.jump(idx[i], idx[j]);
    }
  const FormRatio fr = form_ratio(Lf, R);
  JumpControl jc;
  jc.kernel_violation = fr.kernel_violation;
  jc.kernel_ok = fr.kernel_ok;
  jc.constant = std::sqrt(fr.sup);
  return jc;
}

}  // namespace weberlab
