#include <weberlab/spectral.hpp>
#include <weberlab/parallel.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace weberlab {

//------------------------------------------------------------------------------
// Assembly
//------------------------------------------------------------------------------

SparseMatrix QuadraticFormPair::A() const {
  if (flux.cols() == 0) return A_base;
  SparseMatrix U = flux.sparseView(0., 0.);
  SparseMatrix out = A_base + SparseMatrix(U * U.transpose());
  return out;
}

Eigen::MatrixXd QuadraticFormPair::dense_A() const {
  Eigen::MatrixXd a = Eigen::MatrixXd(A_base);
  if (flux.cols() > 0) a += flux * flux.transpose();
  return a;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_local(Triplets& trip, const HybridLayout& L, const std::vector<std::size_t>& dofs, const Eigen::MatrixXd& a) {
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const long fi = L.full_to_free[dofs[i]];
    if (fi < 0) continue;
    for (std::size_t j = 0; j < dofs.size(); ++j) {
      const long fj = L.full_to_free[dofs[j]];
      if (fj < 0) continue;
      const double v = a(Eigen::Index(i), Eigen::Index(j));
      if (v != 0.) trip.emplace_back(Eigen::Index(fi), Eigen::Index(fj), v);
    }
  }
}

SparseMatrix from_triplets(std::size_t n, const Triplets& t) {
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

QuadraticFormPair assemble_forms(const HybridLayout& L, bool include_flux) {
  if (L.bc == BcFlavor::none) throw SpectralError("forms need a tangential, normal or combined boundary flavor");
  const auto& mesh = *L.mesh;
  QuadraticFormPair P;
  P.flavor = L.bc;
  P.include_flux = include_flux;
  P.n_free = L.n_free();
  P.eta_min = mesh.eta_min;
  P.eta_max = mesh.eta_max;
  const auto forms = assemble_local_forms(L);
  Triplets ta, tm, tx;
  // fixed summation order by cell id
  for (const auto& lf : forms) {
    const Eigen::MatrixXd a = (lf.div_vol + lf.s_div) / P.eta_min + P.eta_max * (lf.curl_vol + lf.s_curl);
    add_local(ta, L, lf.dofs, a);
    add_local(tm, L, lf.dofs, lf.mass);
    add_local(tx, L, lf.dofs, lf.mass + a);
  }
  P.A_base = from_triplets(P.n_free, ta);
  P.M = from_triplets(P.n_free, tm);
  P.X = from_triplets(P.n_free, tx);

  std::vector<std::vector<std::size_t>> sets;
  const auto& topo = mesh.topology;
  if (include_flux) {
    if (L.bc != BcFlavor::normal) {
      for (int j = 1; j <= topo.beta2; ++j) {
        if (std::size_t(j) >= topo.gamma_sets.size()) throw SpectralError("boundary component sets are missing");
        sets.push_back(topo.gamma_sets[std::size_t(j)]);
      }
    } else {
      if (topo.beta1 > 0 && topo.sigma_sets.size() != std::size_t(topo.beta1))
        throw SpectralError("mesh declares beta1 = " + std::to_string(topo.beta1) + " but carries no cutting surfaces");
      for (const auto& s : topo.sigma_sets) sets.push_back(s.faces);
    }
  }
  P.flux = Eigen::MatrixXd::Zero(Eigen::Index(P.n_free), Eigen::Index(sets.size()));
  for (std::size_t k = 0; k < sets.size(); ++k)
    P.flux.col(Eigen::Index(k)) = L.restrict_to_free(flux_functional(L, sets[k])) / std::sqrt(P.eta_min);
  return P;
}

//------------------------------------------------------------------------------
// Eigensolvers
//------------------------------------------------------------------------------

LanczosResult lanczos_largest(const SparseMatrix& left, const SparseMatrix& right, const EigenOptions& opt) {
  Eigen::SimplicialLLT<SparseMatrix> llt(right);
  if (llt.info() != Eigen::Success) throw SpectralError("Cholesky factorization failed: the form is not positive definite");
  const Eigen::Index n = right.rows();
  auto op = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    Eigen::VectorXd x = llt.permutationPinv() * Eigen::VectorXd(llt.matrixU().solve(y));
    Eigen::VectorXd z = llt.permutationP() * (left * x);
    return llt.matrixL().solve(z);
  };
  const int kmax = int(std::min<Eigen::Index>(opt.max_iterations, n));
  Eigen::MatrixXd V(n, kmax + 1);
  std::vector<double> alpha, beta;
  std::mt19937_64 g(opt.seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = nd(g);
  V.col(0) = v / v.norm();

  LanczosResult res;
  Eigen::VectorXd s;
  for (int j = 0; j < kmax; ++j) {
    Eigen::VectorXd w = op(V.col(j));
    alpha.push_back(V.col(j).dot(w));
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    beta.push_back(w.norm());
    const int k = j + 1;
    const bool breakdown = beta.back() <= 1e-14 * std::abs(alpha.front());
    if (k % 5 == 0 || breakdown || k == kmax) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        T(i, i) = alpha[std::size_t(i)];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[std::size_t(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const double theta = es.eigenvalues()[k - 1];
      s = es.eigenvectors().col(k - 1);
      res.value = theta;
      res.iterations = k;
      const double est = beta.back() * std::abs(s[k - 1]);
      if (breakdown || est <= opt.tol * std::abs(theta)) {
        res.converged = true;
        break;
      }
    }
    if (breakdown) break;
    V.col(j + 1) = w / beta.back();
  }
  const Eigen::VectorXd y = V.leftCols(s.size()) * s;
  res.vector = llt.permutationPinv() * Eigen::VectorXd(llt.matrixU().solve(y));
  return res;
}

namespace {

bool use_dense(std::size_t n, const EigenOptions& opt) {
  if (opt.method == EigenOptions::Method::dense) return true;
  if (opt.method == EigenOptions::Method::iterative) return false;
  return n <= opt.dense_limit;
}

void require_definite(double lmin, double lmax) {
  if (!(lmin > 1e-13 * lmax)) {
    std::ostringstream os;
    os << "A is not positive definite on the free space (smallest eigenvalue " << lmin
       << "); run the degeneracy probe or include the flux terms";
    throw SpectralError(os.str());
  }
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace

double lambda_min_A(const QuadraticFormPair& P, const EigenOptions& opt) {
  if (P.n_free == 0) throw SpectralError("no free degrees of freedom");
  if (use_dense(P.n_free, opt)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P.dense_A(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }
  const SparseMatrix A = P.A();
  const auto r = lanczos_largest(sparse_identity(A.rows()), A, opt);
  return 1. / r.value;
}

WeberResult weber_constant(const QuadraticFormPair& P, const EigenOptions& opt) {
  if (P.n_free == 0) throw SpectralError("no free degrees of freedom");
  WeberResult W;
  const SparseMatrix A = P.A();
  if (use_dense(P.n_free, opt)) {
    const Eigen::MatrixXd Ad = P.dense_A();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(Ad, Eigen::EigenvaluesOnly);
    W.lambda_min_A = ea.eigenvalues()[0];
    require_definite(W.lambda_min_A, ea.eigenvalues().maxCoeff());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(P.M), Ad);
    const Eigen::Index last = Ad.rows() - 1;
    W.lambda_max = es.eigenvalues()[last];
    W.eigenvector = es.eigenvectors().col(last);
    W.method = "dense";
  } else {
    LanczosResult r, rmin;
    try {
      r = lanczos_largest(P.M, A, opt);
      rmin = lanczos_largest(sparse_identity(A.rows()), A, opt);
    } catch (const SpectralError&) {
      throw SpectralError("A is not positive definite on the free space (Cholesky breakdown); run the degeneracy probe "
                          "or include the flux terms");
    }
    W.lambda_min_A = 1. / rmin.value;
    require_definite(W.lambda_min_A, lanczos_largest(A, sparse_identity(A.rows()), opt).value);
    if (!r.converged) throw SpectralError("Lanczos iteration did not converge in " + std::to_string(r.iterations) + " steps");
    W.lambda_max = r.value;
    W.eigenvector = r.vector;
    W.iterations = r.iterations;
    W.method = "lanczos";
  }
  W.eigenvector /= W.eigenvector.norm();
  const Eigen::VectorXd Ax = A * W.eigenvector, Mx = P.M * W.eigenvector;
  W.residual = (Mx - W.lambda_max * Ax).norm() / Ax.norm();
  W.rayleigh = W.eigenvector.dot(Mx) / W.eigenvector.dot(Ax);
  W.c_w = std::sqrt(std::max(0., W.lambda_max));
  return W;
}

//------------------------------------------------------------------------------
// Studies
//------------------------------------------------------------------------------

WeberRow weber_row(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, BcFlavor flavor, bool include_flux,
                   const EigenOptions& opt, int level) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto L = build_layout(mesh, degree, policy, flavor);
  const auto P = assemble_forms(L, include_flux);
  const auto W = weber_constant(P, opt);
  WeberRow r;
  r.level = level;
  r.h = mesh.h;
  r.dofs = L.n_free();
  r.degree = degree;
  r.policy = policy.name();
  r.flavor = flavor;
  r.include_flux = include_flux;
  r.lambda_max = W.lambda_max;
  r.c_w = W.c_w;
  r.lambda_min_A = W.lambda_min_A;
  r.residual = W.residual;
  r.method = W.method;
  r.mesh_hash = mesh_content_hash(mesh);
  r.wall_ms = elapsed_ms(t0);
  return r;
}

StudyResult refinement_study(const StudyConfig& cfg) {
  if (cfg.levels < 2) throw SpectralError("a refinement study needs at least 2 levels");
  const int base = cfg.base_n > 0 ? cfg.base_n : (cfg.kind == DomainKind::solid_cube ? 2 : 3);
  StudyResult out;
  out.eta = cfg.eta;
  // eta must be one fixed function across the levels, so the checkerboard follows the coarsest grid
  if (out.eta && out.eta->is_checkerboard() && !(out.eta->block > 0.))
    out.eta->block = std::cbrt(gen_structured(cfg.kind, base).cells.front().volume);
  for (int k = 0; k < cfg.levels; ++k) {
    const int n = base << k;
    PolyMesh mesh = gen_structured(cfg.kind, n);
    if (out.eta) mesh = with_eta(mesh, *out.eta);
    const auto L = build_layout(mesh, cfg.degree, cfg.policy, cfg.flavor);
    if (L.n_free() > cfg.dof_cap) {
      out.truncated = true;
      out.notice = "level " + std::to_string(k) + " (n = " + std::to_string(n) + ") has " + std::to_string(L.n_free()) +
                   " free DOFs, above the cap of " + std::to_string(cfg.dof_cap) + "; study truncated";
      break;
    }
    WeberRow r = weber_row(mesh, cfg.degree, cfg.policy, cfg.flavor, cfg.include_flux, cfg.eigen, k);
    r.n = n;
    out.rows.push_back(r);
  }
  return out;
}

namespace {

// Eigenvalues of the Schur complement of A on the cell DOFs against the cell mass.
Eigen::VectorXd condensed_pencil(const HybridLayout& L, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
  const std::size_t ncell = L.mesh->n_cells() * L.cell_block;
  std::vector<Eigen::Index> ci, fi;
  for (std::size_t i = 0; i < L.n_free(); ++i) (L.free_to_full[i] < ncell ? ci : fi).push_back(Eigen::Index(i));
  const Eigen::MatrixXd Acc = A(ci, ci), Acf = A(ci, fi), Aff = A(fi, fi), Mcc = M(ci, ci);
  Eigen::LLT<Eigen::MatrixXd> llt(Aff);
  if (llt.info() != Eigen::Success) throw SpectralError("face block of A is not positive definite");
  const Eigen::MatrixXd S = Acc - Acf * llt.solve(Acf.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Mcc, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

DegeneracyReport degeneracy_probe(const HybridLayout& L, std::size_t dense_limit) {
  if (L.n_free() > dense_limit)
    throw BudgetError("degeneracy probe needs a dense eigensolve; " + std::to_string(L.n_free()) +
                      " free DOFs exceed the limit of " + std::to_string(dense_limit));
  const auto P = assemble_forms(L, true);
  DegeneracyReport rep;
  rep.n_free = P.n_free;
  rep.flux_rank = std::size_t(P.flux.cols());
  const Eigen::MatrixXd A0 = Eigen::MatrixXd(P.A_base), A1 = P.dense_A(), M = Eigen::MatrixXd(P.M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(A0, Eigen::EigenvaluesOnly), e1(A1, Eigen::EigenvaluesOnly);
  rep.lambda_min_without_flux = e0.eigenvalues()[0];
  rep.lambda_min_with_flux = e1.eigenvalues()[0];
  const Eigen::VectorXd m0 = condensed_pencil(L, A0, M), m1 = condensed_pencil(L, A1, M);
  const Eigen::Index n = m0.size();
  rep.mu_min_without_flux = m0[0];
  rep.mu_min_with_flux = m1[0];
  rep.mu_median_without_flux = n % 2 ? m0[n / 2] : 0.5 * (m0[n / 2 - 1] + m0[n / 2]);
  for (Eigen::Index i = 0; i < n; ++i)
    if (m0[i] < 1e-6 * rep.mu_median_without_flux) ++rep.near_kernel_dim;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 6); ++i) {
    rep.smallest_without_flux.push_back(m0[i]);
    rep.smallest_with_flux.push_back(m1[i]);
  }
  return rep;
}

//------------------------------------------------------------------------------
// Variants
//------------------------------------------------------------------------------

namespace {

// Rows: eta-weighted pairings (eta v_T, grad phi_a)_T with the piecewise-linear hat functions
// phi_a of the fan tetrahedralization (nodes: vertices, face centers, cell centers).
Eigen::MatrixXd hat_gradient_constraints(const HybridLayout& L, const std::vector<long>& column_of,
                                         std::size_t ncols, bool drop_boundary) {
  const auto& mesh = *L.mesh;
  const std::size_t nv = mesh.vertices.size(), nf = mesh.n_faces();
  const std::size_t nnodes = nv + nf + mesh.n_cells();
  std::vector<char> boundary(nnodes, 0);
  for (const auto& F : mesh.faces)
    if (F.is_boundary()) {
      boundary[nv + F.id] = 1;
      for (std::size_t v : F.vertices) boundary[v] = 1;
    }
  std::vector<long> row_of(nnodes, -1);
  long nrows = 0;
  for (std::size_t a = 0; a < nnodes; ++a)
    if (!(drop_boundary && boundary[a])) row_of[a] = nrows++;

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nrows, Eigen::Index(ncols));
  const int l = L.degree;
  for (const auto& T : mesh.cells) {
    CellPolyContext ctx(mesh, T.id, l + 1);
    const Eigen::Index nb = Eigen::Index(ctx.n(l));
    const std::size_t off = L.cell_offset(T.id);
    for (std::size_t f : T.faces) {
      const auto& F = mesh.faces[f];
      for (std::size_t i = 0; i < F.vertices.size(); ++i) {
        const std::size_t va = F.vertices[i], vb = F.vertices[(i + 1) % F.vertices.size()];
        const std::array<std::size_t, 4> node{nv + nf + T.id, nv + f, va, vb};
        const std::array<Point3, 4> x{T.center, F.center, mesh.vertices[va], mesh.vertices[vb]};
        Eigen::Matrix3d J;
        for (int k = 0; k < 3; ++k) J.col(k) = x[std::size_t(k + 1)] - x[0];
        const Eigen::Matrix3d Jinv = J.inverse();
        std::array<Eigen::Vector3d, 4> grad;
        for (int k = 0; k < 3; ++k) grad[std::size_t(k + 1)] = Jinv.row(k).transpose();
        grad[0] = -(grad[1] + grad[2] + grad[3]);
        const QuadRule r = tetrahedron_rule(x[0], x[1], x[2], x[3], std::max(l, 1));
        const Eigen::VectorXd ints = ctx.basis().values(r.points).leftCols(nb).transpose() * r.weights;
        for (int a = 0; a < 4; ++a) {
          const long row = row_of[node[std::size_t(a)]];
          if (row < 0) continue;
          for (int c = 0; c < 3; ++c)
            for (Eigen::Index j = 0; j < nb; ++j) {
              const long col = column_of[off + std::size_t(c) * std::size_t(nb) + std::size_t(j)];
              if (col >= 0) G(row, col) += T.eta * grad[std::size_t(a)][c] * ints[j];
            }
        }
      }
    }
  }
  return G;
}

}  // namespace

VariantResult variant_constant(const PolyMesh& mesh, int degree, const FaceSpacePolicy& policy, Variant variant,
                               bool constrained, std::size_t dense_limit) {
  const BcFlavor bc = variant == Variant::first ? BcFlavor::tangential : BcFlavor::none;
  const auto L = build_layout(mesh, degree, policy, bc);
  // curl-only space: free cell and tangential DOFs
  std::vector<long> column_of(L.n_total, -1);
  std::size_t nsub = 0;
  for (std::size_t t = 0; t < mesh.n_cells(); ++t)
    for (std::size_t i = 0; i < L.cell_block; ++i) column_of[L.cell_offset(t) + i] = long(nsub++);
  for (std::size_t f = 0; f < mesh.n_faces(); ++f)
    for (std::size_t i = 0; i < L.tangential_block[f]; ++i) {
      const std::size_t d = L.tangential_offset(f) + i;
      if (!L.fixed[d]) column_of[d] = long(nsub++);
    }
  if (nsub > dense_limit)
    throw BudgetError("variant constant needs a dense eigensolve; " + std::to_string(nsub) + " DOFs exceed the limit of " +
                      std::to_string(dense_limit));
  const auto forms = assemble_local_forms(L);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(Eigen::Index(nsub), Eigen::Index(nsub)), R = M;
  for (const auto& lf : forms)
    for (std::size_t i = 0; i < lf.dofs.size(); ++i) {
      const long a = column_of[lf.dofs[i]];
      if (a < 0) continue;
      for (std::size_t j = 0; j < lf.dofs.size(); ++j) {
        const long b = column_of[lf.dofs[j]];
        if (b < 0) continue;
        M(a, b) += lf.mass(Eigen::Index(i), Eigen::Index(j));
        R(a, b) += mesh.eta_max * (lf.curl_vol(Eigen::Index(i), Eigen::Index(j)) + lf.s_curl(Eigen::Index(i), Eigen::Index(j)));
      }
    }

  VariantResult out;
  Eigen::MatrixXd N = Eigen::MatrixXd::Identity(Eigen::Index(nsub), Eigen::Index(nsub));
  if (constrained) {
    const Eigen::MatrixXd G = hat_gradient_constraints(L, column_of, nsub, variant == Variant::first);
    out.constraint_rows = std::size_t(G.rows());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G.transpose());
    qr.setThreshold(1e-10);
    out.constraint_rank = std::size_t(qr.rank());
    const Eigen::MatrixXd Q = qr.householderQ();
    N = Q.rightCols(Q.cols() - qr.rank());
    const double gn = std::max(G.norm(), 1e-300);
    out.constraint_residual = N.cols() > 0 ? (G * N).cwiseAbs().maxCoeff() / gn : 0.;
  }
  out.n_space = std::size_t(N.cols());
  const FormRatio fr = form_ratio(N.transpose() * M * N, N.transpose() * R * N);
  out.kernel_violation = fr.kernel_violation;
  out.bounded = fr.kernel_ok;
  out.constant = fr.kernel_ok ? std::sqrt(fr.sup) : std::numeric_limits<double>::infinity();
  return out;
}

NormEquivalence norm_equivalence(const QuadraticFormPair& P, const EigenOptions& opt) {
  if (P.n_free == 0) throw SpectralError("no free degrees of freedom");
  NormEquivalence ne;
  if (use_dense(P.n_free, opt)) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(P.dense_A(), Eigen::MatrixXd(P.X), Eigen::EigenvaluesOnly);
    ne.lower = es.eigenvalues().minCoeff();
    ne.upper = es.eigenvalues().maxCoeff();
    return ne;
  }
  const SparseMatrix A = P.A();
  const auto up = lanczos_largest(A, P.X, opt), down = lanczos_largest(P.X, A, opt);
  if (!up.converged || !down.converged) throw SpectralError("Lanczos iteration did not converge for the norm equivalence");
  ne.upper = up.value;
  ne.lower = 1. / down.value;
  return ne;
}

}  // namespace weberlab
