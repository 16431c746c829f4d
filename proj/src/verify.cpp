#include <weberlab/verify.hpp>

#include <weberlab/fields.hpp>
#include <weberlab/koszul.hpp>
#include <weberlab/parallel.hpp>
#include <weberlab/polybasis.hpp>
#include <weberlab/quadrature.hpp>
#include <weberlab/reconstruct.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

namespace weberlab {

bool VerifyReport::ok() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  return std::size_t(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.pass && !r.skipped; }));
}

std::vector<long> VerifyReport::failing_cells() const {
  std::set<long> s;
  for (const auto& r : rows)
    if (!r.pass && !r.skipped) s.insert(r.cell);
  return {s.begin(), s.end()};
}

namespace {

CheckRow row(const std::string& suite, const std::string& check, std::size_t t, int degree, const std::string& policy,
             double value, double limit) {
  CheckRow r;
  r.suite = suite;
  r.check = check;
  r.cell = long(t);
  r.degree = degree;
  r.policy = policy;
  r.value = value;
  r.limit = limit;
  r.pass = std::isfinite(value) && value <= limit;
  return r;
}

CheckRow skipped(const std::string& suite, std::size_t t) {
  CheckRow r;
  r.suite = suite;
  r.check = "star-shaped";
  r.cell = long(t);
  r.skipped = true;
  return r;
}

// Runs body per cell and concatenates the rows in cell order.
VerifyReport per_cell(const PolyMesh& mesh, const std::string& suite,
                      const std::function<void(std::size_t, std::vector<CheckRow>&)>& body) {
  std::vector<std::vector<CheckRow>> rows(mesh.n_cells());
  parallel_for(mesh.n_cells(), [&](std::size_t t) {
    if (!mesh.cells[t].star_shaped) {
      rows[t].push_back(skipped(suite, t));
      return;
    }
    body(t, rows[t]);
  });
  VerifyReport rep;
  for (auto& r : rows) rep.rows.insert(rep.rows.end(), r.begin(), r.end());
  return rep;
}

double count_mismatch(std::size_t got, std::size_t expected) { return got == expected ? 0. : 1.; }

std::uint64_t mix(std::uint64_t seed, std::size_t a, std::size_t b, std::size_t c) {
  std::seed_seq s{seed, std::uint64_t(a), std::uint64_t(b), std::uint64_t(c)};
  std::uint64_t out;
  s.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
  return out;
}

double rel_action(const Eigen::MatrixXd& s, const Eigen::VectorXd& v) {
  return (s * v).norm() / std::max(1e-300, s.norm() * v.norm());
}

}  // namespace

VerifyReport verify_koszul(const PolyMesh& mesh, const VerifyOptions& opt) {
  return per_cell(mesh, "koszul", [&](std::size_t t, std::vector<CheckRow>& out) {
    const double hT = mesh.cells[t].diameter;
    for (int l = 0; l <= opt.max_degree; ++l) {
      CellPolyContext ctx(mesh, t, l + 1);
      const auto s = build_cell_subspaces(ctx, l);
      const auto d = koszul_dimensions(l);
      out.push_back(row("koszul", "dim G", t, l, "", count_mismatch(std::size_t(s.G.cols()), d.G), 0.));
      out.push_back(row("koszul", "dim Gc", t, l, "", count_mismatch(std::size_t(s.Gc.cols()), d.Gc), 0.));
      out.push_back(row("koszul", "dim R", t, l, "", count_mismatch(std::size_t(s.R.cols()), d.R), 0.));
      out.push_back(row("koszul", "dim Rc", t, l, "", count_mismatch(std::size_t(s.Rc.cols()), d.Rc), 0.));
      out.push_back(row("koszul", "cond G+Gc", t, l, "", s.cond_G_Gc, 1e8));
      out.push_back(row("koszul", "cond R+Rc", t, l, "", s.cond_R_Rc, 1e8));
      std::size_t bad_faces = 0;
      double worst_face_cond = 1.;
      for (std::size_t f : mesh.cells[t].faces) {
        FacePolyContext fctx(mesh, f, l + 1);
        const auto fs = build_face_subspaces(fctx, l);
        if (std::size_t(fs.RF.cols()) != d.RF || std::size_t(fs.RcF.cols()) != d.RcF) ++bad_faces;
        worst_face_cond = std::max(worst_face_cond, fs.cond);
      }
      out.push_back(row("koszul", "dim RF, RcF (faces)", t, l, "", double(bad_faces), 0.));
      out.push_back(row("koszul", "cond RF+RcF (faces)", t, l, "", worst_face_cond, 1e8));
      std::size_t bad_traces = 0;
      for (const auto& r : verify_trace_identities(ctx, l))
        if (!r.ok) ++bad_traces;
      out.push_back(row("koszul", "trace identities", t, l, "", double(bad_traces), 0.));
      if (l >= 1)
        out.push_back(row("koszul", "Div inverse norm / (2/3 h_T)", t, l, "", div_inverse_norm(ctx, l) / (2. / 3. * hT),
                          1. + 1e-9));
    }
  });
}

VerifyReport verify_stab(const PolyMesh& mesh, const VerifyOptions& opt) {
  std::vector<HybridLayout> layouts;
  for (int l = 0; l <= opt.max_degree; ++l)
    for (const auto& pol : opt.policies) layouts.push_back(build_layout(mesh, l, pol, BcFlavor::none));
  return per_cell(mesh, "stab", [&](std::size_t t, std::vector<CheckRow>& out) {
    const auto& T = mesh.cells[t];
    for (std::size_t i = 0; i < layouts.size(); ++i) {
      const auto& L = layouts[i];
      const auto lf = assemble_local_forms(L, t);
      double sc = 0., sd = 0.;
      for (int k = 0; k < opt.samples; ++k) {
        const auto p = PolynomialField::random(L.degree, T.center, T.diameter, mix(opt.seed, t, i, std::size_t(k)));
        const Eigen::VectorXd ip = reduce_local(L, t, [&](const Point3& x) { return p.value(x); });
        sc = std::max(sc, rel_action(lf.s_curl, ip));
        sd = std::max(sd, rel_action(lf.s_div, ip));
      }
      const std::string pol = L.policy.name();
      out.push_back(row("stab", "s_Curl on interpolated polynomials", t, L.degree, pol, sc, 1e-11));
      out.push_back(row("stab", "s_Div on interpolated polynomials", t, L.degree, pol, sd, 1e-11));
      const auto jc = jump_control_constant(lf);
      out.push_back(row("stab", "jump control kernel violation", t, L.degree, pol, jc.kernel_violation, 1e-9));
      out.push_back(row("stab", "jump control constant", t, L.degree, pol, jc.kernel_ok ? jc.constant : INFINITY,
                        std::numeric_limits<double>::max()));
    }
  });
}

VerifyReport verify_reconstruct(const PolyMesh& mesh, const VerifyOptions& opt) {
  std::vector<HybridLayout> layouts;
  for (int l = 0; l <= opt.max_degree; ++l)
    for (const auto& pol : opt.policies) layouts.push_back(build_layout(mesh, l, pol, BcFlavor::none));
  return per_cell(mesh, "reconstruct", [&](std::size_t t, std::vector<CheckRow>& out) {
    const auto& T = mesh.cells[t];
    std::mt19937_64 gen(mix(opt.seed, t, 0, 0));
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < layouts.size(); ++i) {
      const auto& L = layouts[i];
      const int l = L.degree;
      const std::string pol = L.policy.name();
      const bool full = L.policy.kind == FaceSpacePolicy::Kind::full;
      for (int m = 0; m <= l; ++m) {
        const auto r = build_reconstructions(L, t, m, m);
        double rel = 0.;
        for (int k = 0; k < 3; ++k) {
          Eigen::VectorXd v(r.C.matrix.cols());
          for (auto& x : v) x = nd(gen);
          for (const auto* op : {&r.C, &r.D}) {
            const Eigen::VectorXd rhs = op->rhs * v;
            rel = std::max(rel, (op->mass * (op->matrix * v) - rhs).norm() / (1. + rhs.norm()));
          }
        }
        out.push_back(row("reconstruct", "defining relations", t, l, pol + " m=" + std::to_string(m), rel, 1e-11));

        const int K = std::max(l + 1, m);
        const int qd = 2 * (l + 2) + 4;
        Projector pr(PolyBasis::cell(mesh, t, K, qd), cell_rule(mesh, t, qd), poly_dim(3, m));
        double cd = 0., cc = 0.;
        for (int k = 0; k < opt.samples; ++k) {
          const auto p = PolynomialField::random(k % (l + 3), T.center, T.diameter, mix(opt.seed, t, i + 1000, std::size_t(k)));
          const Eigen::VectorXd iv = reduce_local(L, t, [&](const Point3& x) { return p.value(x); }, qd);
          const Eigen::VectorXd pd = pr.project([&](const Point3& x) { return T.eta * p.div(x); });
          cd = std::max(cd, (r.D.matrix * iv - pd).norm() / (1. + pd.norm()));
          if (full) {
            const Eigen::VectorXd pc = pr.project_vector([&](const Point3& x) { return Eigen::VectorXd(p.curl(x)); }, 3);
            cc = std::max(cc, (r.C.matrix * iv - pc).norm() / (1. + pc.norm()));
          }
        }
        out.push_back(row("reconstruct", "D commutation", t, l, pol + " p=" + std::to_string(m), cd, 1e-10));
        if (full) out.push_back(row("reconstruct", "C commutation", t, l, pol + " m=" + std::to_string(m), cc, 1e-10));
      }
    }
  });
}

}  // namespace weberlab
