#include <doctest.h>

#include <weberlab/hybridspace.hpp>

#include <cmath>
#include <random>

using namespace weberlab;

namespace {

// Random vector polynomial of total degree <= l written in raw monomials around x0.
struct RandomPoly {
  int l;
  Point3 x0;
  std::vector<std::array<int, 3>> exps;
  Eigen::MatrixXd coef;  // 3 x nexp

  RandomPoly(int degree, const Point3& center, std::mt19937& g) : l(degree), x0(center) {
    for (int a = 0; a <= l; ++a)
      for (int b = 0; a + b <= l; ++b)
        for (int c = 0; a + b + c <= l; ++c) exps.push_back({a, b, c});
    std::normal_distribution<double> nd;
    coef.resize(3, Eigen::Index(exps.size()));
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef.data()[i] = nd(g);
  }
  Eigen::Vector3d operator()(const Point3& x) const {
    Point3 d = (x - x0) * 4.;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < exps.size(); ++i)
      v += coef.col(Eigen::Index(i)) * std::pow(d.x(), exps[i][0]) * std::pow(d.y(), exps[i][1]) * std::pow(d.z(), exps[i][2]);
    return v;
  }
};

double rel_action(const Eigen::MatrixXd& s, const Eigen::VectorXd& v) {
  return (s * v).norm() / std::max(1e-300, s.norm() * v.norm());
}

}  // namespace

TEST_CASE("layout counts on a single cube") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  auto full = build_layout(m, 0, FaceSpacePolicy::full(), BcFlavor::none);
  CHECK(full.cell_block == 3);
  CHECK(full.n_total == 3 + 18);
  auto tang = build_layout(m, 0, FaceSpacePolicy::full(), BcFlavor::tangential);
  CHECK(tang.n_total - tang.n_free() == 12);
  auto nrm = build_layout(m, 0, FaceSpacePolicy::full(), BcFlavor::normal);
  CHECK(nrm.n_total - nrm.n_free() == 6);
  auto minimal = build_layout(m, 0, FaceSpacePolicy::minimal(), BcFlavor::none);
  for (std::size_t f = 0; f < 6; ++f) CHECK(minimal.tangential_block[f] == 2);
  auto m1 = build_layout(m, 1, FaceSpacePolicy::minimal(), BcFlavor::none);
  auto f1 = build_layout(m, 1, FaceSpacePolicy::full(), BcFlavor::none);
  auto t1 = build_layout(m, 1, FaceSpacePolicy::trimmed(1), BcFlavor::none);
  CHECK(m1.tangential_block[0] == 5);
  CHECK(f1.tangential_block[0] == 6);
  CHECK(t1.tangential_block[0] == 6);
  CHECK(build_layout(m, 2, FaceSpacePolicy::trimmed(1), BcFlavor::none).tangential_block[0] == 9 + 1);
  CHECK_THROWS_AS(build_layout(m, 5, FaceSpacePolicy::minimal(), BcFlavor::none), LayoutError);
  CHECK_THROWS_AS(build_layout(m, 1, FaceSpacePolicy::trimmed(2), BcFlavor::none), LayoutError);
  // offsets partition the index range
  auto m2 = gen_structured(DomainKind::solid_cube, 2);
  auto L = build_layout(m2, 1, FaceSpacePolicy::minimal(), BcFlavor::tangential);
  std::size_t expect = m2.n_cells() * L.cell_block;
  for (std::size_t f = 0; f < m2.n_faces(); ++f) {
    CHECK(L.face_offset[f] == expect);
    expect += L.tangential_block[f] + L.normal_block;
  }
  CHECK(expect == L.n_total);
  CHECK(FaceSpacePolicy::parse("trimmed:1").trimmed_degree == 1);
  CHECK_THROWS_AS(FaceSpacePolicy::parse("trimmed:x"), LayoutError);
}

TEST_CASE("containment of R_F in every face space") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  for (int l = 0; l <= 3; ++l)
    for (auto pol : {FaceSpacePolicy::minimal(), FaceSpacePolicy::trimmed(l), FaceSpacePolicy::full()}) {
      auto L = build_layout(m, l, pol, BcFlavor::none);
      FacePolyContext fctx(m, 3, l + 1);
      auto fs = build_face_subspaces(fctx, l);
      const auto& Q = L.face_space[3];
      CHECK((Q * (Q.transpose() * fs.RF) - fs.RF).norm() <= 1e-12);
    }
}

TEST_CASE("reduction of polynomials") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  std::mt19937 g(5);
  for (int l = 0; l <= 2; ++l) {
    auto L = build_layout(m, l, FaceSpacePolicy::full(), BcFlavor::none);
    RandomPoly p(l, Point3(0.5, 0.5, 0.5), g);
    auto r = reduce(L, std::cref(p));
    CHECK_FALSE(r.forced_zero);
    PolyBasis b = PolyBasis::cell(m, 0, l + 1, 2 * l + 2);
    auto rule = cell_rule(m, 0, 2 * l + 2);
    Eigen::MatrixXd vals = evaluate_vector_field(b.values(rule.points).leftCols(Eigen::Index(b.dim(l))),
                                                 r.full.head(Eigen::Index(L.cell_block)));
    for (Eigen::Index q = 0; q < rule.size(); ++q) CHECK((vals.col(q) - p(rule.points.col(q))).norm() <= 1e-11 * (1. + vals.col(q).norm()));
  }
  // v = x - x0: tangential DOFs equal v x n exactly
  auto L = build_layout(m, 1, FaceSpacePolicy::full(), BcFlavor::none);
  auto v = [](const Point3& x) { return Eigen::Vector3d(x); };
  auto r = reduce(L, v);
  for (const auto& F : m.faces) {
    PolyBasis fb = PolyBasis::face(m, F.id, 2, 4);
    auto fr = face_rule(m, F.id, 4);
    Eigen::MatrixXd vals = fb.values(fr.points).leftCols(3);
    Eigen::VectorXd y = L.face_space[F.id] * r.full.segment(Eigen::Index(L.tangential_offset(F.id)), 6);
    for (Eigen::Index q = 0; q < fr.size(); ++q) {
      Eigen::Vector3d exn = Eigen::Vector3d(fr.points.col(q)).cross(F.normal);
      CHECK(std::abs(vals.row(q).dot(y.head(3)) - exn.dot(F.tangent1)) <= 1e-13);
      CHECK(std::abs(vals.row(q).dot(y.tail(3)) - exn.dot(F.tangent2)) <= 1e-13);
    }
  }
}

TEST_CASE("fields with vanishing tangential trace reduce without forced zeroing") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  auto L = build_layout(m, 1, FaceSpacePolicy::minimal(), BcFlavor::tangential);
  // gradient of a function vanishing on the boundary of the unit cube
  auto grad_bubble = [](const Point3& x) {
    auto b = [](double s) { return s * (1. - s); };
    auto db = [](double s) { return 1. - 2. * s; };
    return Eigen::Vector3d(db(x.x()) * b(x.y()) * b(x.z()), b(x.x()) * db(x.y()) * b(x.z()), b(x.x()) * b(x.y()) * db(x.z()));
  };
  auto r = reduce(L, grad_bubble, {10, std::nullopt});
  CHECK_FALSE(r.forced_zero);
  CHECK(r.max_forced <= 1e-14);
  auto bad = reduce(L, [](const Point3&) { return Eigen::Vector3d(1., 2., 3.); });
  CHECK(bad.forced_zero);
  for (std::size_t i = 0; i < L.n_total; ++i)
    if (L.fixed[i]) CHECK(bad.full[Eigen::Index(i)] == 0.);
}

TEST_CASE("stabilization vanishes on interpolated polynomials") {
  auto m = with_eta(gen_structured(DomainKind::solid_cube, 2), EtaSpec::checkerboard(1., 10.));
  std::mt19937 g(17);
  for (int l = 0; l <= 3; ++l)
    for (auto pol : {FaceSpacePolicy::minimal(), FaceSpacePolicy::trimmed(l), FaceSpacePolicy::full()}) {
      auto L = build_layout(m, l, pol, BcFlavor::none);
      for (std::size_t t : {std::size_t(0), std::size_t(5)}) {
        auto lf = assemble_local_forms(L, t);
        for (int k = 0; k < 3; ++k) {
          RandomPoly p(l, m.cells[t].center, g);
          Eigen::VectorXd ip = reduce_local(L, t, std::cref(p));
          CHECK(rel_action(lf.s_curl, ip) <= 1e-11);
          CHECK(rel_action(lf.s_div, ip) <= 1e-11);
        }
        // forms are symmetric positive semi-definite
        for (const auto* s : {&lf.s_curl, &lf.s_div, &lf.jump}) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*s, Eigen::EigenvaluesOnly);
          CHECK(es.eigenvalues().minCoeff() >= -1e-11 * s->norm());
          CHECK((*s - s->transpose()).norm() <= 1e-14 * s->norm());
        }
      }
    }
}

TEST_CASE("stabilization of a single face mode") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  auto L = build_layout(m, 1, FaceSpacePolicy::minimal(), BcFlavor::none);
  auto lf = assemble_local_forms(L, 3);
  const std::size_t f = m.cells[3].faces[2];
  const std::size_t pos = lf.tangential_pos[2] + 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(lf.dofs.size()));
  v[Eigen::Index(pos)] = 1.;
  CHECK(v.dot(lf.s_curl * v) == doctest::Approx(1. / m.faces[f].diameter).epsilon(1e-13));
  CHECK(v.dot(lf.s_div * v) == 0.);
  // normal mode
  Eigen::VectorXd w = Eigen::VectorXd::Zero(v.size());
  w[Eigen::Index(lf.normal_pos[2])] = 1.;
  CHECK(w.dot(lf.s_div * w) == doctest::Approx(1. / m.faces[f].diameter).epsilon(1e-13));
}

TEST_CASE("normal traces of cell polynomials need no projection") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  const int l = 2;
  CellPolyContext ctx(m, 2, l + 1);
  std::mt19937 g(2);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(3 * Eigen::Index(ctx.n(l)));
  for (auto& x : v) x = nd(g);
  for (std::size_t f : m.cells[2].faces) {
    FacePolyContext fctx(m, f, l + 1);
    auto tm = trace_matrices(ctx, fctx, l, l);
    Eigen::VectorXd projected = fctx.values().leftCols(Eigen::Index(fctx.n(l))) * (tm.normal * v);
    auto direct = trace_evaluate(m, 2, f, ctx.basis(), v, true, fctx.rule().points).normal;
    CHECK((projected - direct).cwiseAbs().maxCoeff() <= 1e-12 * v.norm());
  }
}

TEST_CASE("semi-norms of interpolated fields") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  for (int l : {0, 1}) {
    auto L = build_layout(m, l, FaceSpacePolicy::minimal(), BcFlavor::none);
    auto forms = assemble_local_forms(L);
    auto c = reduce(L, [](const Point3&) { return Eigen::Vector3d(0.3, -1., 2.); });
    auto s = seminorms(L, forms, c.full);
    CHECK(s.curl * s.curl <= 1e-13);
    CHECK(s.div * s.div <= 1e-13);
    CHECK(s.l2 == doctest::Approx(std::sqrt(0.09 + 1. + 4.)).epsilon(1e-12));
    auto z = seminorms(L, forms, Eigen::VectorXd::Zero(Eigen::Index(L.n_total)));
    CHECK(z.x == 0.);
  }
  auto L = build_layout(m, 1, FaceSpacePolicy::minimal(), BcFlavor::none);
  auto forms = assemble_local_forms(L);
  auto r = reduce(L, [](const Point3& x) { return Eigen::Vector3d(-x.y() / 2., x.x() / 2., 0.); });
  auto s = seminorms(L, forms, r.full);
  CHECK(s.div * s.div <= 1e-13);
  CHECK(s.curl == doctest::Approx(1.).epsilon(1e-12));
  // homogeneity and triangle inequality on random vectors
  std::mt19937 g(9);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd a(Eigen::Index(L.n_total)), b(Eigen::Index(L.n_total));
    for (auto& x : a) x = nd(g);
    for (auto& x : b) x = nd(g);
    auto sa = seminorms(L, forms, a), sb = seminorms(L, forms, b), sab = seminorms(L, forms, a + b);
    auto s3 = seminorms(L, forms, -3. * a);
    CHECK(s3.curl == doctest::Approx(3. * sa.curl).epsilon(1e-12));
    CHECK(s3.x == doctest::Approx(3. * sa.x).epsilon(1e-12));
    CHECK(sab.curl <= sa.curl + sb.curl + 1e-12);
    CHECK(sab.div <= sa.div + sb.div + 1e-12);
  }
}

TEST_CASE("flux functionals") {
  auto solid = gen_structured(DomainKind::solid_cube, 2);
  auto Ls = build_layout(solid, 0, FaceSpacePolicy::minimal(), BcFlavor::tangential);
  auto fs = flux_functionals(Ls, Eigen::VectorXd::Zero(Eigen::Index(Ls.n_total)));
  CHECK(fs.gamma.empty());
  CHECK(fs.sigma.empty());
  auto h = gen_structured(DomainKind::hollow_cube, 3);
  auto L = build_layout(h, 1, FaceSpacePolicy::minimal(), BcFlavor::tangential);
  FluxField one = [](const Point3&, std::size_t) { return 1.; };
  auto r = reduce(L, [](const Point3&) { return Eigen::Vector3d::Zero(); }, {-1, one});
  auto fv = flux_functionals(L, r.full);
  REQUIRE(fv.gamma.size() == 1);
  CHECK(fv.gamma[0] == doctest::Approx(2. / 3.).epsilon(1e-13));
  CHECK(flux_functionals(L, Eigen::VectorXd::Zero(Eigen::Index(L.n_total))).gamma[0] == 0.);
  // missing cutting surfaces are an error
  auto th = gen_structured(DomainKind::through_hole_cube, 3);
  auto in = to_input(th);
  in.sigma_sets.clear();
  auto th2 = build_mesh(in);
  auto L2 = build_layout(th2, 0, FaceSpacePolicy::minimal(), BcFlavor::normal);
  CHECK_THROWS_AS(flux_functionals(L2, Eigen::VectorXd::Zero(Eigen::Index(L2.n_total))), LayoutError);
}

TEST_CASE("boundary flavors fix the boundary traces") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  std::mt19937 g(1);
  std::normal_distribution<double> nd;
  for (auto bc : {BcFlavor::tangential, BcFlavor::normal}) {
    auto L = build_layout(m, 1, FaceSpacePolicy::minimal(), bc);
    Eigen::VectorXd free(Eigen::Index(L.n_free()));
    for (auto& x : free) x = nd(g);
    Eigen::VectorXd full = L.extend_from_free(free);
    CHECK((L.restrict_to_free(full) - free).norm() == 0.);
    for (const auto& F : m.faces) {
      if (!F.is_boundary()) continue;
      auto t = full.segment(Eigen::Index(L.tangential_offset(F.id)), Eigen::Index(L.tangential_block[F.id]));
      auto n = full.segment(Eigen::Index(L.normal_offset(F.id)), Eigen::Index(L.normal_block));
      if (bc == BcFlavor::tangential) {
        CHECK(t.norm() == 0.);
        CHECK(n.norm() > 0.);
      } else {
        CHECK(n.norm() == 0.);
        CHECK(t.norm() > 0.);
      }
    }
  }
}

TEST_CASE("tangential jump control constants") {
  std::vector<double> cts;
  for (int n : {2, 4, 8}) {
    auto m = gen_structured(DomainKind::solid_cube, n);
    auto L = build_layout(m, 1, FaceSpacePolicy::minimal(), BcFlavor::none);
    auto jc = jump_control_constant(assemble_local_forms(L, 0));
    CHECK(jc.kernel_ok);
    CHECK(std::isfinite(jc.constant));
    cts.push_back(jc.constant);
  }
  CHECK(*std::max_element(cts.begin(), cts.end()) <= 1.01 * *std::min_element(cts.begin(), cts.end()));

  auto m = gen_structured(DomainKind::solid_cube, 2);
  for (int l = 0; l <= 3; ++l) {
    auto Lm = build_layout(m, l, FaceSpacePolicy::minimal(), BcFlavor::none);
    auto Lf = build_layout(m, l, FaceSpacePolicy::full(), BcFlavor::none);
    auto cm = jump_control_constant(assemble_local_forms(Lm, 1));
    auto cf = jump_control_constant(assemble_local_forms(Lf, 1));
    CHECK(cm.kernel_ok);
    CHECK(cf.kernel_ok);
    CHECK(cf.constant <= cm.constant * (1. + 1e-12));
  }
  // a face space strictly inside R_F breaks the kernel containment
  FaceSpacePolicy illegal;
  illegal.kind = FaceSpacePolicy::Kind::custom;
  illegal.custom = [](const FaceSubspaces& fs) { return Eigen::MatrixXd(fs.RF.leftCols(fs.RF.cols() - 1)); };
  auto Li = build_layout(m, 1, illegal, BcFlavor::none);
  auto ci = jump_control_constant(assemble_local_forms(Li, 1));
  CHECK_FALSE(ci.kernel_ok);
  CHECK(ci.kernel_violation > 1e-6);
}
