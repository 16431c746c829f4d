#include <doctest.h>

#include <weberlab/koszul.hpp>

#include <cmath>
#include <random>

using namespace weberlab;

namespace {

std::size_t binom(int n, int k) {
  if (k < 0 || n < k) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * std::size_t(n - k + i) / std::size_t(i);
  return r;
}
// dim P^k in d variables by the binomial formula
std::size_t pd(int d, int k) { return k < 0 ? 0 : binom(k + d, d); }

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& g) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = nd(g);
  return v;
}

}  // namespace

TEST_CASE("subspace dimensions and direct sums for degrees 0 to 4") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  for (int l = 0; l <= 4; ++l) {
    CellPolyContext ctx(m, 0, l + 1);
    auto s = build_cell_subspaces(ctx, l);
    CHECK(std::size_t(s.G.cols()) == pd(3, l + 1) - 1);
    CHECK(std::size_t(s.Gc.cols()) == 3 * pd(3, l) - (pd(3, l + 1) - 1));
    CHECK(std::size_t(s.Rc.cols()) == pd(3, l - 1));
    CHECK(std::size_t(s.R.cols() + s.Rc.cols()) == 3 * pd(3, l));
    CHECK(s.cond_G_Gc < 1e8);
    CHECK(s.cond_R_Rc < 1e8);
    FacePolyContext fctx(m, m.cells[0].faces[0], l + 1);
    auto fs = build_face_subspaces(fctx, l);
    CHECK(std::size_t(fs.RF.cols()) == pd(2, l + 1) - 1);
    CHECK(std::size_t(fs.RcF.cols()) == pd(2, l - 1));
    CHECK(fs.cond < 1e8);
  }
  CellPolyContext c1(m, 0, 2);
  auto s1 = build_cell_subspaces(c1, 1);
  CHECK(s1.G.cols() == 9);
  CHECK(s1.Gc.cols() == 3);
  CHECK(s1.R.cols() == 11);
  CHECK(s1.Rc.cols() == 1);
  CellPolyContext c0(m, 0, 1);
  auto s0 = build_cell_subspaces(c0, 0);
  CHECK(s0.G.cols() == 3);
  CHECK(s0.Gc.cols() == 0);
  CHECK(s0.R.cols() == 3);
  CHECK(s0.Rc.cols() == 0);
}

TEST_CASE("rot of the square of the first frame coordinate") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  FacePolyContext fctx(m, 2, 2);
  const auto& F = m.faces[2];
  auto xi = [&](const Point3& x) { return (x - F.center).dot(F.tangent1); };
  Eigen::VectorXd samples(fctx.rule().size());
  for (Eigen::Index q = 0; q < samples.size(); ++q) samples[q] = std::pow(xi(fctx.rule().points.col(q)), 2);
  Eigen::VectorXd w = fctx.project_samples(samples, 2);
  Eigen::VectorXd r = fctx.rot(2, 1) * w;
  const Eigen::Index n1 = Eigen::Index(fctx.n(1));
  Eigen::MatrixXd vals = fctx.values().leftCols(n1);
  Eigen::VectorXd first = vals * r.head(n1), second = vals * r.tail(n1);
  for (Eigen::Index q = 0; q < samples.size(); ++q) {
    CHECK(std::abs(first[q]) <= 1e-13);
    CHECK(std::abs(second[q] + 2 * xi(fctx.rule().points.col(q))) <= 1e-13);
  }
}

TEST_CASE("inverse maps on closed-form inputs") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  const Point3 xt = m.cells[1].center;
  CellPolyContext ctx(m, 1, 3);
  const Eigen::Index n0 = Eigen::Index(ctx.n(0)), n1 = Eigen::Index(ctx.n(1));
  // Curl^{-1}(e_z) = e_z x (x - x_T) / 2 at l = 1
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3 * n0);
  Eigen::VectorXd one = ctx.project_samples(Eigen::VectorXd::Ones(ctx.rule().size()), 0);
  c.segment(2 * n0, n0) = one;
  Eigen::VectorXd v = curl_inverse(ctx, 1, c);
  Eigen::MatrixXd vals = evaluate_vector_field(ctx.values().leftCols(n1), v);
  for (Eigen::Index q = 0; q < vals.cols(); ++q) {
    Point3 r = ctx.rule().points.col(q) - xt;
    Eigen::Vector3d ex = 0.5 * Point3::UnitZ().cross(r);
    CHECK((vals.col(q) - ex).norm() <= 1e-12);
  }
  CHECK(curl_inverse(ctx, 1, Eigen::VectorXd::Zero(3 * n0)).norm() == 0.);
  // Div^{-1}(1) = (x - x_T)/3
  Eigen::VectorXd d = div_inverse(ctx, 1, one);
  Eigen::MatrixXd dv = evaluate_vector_field(ctx.values().leftCols(n1), d);
  for (Eigen::Index q = 0; q < dv.cols(); ++q)
    CHECK((dv.col(q) - (ctx.rule().points.col(q) - xt) / 3.).norm() <= 1e-12);
  CHECK(div_inverse(ctx, 1, Eigen::VectorXd::Zero(n0)).norm() == 0.);
  // ||(x - x_T)/3|| <= h_T / 3
  CHECK(d.norm() <= m.cells[1].diameter / 3.);
}

TEST_CASE("random inverse-map round trips and exact sequences") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  std::mt19937 gen(11);
  for (int l = 1; l <= 4; ++l) {
    CellPolyContext ctx(m, 6, l + 1);
    // c in R^{l-1}: curl of a random element of P^l^3
    Eigen::VectorXd c = ctx.curl(l, l - 1) * random_vector(3 * Eigen::Index(ctx.n(l)), gen);
    Eigen::VectorXd v = curl_inverse(ctx, l, c);
    CHECK((ctx.curl(l, l - 1) * v - c).norm() <= 1e-10 * c.norm());
    // result lies in Gc^l
    auto s = build_cell_subspaces(ctx, l);
    CHECK((v - s.Gc * (s.Gc.transpose() * v)).norm() <= 1e-10 * v.norm());
    Eigen::VectorXd d = random_vector(Eigen::Index(ctx.n(l - 1)), gen);
    Eigen::VectorXd r = div_inverse(ctx, l, d);
    CHECK((ctx.div(l, l - 1) * r - d).norm() <= 1e-10 * d.norm());
    CHECK((r - s.Rc * (s.Rc.transpose() * r)).norm() <= 1e-10 * r.norm());
    // Curl on Gc is injective onto R^{l-1}; Div on Rc is bijective onto P^{l-1}
    auto dims_prev = koszul_dimensions(l - 1);
    CHECK(std::size_t(range_basis(ctx.curl(l, l - 1) * s.Gc).cols()) == std::size_t(s.Gc.cols()));
    CHECK(std::size_t(s.Gc.cols()) == dims_prev.R);
    CHECK(std::size_t(range_basis(ctx.div(l, l - 1) * s.Rc).cols()) == ctx.n(l - 1));
    // a non-image input is rejected
    if (l >= 2) {
      Eigen::VectorXd bad = ctx.grad(l, l - 1) * random_vector(Eigen::Index(ctx.n(l)), gen);
      CHECK_THROWS_AS(curl_inverse(ctx, l, bad), KoszulError);
    }
  }
}

TEST_CASE("Div inverse operator norm is at most two thirds of the diameter") {
  for (int n : {1, 2, 3}) {
    auto m = gen_structured(DomainKind::solid_cube, n);
    for (int l = 1; l <= 4; ++l) {
      CellPolyContext ctx(m, 0, l);
      double nrm = div_inverse_norm(ctx, l);
      CHECK(nrm > 0.);
      CHECK(nrm <= 2. / 3. * m.cells[0].diameter * (1. + 1e-9));
    }
  }
}

TEST_CASE("Curl inverse scaled norm is refinement invariant on cubes") {
  for (int l = 1; l <= 3; ++l) {
    std::vector<double> v;
    for (int n : {2, 4, 8}) {
      auto m = gen_structured(DomainKind::solid_cube, n);
      CellPolyContext ctx(m, m.n_cells() / 2, l);
      v.push_back(curl_inverse_norm(ctx, l) / m.cells[m.n_cells() / 2].diameter);
    }
    CHECK(*std::max_element(v.begin(), v.end()) <= 1.01 * *std::min_element(v.begin(), v.end()));
  }
}

TEST_CASE("trace identities on every face") {
  auto m = gen_structured(DomainKind::solid_cube, 1);
  for (int l = 0; l <= 2; ++l) {
    CellPolyContext ctx(m, 0, l + 1);
    auto reps = verify_trace_identities(ctx, l);
    CHECK(reps.size() == 6);
    for (const auto& r : reps) {
      CHECK(r.ok);
      CHECK(r.rotated_rank == koszul_dimensions(l).RF);
      CHECK(r.normal_rank == pd(2, l));
    }
  }
  auto h = gen_structured(DomainKind::hollow_cube, 3);
  CellPolyContext ctx(h, 4, 3);
  for (const auto& r : verify_trace_identities(ctx, 2)) CHECK(r.ok);
}

TEST_CASE("range basis thresholds") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  CHECK(range_basis(a).cols() == 2);
  CHECK(range_basis(Eigen::MatrixXd::Zero(4, 2)).cols() == 0);
  CHECK(range_basis(Eigen::MatrixXd(5, 0)).rows() == 5);
}
