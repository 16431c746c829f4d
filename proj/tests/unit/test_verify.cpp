#include <doctest.h>

#include <weberlab/koszul.hpp>
#include <weberlab/verify.hpp>

using namespace weberlab;

TEST_CASE("suites pass on a structured cube") {
  auto m = with_eta(gen_structured(DomainKind::solid_cube, 2), EtaSpec::checkerboard(1., 10.));
  VerifyOptions o;
  o.max_degree = 1;
  o.samples = 4;
  auto k = verify_koszul(m, o);
  CHECK(k.ok());
  // 6 dimension/conditioning checks, 2 face checks, traces, and the Div inverse bound from degree 1
  CHECK(k.rows.size() == m.n_cells() * (9 + 10));
  auto s = verify_stab(m, o);
  CHECK(s.ok());
  CHECK(s.rows.size() == m.n_cells() * 2 * 2 * 4);
  auto r = verify_reconstruct(m, o);
  CHECK(r.ok());
  CHECK(r.failing_cells().empty());
}

TEST_CASE("an illegal face space is reported with its cells") {
  auto m = gen_structured(DomainKind::solid_cube, 2);
  FaceSpacePolicy illegal;
  illegal.kind = FaceSpacePolicy::Kind::custom;
  illegal.custom = [](const FaceSubspaces& fs) { return Eigen::MatrixXd(fs.RF.leftCols(fs.RF.cols() - 1)); };
  VerifyOptions o;
  o.max_degree = 1;
  o.samples = 2;
  o.policies = {illegal};
  auto s = verify_stab(m, o);
  CHECK_FALSE(s.ok());
  CHECK(s.failing_cells().size() == m.n_cells());
  bool jump_failed = false;
  for (const auto& row : s.rows)
    if (!row.pass && row.check == "jump control kernel violation") jump_failed = true;
  CHECK(jump_failed);
}
