// Orthonormal polynomial bases, projectors and face traces.

#include <weberlab/polybasis.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace weberlab {

std::size_t poly_dim(int d, int k) {
  if (k < 0) return 0;
  const std::size_t K = std::size_t(k);
  if (d == 1) return K + 1;
  if (d == 2) return (K + 1) * (K + 2) / 2;
  return (K + 1) * (K + 2) * (K + 3) / 6;
}

namespace {

std::vector<std::array<int, 3>> graded_exponents(int vars, int degree) {
  std::vector<std::array<int, 3>> out;
  for (int k = 0; k <= degree; ++k) {
    if (vars == 2) {
      for (int a = k; a >= 0; --a) out.push_back({a, k - a, 0});
    } else {
      for (int a = k; a >= 0; --a)
        for (int b = k - a; b >= 0; --b) out.push_back({a, b, k - a - b});
    }
  }
  return out;
}

}  // namespace

PolyBasis PolyBasis::cell(const PolyMesh& mesh, std::size_t t, int degree, int quad_degree) {
  if (degree < 0) throw std::invalid_argument("polynomial degree must be non-negative");
  const auto& T = mesh.cells.at(t);
  PolyBasis b;
  b.vars_ = 3;
  b.degree_ = degree;
  b.center_ = T.center;
  b.scale_ = T.diameter;
  b.frame_ = Eigen::Matrix3d::Identity();
  b.exponents_ = graded_exponents(3, degree);
  b.orthonormalize(cell_rule(mesh, t, quad_degree < 0 ? 2 * degree : quad_degree));
  return b;
}

PolyBasis PolyBasis::face(const PolyMesh& mesh, std::size_t f, int degree, int quad_degree) {
  if (degree < 0) throw std::invalid_argument("polynomial degree must be non-negative");
  const auto& F = mesh.faces.at(f);
  PolyBasis b;
  b.vars_ = 2;
  b.degree_ = degree;
  b.center_ = F.center;
  b.scale_ = F.diameter;
  b.frame_.row(0) = F.tangent1.transpose();
  b.frame_.row(1) = F.tangent2.transpose();
  b.frame_.row(2) = F.normal.transpose();
  b.exponents_ = graded_exponents(2, degree);
  b.orthonormalize(face_rule(mesh, f, quad_degree < 0 ? 2 * degree : quad_degree));
  return b;
}

Eigen::MatrixXd PolyBasis::local_coordinates(const Eigen::Matrix3Xd& pts) const {
  Eigen::Matrix3Xd rel = (pts.colwise() - center_) / scale_;
  return (frame_ * rel).topRows(vars_);
}

Eigen::MatrixXd PolyBasis::monomials(const Eigen::MatrixXd& xi) const {
  const Eigen::Index np = xi.cols();
  // powers[a](q, e) = xi(a, q)^e
  std::array<Eigen::MatrixXd, 3> powers;
  for (int a = 0; a < vars_; ++a) {
    powers[a].resize(np, degree_ + 1);
    powers[a].col(0).setOnes();
    for (int e = 1; e <= degree_; ++e) powers[a].col(e) = powers[a].col(e - 1).cwiseProduct(xi.row(a).transpose());
  }
  Eigen::MatrixXd m(np, Eigen::Index(exponents_.size()));
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    Eigen::VectorXd col = powers[0].col(exponents_[j][0]);
    for (int a = 1; a < vars_; ++a) col = col.cwiseProduct(powers[a].col(exponents_[j][a]));
    m.col(Eigen::Index(j)) = col;
  }
  return m;
}

void PolyBasis::orthonormalize(const QuadRule& rule) {
  const Eigen::MatrixXd m = monomials(local_coordinates(rule.points));
  const Eigen::MatrixXd g = weighted_gram(m, rule.weights);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  raw_condition_ = es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
  const Eigen::Index n = g.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::MatrixXd gram = weighted_gram(m * c.transpose(), rule.weights);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("polynomial Gram matrix is numerically singular (condition " +
                               std::to_string(raw_condition_) + ")");
    Eigen::MatrixXd linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
    linv.triangularView<Eigen::StrictlyUpper>().setZero();
    c = linv * c;
  }
  coeffs_ = c;
}

Eigen::MatrixXd PolyBasis::values(const Eigen::Matrix3Xd& pts) const {
  return monomials(local_coordinates(pts)) * coeffs_.transpose();
}

std::array<Eigen::MatrixXd, 3> PolyBasis::gradients(const Eigen::Matrix3Xd& pts) const {
  const Eigen::MatrixXd xi = local_coordinates(pts);
  const Eigen::Index np = xi.cols();
  std::array<Eigen::MatrixXd, 3> powers;
  for (int a = 0; a < vars_; ++a) {
    powers[a].resize(np, degree_ + 1);
    powers[a].col(0).setOnes();
    for (int e = 1; e <= degree_; ++e) powers[a].col(e) = powers[a].col(e - 1).cwiseProduct(xi.row(a).transpose());
  }
  std::array<Eigen::MatrixXd, 3> out;
  for (int d = 0; d < 3; ++d) out[d] = Eigen::MatrixXd::Zero(np, Eigen::Index(dim()));
  for (int d = 0; d < vars_; ++d) {
    Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(np, Eigen::Index(exponents_.size()));
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
      const auto& e = exponents_[j];
      if (e[d] == 0) continue;
      Eigen::VectorXd col = Eigen::VectorXd::Constant(np, double(e[d]) / scale_);
      for (int a = 0; a < vars_; ++a) col = col.cwiseProduct(powers[a].col(a == d ? e[a] - 1 : e[a]));
      dm.col(Eigen::Index(j)) = col;
    }
    out[d] = dm * coeffs_.transpose();
  }
  return out;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& values, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd g = values.transpose() * weights.asDiagonal() * values;
  return 0.5 * (g + g.transpose());
}

//------------------------------------------------------------------------------
// Projector
//------------------------------------------------------------------------------

Projector::Projector(const PolyBasis& basis, QuadRule rule, std::size_t dim)
    : rule_(std::move(rule)), dim_(dim) {
  if (dim > basis.dim()) throw std::invalid_argument("projector dimension exceeds basis dimension");
  values_ = basis.values(rule_.points).leftCols(Eigen::Index(dim));
  gram_ = weighted_gram(values_, rule_.weights);
  gram_llt_.compute(gram_);
}

Eigen::VectorXd Projector::project(const Eigen::VectorXd& samples) const {
  return gram_llt_.solve(values_.transpose() * rule_.weights.cwiseProduct(samples));
}

Eigen::VectorXd Projector::project_vector(const Eigen::MatrixXd& samples) const {
  const Eigen::Index n = Eigen::Index(dim_);
  Eigen::VectorXd out(samples.rows() * n);
  for (Eigen::Index c = 0; c < samples.rows(); ++c) out.segment(c * n, n) = project(samples.row(c).transpose());
  return out;
}

Eigen::VectorXd Projector::project(const std::function<double(const Point3&)>& f) const {
  Eigen::VectorXd s(rule_.size());
  for (Eigen::Index q = 0; q < rule_.size(); ++q) s[q] = f(rule_.points.col(q));
  return project(s);
}

Eigen::VectorXd Projector::project_vector(const std::function<Eigen::VectorXd(const Point3&)>& f,
                                          int components) const {
  Eigen::MatrixXd s(components, rule_.size());
  for (Eigen::Index q = 0; q < rule_.size(); ++q) s.col(q) = f(rule_.points.col(q));
  return project_vector(s);
}

Eigen::VectorXd Projector::evaluate(const Eigen::VectorXd& coeffs) const { return values_ * coeffs; }

Eigen::MatrixXd Projector::evaluate_vector(const Eigen::VectorXd& coeffs, int components) const {
  const Eigen::Index n = Eigen::Index(dim_);
  Eigen::MatrixXd out(components, rule_.size());
  for (int c = 0; c < components; ++c) out.row(c) = (values_ * coeffs.segment(c * n, n)).transpose();
  return out;
}

//------------------------------------------------------------------------------
// Traces
//------------------------------------------------------------------------------

Eigen::MatrixXd evaluate_vector_field(const Eigen::MatrixXd& values, const Eigen::VectorXd& coeffs) {
  const Eigen::Index n = coeffs.size() / 3;
  Eigen::MatrixXd out(3, values.rows());
  for (int c = 0; c < 3; ++c) out.row(c) = (values.leftCols(n) * coeffs.segment(c * n, n)).transpose();
  return out;
}

FaceTrace trace_evaluate(const PolyMesh& mesh, std::size_t t, std::size_t f, const PolyBasis& cell_basis,
                         const Eigen::VectorXd& coeffs, bool vector, const Eigen::Matrix3Xd& face_pts) {
  mesh.local_face_index(t, f);  // throws if not incident
  const auto& F = mesh.faces[f];
  const Eigen::MatrixXd vals = cell_basis.values(face_pts);
  FaceTrace tr;
  if (!vector) {
    tr.scalar = vals.leftCols(coeffs.size()) * coeffs;
    return tr;
  }
  const Eigen::MatrixXd v = evaluate_vector_field(vals, coeffs);
  const Eigen::RowVectorXd a = F.tangent1.transpose() * v, b = F.tangent2.transpose() * v;
  tr.rotated.resize(2, v.cols());
  tr.rotated.row(0) = b;
  tr.rotated.row(1) = -a;
  tr.tangential.resize(2, v.cols());
  tr.tangential.row(0) = a;
  tr.tangential.row(1) = b;
  tr.normal = (F.normal.transpose() * v).transpose();
  return tr;
}

}  // namespace weberlab
