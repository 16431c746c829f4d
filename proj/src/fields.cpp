#include <weberlab/fields.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace weberlab {

namespace {

double ipow(double x, int k) { return k <= 0 ? 1. : std::pow(x, k); }

}  // namespace

PolynomialField::PolynomialField(int degree, const Point3& center, double scale, const Eigen::Matrix3Xd& coefficients)
    : degree_(degree), center_(center), scale_(scale), coef_(coefficients) {
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c) exps_.push_back({a, b, c});
  if (coef_.cols() != Eigen::Index(exps_.size())) throw std::invalid_argument("PolynomialField: coefficient count mismatch");
}

PolynomialField PolynomialField::random(int degree, const Point3& center, double scale, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  const Eigen::Index n = Eigen::Index((degree + 1) * (degree + 2) * (degree + 3) / 6);
  Eigen::Matrix3Xd c(3, n);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = nd(g);
  return PolynomialField(degree, center, scale, c);
}

Eigen::Vector3d PolynomialField::value(const Point3& x) const {
  const Point3 d = (x - center_) / scale_;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < exps_.size(); ++i)
    v += coef_.col(Eigen::Index(i)) * (ipow(d.x(), exps_[i][0]) * ipow(d.y(), exps_[i][1]) * ipow(d.z(), exps_[i][2]));
  return v;
}

Eigen::Matrix3d PolynomialField::jacobian(const Point3& x) const {
  const Point3 d = (x - center_) / scale_;
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    const auto& e = exps_[i];
    for (int k = 0; k < 3; ++k) {
      if (e[k] == 0) continue;
      double g = e[k] / scale_;
      for (int j = 0; j < 3; ++j) g *= ipow(d[j], j == k ? e[j] - 1 : e[j]);
      J.col(k) += coef_.col(Eigen::Index(i)) * g;
    }
  }
  return J;
}

Eigen::Vector3d PolynomialField::curl(const Point3& x) const {
  const Eigen::Matrix3d J = jacobian(x);
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

double PolynomialField::div(const Point3& x) const { return jacobian(x).trace(); }

}  // namespace weberlab
