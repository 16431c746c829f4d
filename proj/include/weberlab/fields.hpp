// Analytic vector polynomials with exact curl and divergence, used to drive consistency checks.
#ifndef WEBERLAB_FIELDS_HPP
#define WEBERLAB_FIELDS_HPP

#include <weberlab/mesh.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace weberlab {

// v(x) = sum_a c_a ((x - x0) / s)^a over total degree <= degree
class PolynomialField {
public:
  PolynomialField(int degree, const Point3& center, double scale, const Eigen::Matrix3Xd& coefficients);
  // Coefficients drawn from a standard normal distribution.
  static PolynomialField random(int degree, const Point3& center, double scale, std::uint64_t seed);

  int degree() const { return degree_; }
  Eigen::Vector3d value(const Point3& x) const;
  Eigen::Matrix3d jacobian(const Point3& x) const;  // J(i, j) = d v_i / d x_j
  Eigen::Vector3d curl(const Point3& x) const;
  double div(const Point3& x) const;

private:
  int degree_;
  Point3 center_;
  double scale_;
  std::vector<std::array<int, 3>> exps_;
  Eigen::Matrix3Xd coef_;
};

}  // namespace weberlab

#endif
