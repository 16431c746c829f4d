#include "oracles.hpp"

namespace oracle {

Rational factorial(int n) {
  Rational r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace {

// polynomial in barycentric coordinates: exponent tuple -> coefficient
using Bary = std::map<std::array<int, 4>, Rational>;

Bary multiply(const Bary& p, const Bary& q) {
  Bary out;
  for (const auto& [ea, ca] : p)
    for (const auto& [eb, cb] : q) {
      std::array<int, 4> e;
      for (int i = 0; i < 4; ++i) e[i] = ea[i] + eb[i];
      out[e] += ca * cb;
    }
  return out;
}

}  // namespace

Rational tet_monomial_integral(const std::array<RPoint, 4>& v, std::array<int, 3> e, const RPoint& c) {
  Bary p{{{0, 0, 0, 0}, Rational(1)}};
  for (int d = 0; d < 3; ++d) {
    Bary lin;
    for (int i = 0; i < 4; ++i) {
      std::array<int, 4> ei{0, 0, 0, 0};
      ei[i] = 1;
      lin[ei] += v[i][d] - c[d];
    }
    for (int k = 0; k < e[d]; ++k) p = multiply(p, lin);
  }
  // 6|V| from the determinant
  RPoint a, b, w;
  for (int d = 0; d < 3; ++d) {
    a[d] = v[1][d] - v[0][d];
    b[d] = v[2][d] - v[0][d];
    w[d] = v[3][d] - v[0][d];
  }
  Rational det = a[0] * (b[1] * w[2] - b[2] * w[1]) - a[1] * (b[0] * w[2] - b[2] * w[0]) +
                 a[2] * (b[0] * w[1] - b[1] * w[0]);
  if (det < 0) det = -det;
  Rational sum = 0;
  for (const auto& [ex, coef] : p) {
    int tot = ex[0] + ex[1] + ex[2] + ex[3];
    Rational m = factorial(ex[0]) * factorial(ex[1]) * factorial(ex[2]) * factorial(ex[3]) / factorial(tot + 3);
    sum += coef * m;
  }
  return sum * det;
}

Rational polygon_monomial_integral(const std::vector<std::array<Rational, 2>>& poly, int a, int b) {
  // int_P x^a y^b = 1/(a+1) oint x^(a+1) y^b dy
  Rational total = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    // x(s) = p0 + s dx, y(s) = p1 + s dy, s in [0,1]; expand in powers of s
    std::vector<Rational> xs{p[0], q[0] - p[0]}, ys{p[1], q[1] - p[1]};
    std::vector<Rational> poly_s{Rational(1)};
    auto mul = [](const std::vector<Rational>& u, const std::vector<Rational>& w) {
      std::vector<Rational> r(u.size() + w.size() - 1, Rational(0));
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) r[i + j] += u[i] * w[j];
      return r;
    };
    for (int k = 0; k < a + 1; ++k) poly_s = mul(poly_s, xs);
    for (int k = 0; k < b; ++k) poly_s = mul(poly_s, ys);
    Rational integral = 0;
    for (std::size_t k = 0; k < poly_s.size(); ++k) integral += poly_s[k] / Rational(int(k) + 1);
    total += integral * (q[1] - p[1]);
  }
  return total / Rational(a + 1);
}

}  // namespace oracle
