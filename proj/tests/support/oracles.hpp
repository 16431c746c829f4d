// Independent exact oracles used by the tests.
//
// Monomial moments over tetrahedra (barycentric expansion) and polygons (boundary integral),
// evaluated in exact rational arithmetic.
//
#ifndef WEBERLAB_TEST_ORACLES_HPP
#define WEBERLAB_TEST_ORACLES_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <map>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using RPoint = std::array<Rational, 3>;

Rational factorial(int n);

// Exact integral of (x-c0)^a (y-c1)^b (z-c2)^c over the tetrahedron with the given vertices.
Rational tet_monomial_integral(const std::array<RPoint, 4>& v, std::array<int, 3> e, const RPoint& c = {0, 0, 0});

// Exact integral of x^a y^b over a simple polygon given counter-clockwise.
Rational polygon_monomial_integral(const std::vector<std::array<Rational, 2>>& poly, int a, int b);

double to_double(const Rational& r);

}  // namespace oracle

#endif
