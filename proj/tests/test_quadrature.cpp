#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pbiharm/quadrature.hpp"

using pbiharm::make_quadrature;
using pbiharm::QuadratureRule;

namespace {

// Exact integral of x^a y^b over the reference triangle.
double tri_moment(int a, int b) {
  double v = 1.0;
  for (int i = 1; i <= b; ++i)
    v *= i;
  for (int i = a + 1; i <= a + b + 2; ++i)
    v /= i;
  return v;
}

}  // namespace

TEST_CASE("weights sum to the reference measures") {
  for (int deg : {2, 4, 6, 8, 10, 14}) {
    const QuadratureRule rule = make_quadrature(deg);
    double tri = 0.0, seg = 0.0;
    for (double w : rule.tri_weights)
      tri += w;
    for (double w : rule.seg_weights)
      seg += w;
    CHECK(tri == Catch::Approx(0.5).margin(1e-14));
    CHECK(seg == Catch::Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("monomials are integrated exactly up to the stated degree") {
  for (int deg : {2, 5, 8, 12}) {
    const QuadratureRule rule = make_quadrature(deg);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double sum = 0.0;
        for (int q = 0; q < rule.num_tri_points(); ++q)
          sum += rule.tri_weights[q] *
                 std::pow(rule.tri_points[q].x(), a) *
                 std::pow(rule.tri_points[q].y(), b);
        CHECK(sum == Catch::Approx(tri_moment(a, b)).margin(1e-12));
      }
    }
    for (int a = 0; a <= deg; ++a) {
      double sum = 0.0;
      for (int q = 0; q < rule.num_seg_points(); ++q)
        sum += rule.seg_weights[q] * std::pow(rule.seg_points[q], a);
      CHECK(sum == Catch::Approx(1.0 / (a + 1)).margin(1e-13));
    }
  }
}

TEST_CASE("points lie inside the reference domains") {
  const QuadratureRule rule = make_quadrature(9);
  for (const auto& p : rule.tri_points) {
    CHECK(p.x() >= 0.0);
    CHECK(p.y() >= 0.0);
    CHECK(p.x() + p.y() <= 1.0 + 1e-14);
  }
  for (double t : rule.seg_points) {
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }
}
