#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pbiharm {

/// Gauss-Legendre nodes/weights on [0,1], exact for polynomials of degree
/// 2m-1. Nodes by Newton iteration on P_m, ascending order.
struct GaussSegment {
  std::vector<double> points;
  std::vector<double> weights;
  int exactness = 0;
};

inline GaussSegment gauss_segment(int npoints) {
  if (npoints < 1)
    throw std::invalid_argument("gauss_segment: need at least one point");

  GaussSegment rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  rule.exactness = 2 * npoints - 1;

  const int m = npoints;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    // Chebyshev-based initial guess for the i-th root of P_m on [-1,1].
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_m and P_m' by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= m; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15)
        break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; roots come out in descending order of x.
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[m - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[m - 1 - i] = 0.5 * w;
  }
  return rule;
}

inline GaussSegment segment_rule(int degree) {
  return gauss_segment(degree / 2 + 1);
}

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)} and on the unit
/// segment, exact to the stated polynomial degree. The triangle rule is a
/// collapsed (Duffy) tensor Gauss rule; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Eigen::Vector2d> tri_points;
  std::vector<double> tri_weights;
  std::vector<double> seg_points;
  std::vector<double> seg_weights;
  int exactness = 0;

  int num_tri_points() const { return static_cast<int>(tri_points.size()); }
  int num_seg_points() const { return static_cast<int>(seg_points.size()); }
};

inline QuadratureRule make_quadrature(int degree) {
  if (degree < 0)
    throw std::invalid_argument("make_quadrature: degree must be >= 0");

  QuadratureRule rule;
  rule.exactness = degree;

  // Duffy map (a,b) -> (a, b(1-a)) carries Jacobian (1-a); a polynomial of
  // total degree d becomes degree <= d+1 in a and <= d in b.
  const GaussSegment g = gauss_segment((degree + 3) / 2);
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    for (std::size_t j = 0; j < g.points.size(); ++j) {
      const double a = g.points[i];
      const double b = g.points[j];
      rule.tri_points.emplace_back(a, b * (1.0 - a));
      rule.tri_weights.push_back(g.weights[i] * g.weights[j] * (1.0 - a));
    }
  }

  const GaussSegment s = segment_rule(degree);
  rule.seg_points = s.points;
  rule.seg_weights = s.weights;
  return rule;
}

}  // namespace pbiharm
