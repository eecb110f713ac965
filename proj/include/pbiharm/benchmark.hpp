#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace pbiharm {

/// Clamped benchmark solution u(x,y) = sin^2(2 pi x) sin^2(2 pi y) on the
/// unit square, with closed-form derivatives through fourth order and the
/// forcing obtained by applying the strong operator analytically. u and its
/// normal derivative vanish on the whole boundary.
class ExactSolution {
public:
  double value(const Eigen::Vector2d& x) const { return s0(x.x()) * s0(x.y()); }

  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const {
    return {s1(x.x()) * s0(x.y()), s0(x.x()) * s1(x.y())};
  }

  Eigen::Matrix2d hessian(const Eigen::Vector2d& x) const {
    Eigen::Matrix2d H;
    H << s2(x.x()) * s0(x.y()), s1(x.x()) * s1(x.y()),
        s1(x.x()) * s1(x.y()), s0(x.x()) * s2(x.y());
    return H;
  }

  double laplacian(const Eigen::Vector2d& x) const {
    return s2(x.x()) * s0(x.y()) + s0(x.x()) * s2(x.y());
  }

  Eigen::Vector2d grad_laplacian(const Eigen::Vector2d& x) const {
    return {s3(x.x()) * s0(x.y()) + s1(x.x()) * s2(x.y()),
            s2(x.x()) * s1(x.y()) + s0(x.x()) * s3(x.y())};
  }

  double bilaplacian(const Eigen::Vector2d& x) const {
    return s4(x.x()) * s0(x.y()) + 2.0 * s2(x.x()) * s2(x.y()) +
           s0(x.x()) * s4(x.y());
  }

  /// f = Delta(|w|^{p-2} w) with w = Delta u, by the chain rule:
  ///   f = (p-1)|w|^{p-2} Dw + (p-1)(p-2)|w|^{p-3} sign(w) |grad w|^2.
  /// Quadrature points where w vanishes exactly are nudged by 1e-12 so the
  /// sign factor is well defined (a measure-zero set).
  double forcing(const Eigen::Vector2d& x, double p) const {
    Eigen::Vector2d xe = x;
    double w = laplacian(xe);
    if (p > 2.0 && w == 0.0) {
      xe += Eigen::Vector2d(1e-12, 1e-12);
      w = laplacian(xe);
    }
    const double dw = bilaplacian(xe);
    if (p == 2.0)
      return dw;
    const double gw2 = grad_laplacian(xe).squaredNorm();
    const double aw = std::abs(w);
    return (p - 1.0) * std::pow(aw, p - 2.0) * dw +
           (p - 1.0) * (p - 2.0) * std::pow(aw, p - 3.0) *
               (w >= 0.0 ? 1.0 : -1.0) * gw2;
  }

private:
  // One-dimensional factor s(t) = sin^2(2 pi t) and its derivatives.
  static double s0(double t) {
    const double v = std::sin(2.0 * M_PI * t);
    return v * v;
  }
  static double s1(double t) { return 2.0 * M_PI * std::sin(4.0 * M_PI * t); }
  static double s2(double t) {
    return 8.0 * M_PI * M_PI * std::cos(4.0 * M_PI * t);
  }
  static double s3(double t) {
    return -32.0 * M_PI * M_PI * M_PI * std::sin(4.0 * M_PI * t);
  }
  static double s4(double t) {
    return -128.0 * M_PI * M_PI * M_PI * M_PI * std::cos(4.0 * M_PI * t);
  }
};

}  // namespace pbiharm
