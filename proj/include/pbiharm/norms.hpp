#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "pbiharm/space.hpp"
#include "pbiharm/traces.hpp"

namespace pbiharm {

/// L^p(W) norm of a pointwise-evaluable field g(element, xref, xphys) by
/// quadrature. Error norms use a rule sharpened over the assembly rule
/// (default +4) to keep quadrature error below the discretization error.
template <typename F>
double lp_norm_local(const F& g, double p, const DgSpace& space,
                     int extra_degree = 4) {
  if (p < 1.0)
    throw std::invalid_argument("lp_norm: p must be >= 1");
  const Mesh& mesh = space.mesh();
  const QuadratureRule quad =
      make_quadrature(space.quadrature().exactness + extra_degree);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    for (int q = 0; q < quad.num_tri_points(); ++q) {
      const Eigen::Vector2d& xref = quad.tri_points[q];
      const double v = g(e, xref, mesh.to_physical(e, xref));
      total += quad.tri_weights[q] * jac * std::pow(std::abs(v), p);
    }
  }
  return std::pow(total, 1.0 / p);
}

template <typename F>
double lp_norm(const F& g, double p, const DgSpace& space,
               int extra_degree = 4) {
  return lp_norm_local(
      [&g](int, const Eigen::Vector2d&, const Eigen::Vector2d& x) {
        return g(x);
      },
      p, space, extra_degree);
}

inline double lp_norm(const DgFunction& v, double p, int extra_degree = 4) {
  return lp_norm_local(
      [&v](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d&) {
        return v.evaluate(e, xref).value;
      },
      p, *v.space, extra_degree);
}

/// The three p-th-power pieces of the dG norm:
///   |||v|||_p^p = ||D_h v||^p_Lp + sum_e h^{1-p} ||[grad v]||^p_{Lp(e)}
///                              + sum_e h^{1-2p} ||[v]||^p_{Lp(e)},
/// jumps taken over the interior skeleton only, h the facet length.
struct DgNormParts {
  double laplacian_pow = 0.0;
  double grad_jump_pow = 0.0;
  double value_jump_pow = 0.0;

  double total(double p) const {
    return std::pow(laplacian_pow + grad_jump_pow + value_jump_pow, 1.0 / p);
  }
  double laplacian(double p) const { return std::pow(laplacian_pow, 1.0 / p); }
  double grad_jump(double p) const { return std::pow(grad_jump_pow, 1.0 / p); }
  double value_jump(double p) const { return std::pow(value_jump_pow, 1.0 / p); }
};

namespace detail {

/// Jump contributions of the interior skeleton, shared by dg_norm_parts and
/// the error norm (a smooth exact field has no jumps of its own).
inline void accumulate_jump_parts(const DgFunction& v, double p,
                                  DgNormParts& parts) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  for (int f : mesh.interior_facets()) {
    const Facet& fa = mesh.facet(f);
    const FacetTracePair tr = trace_pair(v, f);
    const double wg = std::pow(fa.length, 1.0 - p);
    const double wv = std::pow(fa.length, 1.0 - 2.0 * p);
    for (int q = 0; q < tr.num_points(); ++q) {
      const double gj = (tr.gradient[0].row(q) - tr.gradient[1].row(q))
                            .dot(tr.normal.transpose());
      const double vj = std::abs(tr.value[0][q] - tr.value[1][q]);
      parts.grad_jump_pow += tr.weights[q] * wg * std::pow(std::abs(gj), p);
      parts.value_jump_pow += tr.weights[q] * wv * std::pow(vj, p);
    }
  }
}

}  // namespace detail

inline DgNormParts dg_norm_parts(const DgFunction& v, double p) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();

  DgNormParts parts;
  const int nd = space.dofs_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    const double s = space.basis_scale(e);
    const Eigen::Matrix2d Jinv = mesh.jacobian_inverse(e);
    const Eigen::Matrix2d C = Jinv * Jinv.transpose();
    const auto local = v.coeffs.segment(e * nd, nd);
    // trace(J^-T H_ref J^-1) expressed in reference second derivatives
    const Eigen::VectorXd lap =
        s * (C(0, 0) * (space.tab_hess(0) * local) +
             2.0 * C(0, 1) * (space.tab_hess(1) * local) +
             C(1, 1) * (space.tab_hess(2) * local));
    for (int q = 0; q < quad.num_tri_points(); ++q)
      parts.laplacian_pow +=
          quad.tri_weights[q] * jac * std::pow(std::abs(lap[q]), p);
  }
  detail::accumulate_jump_parts(v, p, parts);
  return parts;
}

inline double dg_norm(const DgFunction& v, double p) {
  return dg_norm_parts(v, p).total(p);
}

/// |||u - v|||_p against a smooth exact field given by its Laplacian; the
/// jump parts reduce to the jumps of v. Laplacian part integrated with a
/// sharpened rule.
template <typename LapF>
DgNormParts dg_error_norm_parts(const DgFunction& v, double p,
                                const LapF& exact_laplacian,
                                int extra_degree = 4) {
  DgNormParts parts;
  const double lap = lp_norm_local(
      [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
        return exact_laplacian(x) - v.evaluate(e, xref).hessian.trace();
      },
      p, *v.space, extra_degree);
  parts.laplacian_pow = std::pow(lap, p);
  detail::accumulate_jump_parts(v, p, parts);
  return parts;
}

/// Estimated order of convergence between two levels.
inline double eoc(double err_coarse, double err_fine, double h_coarse,
                  double h_fine) {
  if (err_coarse <= 0.0 || err_fine <= 0.0)
    throw std::invalid_argument("eoc: errors must be positive");
  if (h_coarse == h_fine)
    throw std::invalid_argument("eoc: meshsizes must differ");
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

}  // namespace pbiharm
