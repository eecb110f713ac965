#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <vector>

#include "pbiharm/space.hpp"

namespace pbiharm {

/// Two-sided quadrature-point traces of a scalar field and its gradient on
/// one facet. Both sides are evaluated at the same physical points; side 0
/// is the facet owner. Boundary facets carry only side 0.
struct FacetTracePair {
  int facet = -1;
  bool boundary = false;
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();  // owner -> neighbor
  std::vector<Eigen::Vector2d> points;
  Eigen::VectorXd weights;
  Eigen::VectorXd value[2];
  Eigen::MatrixX2d gradient[2];

  int num_points() const { return static_cast<int>(points.size()); }
};

inline FacetTracePair trace_pair(const DgFunction& v, int facet) {
  const DgSpace& space = *v.space;
  const Facet& fa = space.mesh().facet(facet);
  const FacetTabulation& tab = space.facet_tabulation(facet);
  const int nd = space.dofs_per_element();

  FacetTracePair tr;
  tr.facet = facet;
  tr.boundary = fa.on_boundary();
  tr.normal = fa.normal;
  tr.points = tab.points;
  tr.weights = tab.weights;
  const int nsides = tr.boundary ? 1 : 2;
  for (int side = 0; side < nsides; ++side) {
    const int e = side == 0 ? fa.owner : fa.neighbor;
    const auto local = v.coeffs.segment(e * nd, nd);
    tr.value[side] = tab.values[side] * local;
    tr.gradient[side].resize(tr.num_points(), 2);
    tr.gradient[side].col(0) = tab.grad_x[side] * local;
    tr.gradient[side].col(1) = tab.grad_y[side] * local;
  }
  return tr;
}

/// Two-sided traces of a vector field; the usual instance is the broken
/// gradient of a scalar field.
struct VectorTracePair {
  bool boundary = false;
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
  Eigen::MatrixX2d side[2];

  int num_points() const { return static_cast<int>(side[0].rows()); }
};

inline VectorTracePair gradient_trace(const FacetTracePair& tr) {
  VectorTracePair vt;
  vt.boundary = tr.boundary;
  vt.normal = tr.normal;
  vt.side[0] = tr.gradient[0];
  if (!tr.boundary)
    vt.side[1] = tr.gradient[1];
  return vt;
}

/// {v} per point: the arithmetic mean across the facet, or the one-sided
/// trace on the boundary.
inline Eigen::VectorXd avg_scalar(const FacetTracePair& tr) {
  if (tr.boundary)
    return tr.value[0];
  return 0.5 * (tr.value[0] + tr.value[1]);
}

/// [v] per point: v|_K1 n_K1 + v|_K2 n_K2, i.e. (v1 - v2) n; v n on the
/// boundary. One row per quadrature point.
inline Eigen::MatrixX2d jump_scalar(const FacetTracePair& tr) {
  Eigen::VectorXd diff =
      tr.boundary ? tr.value[0] : Eigen::VectorXd(tr.value[0] - tr.value[1]);
  Eigen::MatrixX2d out(tr.num_points(), 2);
  out.col(0) = diff * tr.normal.x();
  out.col(1) = diff * tr.normal.y();
  return out;
}

inline Eigen::MatrixX2d avg_vector(const VectorTracePair& vt) {
  if (vt.boundary)
    return vt.side[0];
  return 0.5 * (vt.side[0] + vt.side[1]);
}

/// [q] per point for a vector field: q|_K1 . n_K1 + q|_K2 . n_K2 (scalar).
inline Eigen::VectorXd jump_vector(const VectorTracePair& vt) {
  if (vt.boundary)
    return vt.side[0] * vt.normal;
  return (vt.side[0] - vt.side[1]) * vt.normal;
}

/// Tensor jump per point: q|_K1 (x) n_K1 + q|_K2 (x) n_K2.
inline std::vector<Eigen::Matrix2d> tensor_jump(const VectorTracePair& vt) {
  std::vector<Eigen::Matrix2d> out(vt.num_points());
  for (int q = 0; q < vt.num_points(); ++q) {
    const Eigen::Vector2d q0 = vt.side[0].row(q).transpose();
    out[q] = q0 * vt.normal.transpose();
    if (!vt.boundary) {
      const Eigen::Vector2d q1 = vt.side[1].row(q).transpose();
      out[q] -= q1 * vt.normal.transpose();
    }
  }
  return out;
}

struct IdentityResidual {
  double residual = 0.0;
  double scale = 0.0;

  double relative() const { return residual / (scale > 0.0 ? scale : 1.0); }
};

/// Residual of the elementwise-integration identity
///   sum_K int_{dK} phi q.n  =  int_E [q]{phi} + int_{E u dW} [phi].{q}
/// for a scalar field phi = v and vector field q = (q1, q2).
inline IdentityResidual check_elementwise_integration(const DgFunction& v,
                                                      const DgFunction& q1,
                                                      const DgFunction& q2) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  const int nd = space.dofs_per_element();

  double lhs = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int f : mesh.element_facets(e)) {
      const Facet& fa = mesh.facet(f);
      const FacetTabulation& tab = space.facet_tabulation(f);
      const int side = fa.owner == e ? 0 : 1;
      const Eigen::Vector2d n = mesh.outward_normal(e, f);
      const auto lv = v.coeffs.segment(e * nd, nd);
      const auto l1 = q1.coeffs.segment(e * nd, nd);
      const auto l2 = q2.coeffs.segment(e * nd, nd);
      const Eigen::VectorXd phi = tab.values[side] * lv;
      const Eigen::VectorXd qa = tab.values[side] * l1;
      const Eigen::VectorXd qb = tab.values[side] * l2;
      for (int q = 0; q < phi.size(); ++q)
        lhs += tab.weights[q] * phi[q] * (qa[q] * n.x() + qb[q] * n.y());
    }
  }

  double rhs = 0.0;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const FacetTracePair trv = trace_pair(v, f);
    const FacetTracePair tr1 = trace_pair(q1, f);
    const FacetTracePair tr2 = trace_pair(q2, f);
    const Eigen::VectorXd av = avg_scalar(trv);
    const Eigen::MatrixX2d jv = jump_scalar(trv);
    for (int q = 0; q < trv.num_points(); ++q) {
      const Eigen::Vector2d qv0(tr1.value[0][q], tr2.value[0][q]);
      Eigen::Vector2d qavg = qv0;
      double qjump = 0.0;
      if (!trv.boundary) {
        const Eigen::Vector2d qv1(tr1.value[1][q], tr2.value[1][q]);
        qavg = 0.5 * (qv0 + qv1);
        qjump = (qv0 - qv1).dot(trv.normal);
        rhs += trv.weights[q] * qjump * av[q];
      }
      rhs += trv.weights[q] * jv.row(q).dot(qavg);
    }
  }

  IdentityResidual out;
  out.residual = std::abs(lhs - rhs);
  out.scale = std::abs(lhs) + std::abs(rhs);
  return out;
}

/// Tensor variant of the identity:
///   sum_K int_{dK} phi q (x) n  =  int_E tjump(q){phi} + int_{E u dW} {q}(x)[phi].
/// The second term is oriented average-first; taking traces recovers the
/// scalar identity above.
inline IdentityResidual check_elementwise_integration_tensor(
    const DgFunction& v, const DgFunction& q1, const DgFunction& q2) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  const int nd = space.dofs_per_element();

  Eigen::Matrix2d lhs = Eigen::Matrix2d::Zero();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int f : mesh.element_facets(e)) {
      const Facet& fa = mesh.facet(f);
      const FacetTabulation& tab = space.facet_tabulation(f);
      const int side = fa.owner == e ? 0 : 1;
      const Eigen::Vector2d n = mesh.outward_normal(e, f);
      const Eigen::VectorXd phi = tab.values[side] * v.coeffs.segment(e * nd, nd);
      const Eigen::VectorXd qa = tab.values[side] * q1.coeffs.segment(e * nd, nd);
      const Eigen::VectorXd qb = tab.values[side] * q2.coeffs.segment(e * nd, nd);
      for (int q = 0; q < phi.size(); ++q)
        lhs += tab.weights[q] * phi[q] * Eigen::Vector2d(qa[q], qb[q]) *
               n.transpose();
    }
  }

  Eigen::Matrix2d rhs = Eigen::Matrix2d::Zero();
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const FacetTracePair trv = trace_pair(v, f);
    const FacetTracePair tr1 = trace_pair(q1, f);
    const FacetTracePair tr2 = trace_pair(q2, f);
    const Eigen::VectorXd av = avg_scalar(trv);
    const Eigen::MatrixX2d jv = jump_scalar(trv);
    for (int q = 0; q < trv.num_points(); ++q) {
      const Eigen::Vector2d qv0(tr1.value[0][q], tr2.value[0][q]);
      Eigen::Vector2d qavg = qv0;
      if (!trv.boundary) {
        const Eigen::Vector2d qv1(tr1.value[1][q], tr2.value[1][q]);
        qavg = 0.5 * (qv0 + qv1);
        const Eigen::Matrix2d tj = (qv0 - qv1) * trv.normal.transpose();
        rhs += trv.weights[q] * av[q] * tj;
      }
      rhs += trv.weights[q] * qavg * jv.row(q);
    }
  }

  IdentityResidual out;
  out.residual = (lhs - rhs).norm();
  out.scale = lhs.norm() + rhs.norm();
  return out;
}

}  // namespace pbiharm
