#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "pbiharm/mesh.hpp"
#include "pbiharm/quadrature.hpp"
#include "pbiharm/space.hpp"

namespace testsupport {

/// Deterministic coefficients in [-1, 1]; mt19937 output is mapped directly
/// so the sequence does not depend on the standard library's distributions.
inline Eigen::VectorXd random_coefficients(int size, std::uint32_t seed) {
  std::mt19937 rng(seed);
  Eigen::VectorXd c(size);
  for (int i = 0; i < size; ++i)
    c[i] = 2.0 * (rng() / 4294967295.0) - 1.0;
  return c;
}

inline pbiharm::DgFunction random_field(const pbiharm::DgSpace& space,
                                        std::uint32_t seed) {
  return pbiharm::DgFunction(space,
                             random_coefficients(space.total_dofs(), seed));
}

/// Brute-force dense assembly of the IP dG Hessian trace moments
///   S(i,j) = -int grad psi_j . grad psi_i
///            + int_{E u dW} [psi_j].{grad psi_i} + [psi_i].{grad psi_j},
/// evaluating every basis pair pointwise through DgSpace::evaluate. Kept
/// independent of the sparse assembly path on purpose.
inline Eigen::MatrixXd dense_ip_trace_moments(const pbiharm::DgSpace& space) {
  const pbiharm::Mesh& mesh = space.mesh();
  const int nd = space.dofs_per_element();
  const int n = space.total_dofs();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);

  const pbiharm::QuadratureRule quad =
      pbiharm::make_quadrature(space.quadrature().exactness);

  // Evaluates one global basis function: nonzero only on its element.
  auto basis_eval = [&](int dof, int elem, const Eigen::Vector2d& xref) {
    pbiharm::DgSpace::Evaluation ev;
    if (dof / nd != elem)
      return ev;
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    unit[dof] = 1.0;
    return space.evaluate(unit, elem, xref);
  };

  // Volume term.
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    for (int q = 0; q < quad.num_tri_points(); ++q) {
      const double w = quad.tri_weights[q] * jac;
      for (int i = 0; i < nd; ++i) {
        const auto gi = basis_eval(e * nd + i, e, quad.tri_points[q]).gradient;
        for (int j = 0; j < nd; ++j) {
          const auto gj = basis_eval(e * nd + j, e, quad.tri_points[q]).gradient;
          S(e * nd + i, e * nd + j) -= w * gi.dot(gj);
        }
      }
    }
  }

  // Facet terms: [v].{grad phi} + [phi].{grad v} with the boundary
  // conventions [v] = v n and {grad v} = grad v.
  const pbiharm::GaussSegment seg =
      pbiharm::segment_rule(space.quadrature().exactness);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const pbiharm::Facet& fa = mesh.facet(f);
    const Eigen::Vector2d a = mesh.vertex(fa.vertices[0]);
    const Eigen::Vector2d b = mesh.vertex(fa.vertices[1]);
    const bool bdry = fa.on_boundary();
    const int elems[2] = {fa.owner, bdry ? fa.owner : fa.neighbor};
    const double sides = bdry ? 1 : 2;
    for (std::size_t q = 0; q < seg.points.size(); ++q) {
      const Eigen::Vector2d x = a + seg.points[q] * (b - a);
      const double w = seg.weights[q] * fa.length;
      for (int se_i = 0; se_i < sides; ++se_i) {
        const int ei = elems[se_i];
        for (int li = 0; li < nd; ++li) {
          const int i = ei * nd + li;
          const auto evi = basis_eval(i, ei, mesh.to_reference(ei, x));
          const double sign_i = se_i == 0 ? 1.0 : -1.0;
          for (int se_j = 0; se_j < sides; ++se_j) {
            const int ej = elems[se_j];
            for (int lj = 0; lj < nd; ++lj) {
              const int j = ej * nd + lj;
              const auto evj = basis_eval(j, ej, mesh.to_reference(ej, x));
              const double sign_j = se_j == 0 ? 1.0 : -1.0;
              const double avg = bdry ? 1.0 : 0.5;
              const double jump_j_dot_avg_i =
                  sign_j * evj.value * fa.normal.dot(avg * evi.gradient);
              const double jump_i_dot_avg_j =
                  sign_i * evi.value * fa.normal.dot(avg * evj.gradient);
              S(i, j) += w * (jump_j_dot_avg_i + jump_i_dot_avg_j);
            }
          }
        }
      }
    }
  }
  return S;
}

}  // namespace testsupport
