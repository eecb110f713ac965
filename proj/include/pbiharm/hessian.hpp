#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pbiharm/norms.hpp"
#include "pbiharm/space.hpp"
#include "pbiharm/traces.hpp"

namespace pbiharm {

/// Single-valued numerical fluxes (vhat, phat) on a facet, written as
/// weights on the two one-sided traces. The interior-penalty choice is
/// vhat = {v} on E, 0 on the boundary, and phat = {grad v} everywhere.
struct NumericalFlux {
  double value_owner = 0.5;
  double value_neighbor = 0.5;
  double value_boundary = 0.0;
  double grad_owner = 0.5;
  double grad_neighbor = 0.5;
  double grad_boundary = 1.0;
};

constexpr NumericalFlux ip_flux() { return NumericalFlux{}; }

namespace detail {

/// Physical gradient tabulations of one element at the volume quadrature
/// points: rows are points, columns basis functions.
inline void physical_gradients(const DgSpace& space, int e, Eigen::MatrixXd& px,
                               Eigen::MatrixXd& py) {
  const Eigen::Matrix2d A = space.mesh().jacobian_inverse(e);
  const double s = space.basis_scale(e);
  px = s * (A(0, 0) * space.tab_grad(0) + A(1, 0) * space.tab_grad(1));
  py = s * (A(0, 1) * space.tab_grad(0) + A(1, 1) * space.tab_grad(1));
}

/// Physical second derivative (alpha,beta) of the element basis at the
/// volume quadrature points.
inline Eigen::MatrixXd physical_second_derivative(const DgSpace& space, int e,
                                                  int alpha, int beta) {
  const Eigen::Matrix2d A = space.mesh().jacobian_inverse(e);
  const double s = space.basis_scale(e);
  return s * (A(0, alpha) * A(0, beta) * space.tab_hess(0) +
              (A(0, alpha) * A(1, beta) + A(1, alpha) * A(0, beta)) *
                  space.tab_hess(1) +
              A(1, alpha) * A(1, beta) * space.tab_hess(2));
}

struct FacetSides {
  // For each local dof (owner block then neighbor block): trace value,
  // physical gradient and jump sign at one quadrature point.
  Eigen::VectorXd val;
  Eigen::MatrixX2d grad;
  Eigen::VectorXd sign;  // +1 owner side, -1 neighbor side
  int ndofs = 0;
};

inline FacetSides gather_facet_sides(const DgSpace& space, int f, int q) {
  const Facet& fa = space.mesh().facet(f);
  const FacetTabulation& tab = space.facet_tabulation(f);
  const int nd = space.dofs_per_element();
  const int nsides = fa.on_boundary() ? 1 : 2;

  FacetSides s;
  s.ndofs = nsides * nd;
  s.val.resize(s.ndofs);
  s.grad.resize(s.ndofs, 2);
  s.sign.resize(s.ndofs);
  for (int side = 0; side < nsides; ++side) {
    for (int i = 0; i < nd; ++i) {
      const int li = side * nd + i;
      s.val[li] = tab.values[side](q, i);
      s.grad(li, 0) = tab.grad_x[side](q, i);
      s.grad(li, 1) = tab.grad_y[side](q, i);
      s.sign[li] = side == 0 ? 1.0 : -1.0;
    }
  }
  return s;
}

inline void scatter_facet_block(const DgSpace& space, int f,
                                const Eigen::MatrixXd& local,
                                std::vector<Eigen::Triplet<double>>& triplets) {
  const Facet& fa = space.mesh().facet(f);
  const int nd = space.dofs_per_element();
  const int nsides = fa.on_boundary() ? 1 : 2;
  std::array<int, 2> base{fa.owner * nd, fa.neighbor * nd};
  for (int si = 0; si < nsides; ++si)
    for (int sj = 0; sj < nsides; ++sj)
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) {
          const double a = local(si * nd + i, sj * nd + j);
          if (a != 0.0)
            triplets.emplace_back(base[si] + i, base[sj] + j, a);
        }
}

}  // namespace detail

/// Moment matrix of D[.] = trace(H[.]) for the generalized-flux dG Hessian:
/// against the orthonormal basis, coeffs(D[v]) = S * coeffs(v) with
///   int D[v] phi = -int grad_h v . grad_h phi
///                  - int_{E u dW} [vhat - v] . {grad_h phi}
///                  - int_E {vhat - v} [grad_h phi]
///                  + int_{E u dW} [phi] . {phat}.
/// (The tensor-jump of the single-valued phat vanishes.)
inline Eigen::SparseMatrix<double> assemble_D(const DgSpace& space,
                                              const NumericalFlux& flux = ip_flux()) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();
  const int nd = space.dofs_per_element();
  const int n = space.total_dofs();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * nd * nd * 4);

  Eigen::MatrixXd px, py;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    detail::physical_gradients(space, e, px, py);
    const double jac = mesh.jacobian_det(e);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nd, nd);
    for (int q = 0; q < quad.num_tri_points(); ++q) {
      const double w = quad.tri_weights[q] * jac;
      block -= w * (px.row(q).transpose() * px.row(q) +
                    py.row(q).transpose() * py.row(q));
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        triplets.emplace_back(e * nd + i, e * nd + j, block(i, j));
  }

  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const FacetTabulation& tab = space.facet_tabulation(f);
    const Eigen::Vector2d n_f = fa.normal;
    const bool bdry = fa.on_boundary();
    const int ndofs = (bdry ? 1 : 2) * nd;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(ndofs, ndofs);

    for (int q = 0; q < static_cast<int>(tab.points.size()); ++q) {
      const detail::FacetSides s = detail::gather_facet_sides(space, f, q);
      const double w = tab.weights[q];
      const Eigen::VectorXd gn = s.grad * n_f;  // one-sided grad . n per dof

      if (bdry) {
        // [vhat - v] = (wb - 1) v n; {phat} = wb_p grad v
        const double cj = 1.0 - flux.value_boundary;
        for (int i = 0; i < ndofs; ++i)
          for (int j = 0; j < ndofs; ++j)
            local(i, j) += w * (cj * s.val[j] * gn[i] +
                                flux.grad_boundary * s.val[i] * gn[j]);
        continue;
      }

      for (int i = 0; i < ndofs; ++i) {
        const double avg_gn_i = 0.5 * gn[i];        // {grad phi} . n
        const double jump_gn_i = s.sign[i] * gn[i]; // [grad phi]
        const double jump_v_i = s.sign[i] * s.val[i];
        for (int j = 0; j < ndofs; ++j) {
          // -[vhat - v] = [v] for any single-valued vhat
          const double jump_v_j = s.sign[j] * s.val[j];
          // {vhat - v} = (w_own - 1/2) v_own + (w_nb - 1/2) v_nb per dof
          const double avg_vhat_j =
              ((s.sign[j] > 0 ? flux.value_owner : flux.value_neighbor) - 0.5) *
              s.val[j];
          const double phat_n_j =
              (s.sign[j] > 0 ? flux.grad_owner : flux.grad_neighbor) * gn[j];
          local(i, j) += w * (jump_v_j * avg_gn_i - avg_vhat_j * jump_gn_i +
                              jump_v_i * phat_n_j);
        }
      }
    }
    detail::scatter_facet_block(space, f, local, triplets);
  }

  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(triplets.begin(), triplets.end());
  return S;
}

/// Same operator assembled from the elementwise-Hessian display:
///   int D[v] phi = int D_h v phi - int_E [grad_h v] {phi}
///                  + int_{E u dW} [v] . {grad_h phi}.
/// Equals assemble_D with the IP flux up to roundoff; kept as a cross-check
/// of the integration-by-parts structure. Note the gradient-jump correction
/// runs over the interior skeleton only: on the boundary it cancels against
/// the one-sided {grad v}.[phi] term of the gradient form.
inline Eigen::SparseMatrix<double> assemble_D_hessian_route(const DgSpace& space) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();
  const int nd = space.dofs_per_element();
  const int n = space.total_dofs();

  std::vector<Eigen::Triplet<double>> triplets;

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    const double s = space.basis_scale(e);
    const Eigen::Matrix2d A = mesh.jacobian_inverse(e);
    const Eigen::Matrix2d C = A * A.transpose();
    const Eigen::MatrixXd lap =
        s * (C(0, 0) * space.tab_hess(0) + 2.0 * C(0, 1) * space.tab_hess(1) +
             C(1, 1) * space.tab_hess(2));
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nd, nd);
    for (int q = 0; q < quad.num_tri_points(); ++q) {
      const double w = quad.tri_weights[q] * jac;
      block += w * s * space.tab_values().row(q).transpose() * lap.row(q);
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        triplets.emplace_back(e * nd + i, e * nd + j, block(i, j));
  }

  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const FacetTabulation& tab = space.facet_tabulation(f);
    const Eigen::Vector2d n_f = fa.normal;
    const bool bdry = fa.on_boundary();
    const int ndofs = (bdry ? 1 : 2) * nd;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(ndofs, ndofs);

    for (int q = 0; q < static_cast<int>(tab.points.size()); ++q) {
      const detail::FacetSides s = detail::gather_facet_sides(space, f, q);
      const double w = tab.weights[q];
      const Eigen::VectorXd gn = s.grad * n_f;
      for (int i = 0; i < ndofs; ++i) {
        const double avg_v_i = (bdry ? 1.0 : 0.5) * s.val[i];
        const double avg_gn_i = (bdry ? 1.0 : 0.5) * gn[i];
        for (int j = 0; j < ndofs; ++j) {
          const double jump_v_j = s.sign[j] * s.val[j];
          local(i, j) += w * jump_v_j * avg_gn_i;
          if (!bdry) {
            const double jump_gn_j = s.sign[j] * gn[j];
            local(i, j) -= w * jump_gn_j * avg_v_i;
          }
        }
      }
    }
    detail::scatter_facet_block(space, f, local, triplets);
  }

  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(triplets.begin(), triplets.end());
  return S;
}

/// Component (alpha,beta) moment matrices of the full matrix-valued H[.]
/// with the IP flux. The cross terms are oriented average-first,
/// {grad v} (x) [phi], which is the orientation under which the two
/// displays of the operator agree; the trace D is insensitive to it.
inline std::array<Eigen::SparseMatrix<double>, 4> assemble_H(
    const DgSpace& space, const NumericalFlux& flux = ip_flux()) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();
  const int nd = space.dofs_per_element();
  const int n = space.total_dofs();

  std::array<std::vector<Eigen::Triplet<double>>, 4> triplets;

  Eigen::MatrixXd px, py;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    detail::physical_gradients(space, e, px, py);
    const double jac = mesh.jacobian_det(e);
    const Eigen::MatrixXd* g[2] = {&px, &py};
    for (int alpha = 0; alpha < 2; ++alpha)
      for (int beta = 0; beta < 2; ++beta) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nd, nd);
        for (int q = 0; q < quad.num_tri_points(); ++q)
          block -= quad.tri_weights[q] * jac * g[beta]->row(q).transpose() *
                   g[alpha]->row(q);
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j)
            triplets[2 * alpha + beta].emplace_back(e * nd + i, e * nd + j,
                                                    block(i, j));
      }
  }

  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const FacetTabulation& tab = space.facet_tabulation(f);
    const Eigen::Vector2d n_f = fa.normal;
    const bool bdry = fa.on_boundary();
    const int ndofs = (bdry ? 1 : 2) * nd;
    std::array<Eigen::MatrixXd, 4> local;
    local.fill(Eigen::MatrixXd::Zero(ndofs, ndofs));

    for (int q = 0; q < static_cast<int>(tab.points.size()); ++q) {
      const detail::FacetSides s = detail::gather_facet_sides(space, f, q);
      const double w = tab.weights[q];
      for (int alpha = 0; alpha < 2; ++alpha)
        for (int beta = 0; beta < 2; ++beta) {
          Eigen::MatrixXd& loc = local[2 * alpha + beta];
          for (int i = 0; i < ndofs; ++i) {
            const double avg_gb_i = (bdry ? 1.0 : 0.5) * s.grad(i, beta);
            const double jump_vb_i = s.sign[i] * s.val[i] * n_f[beta];
            for (int j = 0; j < ndofs; ++j) {
              const double jump_va_j = s.sign[j] * s.val[j] * n_f[alpha];
              double acc = jump_va_j * avg_gb_i;  // -[vhat-v]_a {d_b phi}
              if (bdry) {
                acc *= 1.0 - flux.value_boundary;
                acc += flux.grad_boundary * s.grad(j, alpha) * jump_vb_i;
              } else {
                const double avg_vhat_j =
                    ((s.sign[j] > 0 ? flux.value_owner : flux.value_neighbor) -
                     0.5) *
                    s.val[j];
                const double phat_a_j =
                    (s.sign[j] > 0 ? flux.grad_owner : flux.grad_neighbor) *
                    s.grad(j, alpha);
                // -{vhat-v} tjump(grad phi)_{ab}
                acc -= avg_vhat_j * s.sign[i] * s.grad(i, alpha) * n_f[beta];
                // {phat}_a [phi]_b, average-first orientation
                acc += phat_a_j * jump_vb_i;
              }
              loc(i, j) += w * acc;
            }
          }
        }
    }
    for (int c = 0; c < 4; ++c)
      detail::scatter_facet_block(space, f, local[c], triplets[c]);
  }

  std::array<Eigen::SparseMatrix<double>, 4> H;
  for (int c = 0; c < 4; ++c) {
    H[c] = Eigen::SparseMatrix<double>(n, n);
    H[c].setFromTriplets(triplets[c].begin(), triplets[c].end());
  }
  return H;
}

/// Matrix-valued broken field, componentwise over the scalar space.
struct MatrixField {
  const DgSpace* space = nullptr;
  std::array<Eigen::VectorXd, 4> coeffs;  // row-major (00, 01, 10, 11)

  DgFunction component(int alpha, int beta) const {
    return DgFunction(*space, coeffs[2 * alpha + beta]);
  }
};

/// l1[v]: int l1[v] Phi = int_{E u dW} [v] (x) {grad Phi} for all Phi.
inline MatrixField lifting_l1(const DgFunction& v) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  const int nd = space.dofs_per_element();

  MatrixField out;
  out.space = &space;
  for (auto& c : out.coeffs)
    c = Eigen::VectorXd::Zero(space.total_dofs());

  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const FacetTabulation& tab = space.facet_tabulation(f);
    const FacetTracePair tr = trace_pair(v, f);
    const Eigen::MatrixX2d jv = jump_scalar(tr);
    const int nsides = fa.on_boundary() ? 1 : 2;
    const double test_w = fa.on_boundary() ? 1.0 : 0.5;
    for (int q = 0; q < tr.num_points(); ++q) {
      for (int side = 0; side < nsides; ++side) {
        const int e = side == 0 ? fa.owner : fa.neighbor;
        for (int i = 0; i < nd; ++i) {
          const double gb[2] = {tab.grad_x[side](q, i), tab.grad_y[side](q, i)};
          for (int alpha = 0; alpha < 2; ++alpha)
            for (int beta = 0; beta < 2; ++beta)
              out.coeffs[2 * alpha + beta][e * nd + i] +=
                  tr.weights[q] * jv(q, alpha) * test_w * gb[beta];
        }
      }
    }
  }
  return out;
}

/// l2[v]: int l2[v] Phi = -int_{E u dW} tjump(grad_h v) {Phi} for all Phi.
inline MatrixField lifting_l2(const DgFunction& v) {
  const DgSpace& space = *v.space;
  const Mesh& mesh = space.mesh();
  const int nd = space.dofs_per_element();

  MatrixField out;
  out.space = &space;
  for (auto& c : out.coeffs)
    c = Eigen::VectorXd::Zero(space.total_dofs());

  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const FacetTabulation& tab = space.facet_tabulation(f);
    const FacetTracePair tr = trace_pair(v, f);
    const std::vector<Eigen::Matrix2d> tj = tensor_jump(gradient_trace(tr));
    const int nsides = fa.on_boundary() ? 1 : 2;
    const double test_w = fa.on_boundary() ? 1.0 : 0.5;
    for (int q = 0; q < tr.num_points(); ++q) {
      for (int side = 0; side < nsides; ++side) {
        const int e = side == 0 ? fa.owner : fa.neighbor;
        for (int i = 0; i < nd; ++i) {
          const double phi = test_w * tab.values[side](q, i);
          for (int alpha = 0; alpha < 2; ++alpha)
            for (int beta = 0; beta < 2; ++beta)
              out.coeffs[2 * alpha + beta][e * nd + i] -=
                  tr.weights[q] * tj[q](alpha, beta) * phi;
        }
      }
    }
  }
  return out;
}

/// The assembled dG Hessian trace operator D[.]; applying it is a sparse
/// matrix-vector product thanks to the identity element mass matrices.
class HessianOperator {
public:
  explicit HessianOperator(const DgSpace& space,
                           const NumericalFlux& flux = ip_flux())
      : space_(&space), flux_(flux), S_(assemble_D(space, flux)) {}

  const DgSpace& space() const { return *space_; }
  const Eigen::SparseMatrix<double>& matrix() const { return S_; }

  DgFunction apply(const DgFunction& v) const {
    return DgFunction(*space_, S_ * v.coeffs);
  }

  /// Componentwise moment matrices of the full matrix-valued H (assembled
  /// on demand; the solver only needs the trace).
  std::array<Eigen::SparseMatrix<double>, 4> full_components() const {
    return assemble_H(*space_, flux_);
  }

private:
  const DgSpace* space_;
  NumericalFlux flux_;
  Eigen::SparseMatrix<double> S_;
};

/// ||D[v]||_{L^p} / |||v|||_p; bounded uniformly under refinement by the
/// stability of the dG Hessian.
inline double stability_ratio(const HessianOperator& op, const DgFunction& v,
                              double p) {
  if (v.coeffs.norm() == 0.0)
    throw std::invalid_argument("stability_ratio: v must be nonzero");
  const DgFunction dv = op.apply(v);
  const double denom = dg_norm(v, p);
  return lp_norm(dv, p) / denom;
}

}  // namespace pbiharm
