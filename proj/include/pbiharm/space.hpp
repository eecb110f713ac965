#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pbiharm/mesh.hpp"
#include "pbiharm/quadrature.hpp"

namespace pbiharm {

/// L2-orthonormal polynomial basis of degree k on the reference triangle,
/// built by Cholesky orthonormalization of centroid-centered monomials
/// (x - 1/3)^a (y - 1/3)^b against their exact moments. Centering and the
/// extended-precision factorization keep the element mass matrices at the
/// identity to machine precision through degree 4.
class ReferenceBasis {
public:
  explicit ReferenceBasis(int degree) : degree_(degree) {
    if (degree < 0)
      throw std::invalid_argument("ReferenceBasis: degree must be >= 0");
    for (int t = 0; t <= degree; ++t)
      for (int a = t; a >= 0; --a)
        exponents_.emplace_back(a, t - a);
    const int n = size();

    using LongMatrix =
        Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LongMatrix mass(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        mass(i, j) = centered_moment(exponents_[i].first + exponents_[j].first,
                                     exponents_[i].second + exponents_[j].second);

    // Two Cholesky passes: the second absorbs the roundoff of the first.
    LongMatrix basis = mass.llt().matrixL().solve(LongMatrix::Identity(n, n));
    const LongMatrix gram = basis * mass * basis.transpose();
    basis = gram.llt().matrixL().solve(basis);
    coeffs_ = basis.cast<double>();
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }

  Eigen::VectorXd values(const Eigen::Vector2d& p) const {
    return coeffs_ * monomials(p, 0, 0);
  }

  /// Values plus first (and optionally second) reference derivatives at p.
  /// grads has one row per basis function; hess columns are (xx, xy, yy).
  void evaluate(const Eigen::Vector2d& p, Eigen::VectorXd& vals,
                Eigen::MatrixXd* grads = nullptr,
                Eigen::MatrixXd* hess = nullptr) const {
    vals = coeffs_ * monomials(p, 0, 0);
    if (grads) {
      grads->resize(size(), 2);
      grads->col(0) = coeffs_ * monomials(p, 1, 0);
      grads->col(1) = coeffs_ * monomials(p, 0, 1);
    }
    if (hess) {
      hess->resize(size(), 3);
      hess->col(0) = coeffs_ * monomials(p, 2, 0);
      hess->col(1) = coeffs_ * monomials(p, 1, 1);
      hess->col(2) = coeffs_ * monomials(p, 0, 2);
    }
  }

private:
  static constexpr long double kCenter = 1.0L / 3.0L;

  // int_T x^a y^b = a! b! / (a+b+2)!
  static long double raw_moment(int a, int b) {
    long double value = 1.0L;
    for (int i = 1; i <= b; ++i)
      value *= static_cast<long double>(i);
    for (int i = a + 1; i <= a + b + 2; ++i)
      value /= static_cast<long double>(i);
    return value;
  }

  // int_T (x - 1/3)^a (y - 1/3)^b by binomial expansion of the raw moments.
  static long double centered_moment(int a, int b) {
    auto binom = [](int n, int k) {
      long double v = 1.0L;
      for (int i = 1; i <= k; ++i)
        v = v * (n - k + i) / i;
      return v;
    };
    long double total = 0.0L;
    for (int i = 0; i <= a; ++i)
      for (int j = 0; j <= b; ++j) {
        long double term = binom(a, i) * binom(b, j) * raw_moment(i, j);
        const int odd = (a - i) + (b - j);
        term *= std::pow(kCenter, static_cast<long double>(odd));
        total += (odd % 2 == 0) ? term : -term;
      }
    return total;
  }

  /// Derivative d^dx d^dy of (x-1/3)^a (y-1/3)^b stacked over the basis
  /// order.
  Eigen::VectorXd monomials(const Eigen::Vector2d& p, int dx, int dy) const {
    const double px = p.x() - static_cast<double>(kCenter);
    const double py = p.y() - static_cast<double>(kCenter);
    Eigen::VectorXd m(size());
    for (int i = 0; i < size(); ++i) {
      const int a = exponents_[i].first;
      const int b = exponents_[i].second;
      if (a < dx || b < dy) {
        m[i] = 0.0;
        continue;
      }
      double c = 1.0;
      for (int r = 0; r < dx; ++r)
        c *= a - r;
      for (int r = 0; r < dy; ++r)
        c *= b - r;
      m[i] = c * std::pow(px, a - dx) * std::pow(py, b - dy);
    }
    return m;
  }

  int degree_;
  std::vector<std::pair<int, int>> exponents_;
  Eigen::MatrixXd coeffs_;
};

/// Per-facet quadrature and two-sided basis traces. Points are generated in
/// physical coordinates from the owner parametrization; the neighbor trace
/// is evaluated at the same physical points through its inverse affine map.
struct FacetTabulation {
  std::vector<Eigen::Vector2d> points;  // physical
  Eigen::VectorXd weights;              // include facet length; sum = h_e
  // side 0 = owner, side 1 = neighbor (unused rows on the boundary)
  Eigen::MatrixXd values[2];            // nq x ndof
  Eigen::MatrixXd grad_x[2], grad_y[2]; // physical gradients, nq x ndof
};

/// Space of discontinuous piecewise polynomials of degree k over a mesh,
/// with an elementwise L2-orthonormal basis (block mass matrix = identity).
class DgSpace {
public:
  DgSpace(const Mesh& mesh, int degree, int quadrature_degree = -1)
      : mesh_(&mesh),
        degree_(degree),
        quad_(make_quadrature(quadrature_degree < 0 ? 2 * degree + 2
                                                    : quadrature_degree)),
        basis_(degree) {
    if (degree < 2)
      throw std::invalid_argument("DgSpace: degree must be >= 2");
    tabulate_volume();
    tabulate_facets();
  }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int dofs_per_element() const { return basis_.size(); }
  int total_dofs() const { return mesh_->num_elements() * basis_.size(); }
  const QuadratureRule& quadrature() const { return quad_; }
  const ReferenceBasis& reference_basis() const { return basis_; }

  int dof_index(int element, int local) const {
    return element * basis_.size() + local;
  }

  /// 1/sqrt(det J_K): the per-element normalization of the reference basis.
  double basis_scale(int element) const { return scales_[element]; }

  // Tabulated reference-basis data at the volume quadrature points
  // (identical for every element); rows are quadrature points.
  const Eigen::MatrixXd& tab_values() const { return tab_values_; }
  const Eigen::MatrixXd& tab_grad(int c) const { return tab_grad_[c]; }
  /// Reference second derivatives; c in {0,1,2} for (xx, xy, yy).
  const Eigen::MatrixXd& tab_hess(int c) const { return tab_hess_[c]; }

  const FacetTabulation& facet_tabulation(int f) const { return facet_tabs_[f]; }

  /// Physical basis values of element e at a reference point.
  Eigen::VectorXd basis_values(int e, const Eigen::Vector2d& xref) const {
    return scales_[e] * basis_.values(xref);
  }

  struct Evaluation {
    double value = 0.0;
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  };

  /// Value, physical gradient and physical Hessian of the field with the
  /// given coefficients, on element e at reference point xref.
  Evaluation evaluate(const Eigen::VectorXd& coeffs, int e,
                      const Eigen::Vector2d& xref) const {
    if (e < 0 || e >= mesh_->num_elements())
      throw std::out_of_range("DgSpace::evaluate: element index out of range");
    Eigen::VectorXd vals;
    Eigen::MatrixXd grads, hess;
    basis_.evaluate(xref, vals, &grads, &hess);
    const auto local = coeffs.segment(e * basis_.size(), basis_.size());
    const double s = scales_[e];
    const Eigen::Matrix2d Jinv = mesh_->jacobian_inverse(e);

    Evaluation out;
    out.value = s * vals.dot(local);
    const Eigen::Vector2d gref(grads.col(0).dot(local), grads.col(1).dot(local));
    out.gradient = s * Jinv.transpose() * gref;
    Eigen::Matrix2d Href;
    Href << hess.col(0).dot(local), hess.col(1).dot(local),
        hess.col(1).dot(local), hess.col(2).dot(local);
    out.hessian = s * Jinv.transpose() * Href * Jinv;
    return out;
  }

private:
  void tabulate_volume() {
    const int nq = quad_.num_tri_points();
    const int nd = basis_.size();
    tab_values_.resize(nq, nd);
    for (auto& m : tab_grad_)
      m.resize(nq, nd);
    for (auto& m : tab_hess_)
      m.resize(nq, nd);
    Eigen::VectorXd vals;
    Eigen::MatrixXd grads, hess;
    for (int q = 0; q < nq; ++q) {
      basis_.evaluate(quad_.tri_points[q], vals, &grads, &hess);
      tab_values_.row(q) = vals.transpose();
      tab_grad_[0].row(q) = grads.col(0).transpose();
      tab_grad_[1].row(q) = grads.col(1).transpose();
      for (int c = 0; c < 3; ++c)
        tab_hess_[c].row(q) = hess.col(c).transpose();
    }

    scales_.resize(mesh_->num_elements());
    for (int e = 0; e < mesh_->num_elements(); ++e)
      scales_[e] = 1.0 / std::sqrt(mesh_->jacobian_det(e));
  }

  void tabulate_facets() {
    const int nd = basis_.size();
    const int nq = quad_.num_seg_points();
    facet_tabs_.resize(mesh_->num_facets());
    Eigen::VectorXd vals;
    Eigen::MatrixXd grads;
    for (int f = 0; f < mesh_->num_facets(); ++f) {
      const Facet& fa = mesh_->facet(f);
      FacetTabulation& tab = facet_tabs_[f];
      tab.points.resize(nq);
      tab.weights.resize(nq);
      const Eigen::Vector2d a = mesh_->vertex(fa.vertices[0]);
      const Eigen::Vector2d b = mesh_->vertex(fa.vertices[1]);
      for (int q = 0; q < nq; ++q) {
        tab.points[q] = a + quad_.seg_points[q] * (b - a);
        tab.weights[q] = quad_.seg_weights[q] * fa.length;
      }
      const int nsides = fa.on_boundary() ? 1 : 2;
      for (int side = 0; side < nsides; ++side) {
        const int e = side == 0 ? fa.owner : fa.neighbor;
        tab.values[side].resize(nq, nd);
        tab.grad_x[side].resize(nq, nd);
        tab.grad_y[side].resize(nq, nd);
        const double s = scales_[e];
        const Eigen::Matrix2d JinvT = mesh_->jacobian_inverse(e).transpose();
        for (int q = 0; q < nq; ++q) {
          const Eigen::Vector2d xref = mesh_->to_reference(e, tab.points[q]);
          basis_.evaluate(xref, vals, &grads);
          tab.values[side].row(q) = s * vals.transpose();
          for (int i = 0; i < nd; ++i) {
            const Eigen::Vector2d g =
                s * JinvT * Eigen::Vector2d(grads(i, 0), grads(i, 1));
            tab.grad_x[side](q, i) = g.x();
            tab.grad_y[side](q, i) = g.y();
          }
        }
      }
    }
  }

  const Mesh* mesh_;
  int degree_;
  QuadratureRule quad_;
  ReferenceBasis basis_;
  std::vector<double> scales_;
  Eigen::MatrixXd tab_values_;
  Eigen::MatrixXd tab_grad_[2];
  Eigen::MatrixXd tab_hess_[3];
  std::vector<FacetTabulation> facet_tabs_;
};

/// Broken polynomial field: coefficients over the orthonormal element bases.
struct DgFunction {
  const DgSpace* space = nullptr;
  Eigen::VectorXd coeffs;

  DgFunction() = default;
  explicit DgFunction(const DgSpace& s)
      : space(&s), coeffs(Eigen::VectorXd::Zero(s.total_dofs())) {}
  DgFunction(const DgSpace& s, Eigen::VectorXd c) : space(&s), coeffs(std::move(c)) {
    assert(coeffs.size() == s.total_dofs());
  }

  DgSpace::Evaluation evaluate(int element, const Eigen::Vector2d& xref) const {
    return space->evaluate(coeffs, element, xref);
  }
};

/// Elementwise L2 orthogonal projection of a pointwise-evaluable field.
template <typename F>
DgFunction l2_project(const F& g, const DgSpace& space) {
  DgFunction out(space);
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();
  const int nd = space.dofs_per_element();
  const int nq = quad.num_tri_points();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    const double s = space.basis_scale(e);
    auto local = out.coeffs.segment(e * nd, nd);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = mesh.to_physical(e, quad.tri_points[q]);
      const double w = quad.tri_weights[q] * jac * g(x);
      local += (w * s) * space.tab_values().row(q).transpose();
    }
  }
  return out;
}

/// Sum of weighted samples of f(element, physical point) over all elements,
/// ascending element index.
template <typename F>
double integrate_volume(const DgSpace& space, const F& f) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& quad = space.quadrature();
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    for (int q = 0; q < quad.num_tri_points(); ++q)
      total += quad.tri_weights[q] * jac *
               f(e, mesh.to_physical(e, quad.tri_points[q]));
  }
  return total;
}

/// Sum of weighted samples of f(facet, physical point) over the given
/// facets, ascending position in the list.
template <typename F>
double integrate_facets(const DgSpace& space, const std::vector<int>& facets,
                        const F& f) {
  double total = 0.0;
  for (int fi : facets) {
    const FacetTabulation& tab = space.facet_tabulation(fi);
    for (std::size_t q = 0; q < tab.points.size(); ++q)
      total += tab.weights[q] * f(fi, tab.points[q]);
  }
  return total;
}

}  // namespace pbiharm
