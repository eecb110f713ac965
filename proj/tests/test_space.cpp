#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pbiharm/benchmark.hpp"
#include "pbiharm/mesh.hpp"
#include "pbiharm/norms.hpp"
#include "pbiharm/space.hpp"
#include "support.hpp"

using pbiharm::DgFunction;
using pbiharm::DgSpace;
using pbiharm::Mesh;

TEST_CASE("dof counts") {
  const Mesh m1 = Mesh::unit_square(1);
  CHECK(DgSpace(m1, 2).total_dofs() == 12);
  const Mesh m2 = Mesh::unit_square(2);
  CHECK(DgSpace(m2, 3).total_dofs() == 80);
  CHECK(DgSpace(m2, 3).dofs_per_element() == 10);
  CHECK_THROWS_AS(DgSpace(m1, 1), std::invalid_argument);
}

TEST_CASE("element mass matrices are the identity") {
  const Mesh mesh = Mesh::unit_square(2);
  for (int k : {2, 3, 4}) {
    const DgSpace space(mesh, k);
    const auto& quad = space.quadrature();
    const int nd = space.dofs_per_element();
    for (int e : {0, 3, 7}) {
      Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nd, nd);
      const double jac = mesh.jacobian_det(e);
      const double s = space.basis_scale(e);
      for (int q = 0; q < quad.num_tri_points(); ++q) {
        const Eigen::VectorXd v = s * space.tab_values().row(q).transpose();
        mass += quad.tri_weights[q] * jac * v * v.transpose();
      }
      CHECK((mass - Eigen::MatrixXd::Identity(nd, nd)).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
}

TEST_CASE("evaluation reproduces polynomial data exactly") {
  const Mesh mesh = Mesh::unit_square(2);
  const DgSpace space(mesh, 2);

  SECTION("zero coefficients") {
    const DgFunction zero(space);
    const auto ev = zero.evaluate(1, {0.3, 0.3});
    CHECK(ev.value == 0.0);
    CHECK(ev.gradient.norm() == 0.0);
    CHECK(ev.hessian.norm() == 0.0);
  }

  SECTION("g = x^2 has constant Hessian [[2,0],[0,0]]") {
    const DgFunction g = pbiharm::l2_project(
        [](const Eigen::Vector2d& x) { return x.x() * x.x(); }, space);
    for (int e : {0, 2, 5}) {
      for (const Eigen::Vector2d xref : {Eigen::Vector2d(0.2, 0.1),
                                         Eigen::Vector2d(0.5, 0.25)}) {
        const auto ev = g.evaluate(e, xref);
        CHECK(ev.hessian(0, 0) == Catch::Approx(2.0).margin(1e-11));
        CHECK(std::abs(ev.hessian(0, 1)) < 1e-11);
        CHECK(std::abs(ev.hessian(1, 1)) < 1e-11);
      }
    }
  }

  SECTION("g = xy has gradient (y, x)") {
    const DgFunction g = pbiharm::l2_project(
        [](const Eigen::Vector2d& x) { return x.x() * x.y(); }, space);
    for (int e : {1, 4, 6}) {
      const Eigen::Vector2d xref(0.25, 0.5);
      const Eigen::Vector2d x = mesh.to_physical(e, xref);
      const auto ev = g.evaluate(e, xref);
      CHECK(ev.gradient.x() == Catch::Approx(x.y()).margin(1e-12));
      CHECK(ev.gradient.y() == Catch::Approx(x.x()).margin(1e-12));
    }
  }

  SECTION("out-of-range element index") {
    const DgFunction zero(space);
    CHECK_THROWS_AS(zero.evaluate(mesh.num_elements(), {0.1, 0.1}),
                    std::out_of_range);
  }
}

TEST_CASE("projection reproduces degree <= k fields at quadrature points") {
  const Mesh mesh = Mesh::unit_square(2);
  const DgSpace space(mesh, 3);
  auto g = [](const Eigen::Vector2d& x) {
    return 1.0 + x.x() - 2.0 * x.y() + 0.5 * x.x() * x.y() * x.y() -
           x.x() * x.x() * x.x();
  };
  const DgFunction pg = pbiharm::l2_project(g, space);
  double max_err = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (const auto& xq : space.quadrature().tri_points) {
      const double err = std::abs(pg.evaluate(e, xq).value -
                                  g(mesh.to_physical(e, xq)));
      max_err = std::max(max_err, err);
    }
  CHECK(max_err < 1e-10);
}

TEST_CASE("projection of a constant is the constant") {
  const Mesh mesh = Mesh::unit_square(3);
  const DgSpace space(mesh, 2);
  const DgFunction one =
      pbiharm::l2_project([](const Eigen::Vector2d&) { return 1.0; }, space);
  for (int e = 0; e < mesh.num_elements(); ++e)
    CHECK(one.evaluate(e, {0.3, 0.4}).value == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("projection is idempotent") {
  const Mesh mesh = Mesh::unit_square(2);
  const DgSpace space(mesh, 2);
  const DgFunction v = testsupport::random_field(space, 7);
  // Projecting a member of the space returns identical coefficients: the
  // basis moments of v must reproduce v.coeffs.
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(space.total_dofs());
  const auto& quad = space.quadrature();
  const int nd = space.dofs_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = mesh.jacobian_det(e);
    const double s = space.basis_scale(e);
    auto local = moments.segment(e * nd, nd);
    for (int q = 0; q < quad.num_tri_points(); ++q) {
      const double val = v.evaluate(e, quad.tri_points[q]).value;
      local += (quad.tri_weights[q] * jac * val * s) *
               space.tab_values().row(q).transpose();
    }
  }
  CHECK((moments - v.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection is the L2 best approximation") {
  const Mesh mesh = Mesh::unit_square(2);
  const DgSpace space(mesh, 2);
  auto g = [](const Eigen::Vector2d& x) {
    return std::sin(3.0 * x.x()) * std::exp(x.y());
  };
  const DgFunction pg = pbiharm::l2_project(g, space);
  const double best = pbiharm::lp_norm_local(
      [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
        return g(x) - pg.evaluate(e, xref).value;
      },
      2.0, space);
  for (int trial = 0; trial < 20; ++trial) {
    DgFunction v = testsupport::random_field(space, 100 + trial);
    v.coeffs = pg.coeffs + 0.1 * v.coeffs;
    const double other = pbiharm::lp_norm_local(
        [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
          return g(x) - v.evaluate(e, xref).value;
        },
        2.0, space);
    CHECK(best <= other + 1e-13);
  }
}

TEST_CASE("projection error of the benchmark converges at order k+1") {
  const pbiharm::ExactSolution exact;
  auto u = [&](const Eigen::Vector2d& x) { return exact.value(x); };
  double err_prev = 0.0, h_prev = 0.0;
  std::vector<double> eocs;
  for (int n : {8, 16, 32}) {
    const Mesh mesh = Mesh::unit_square(n);
    const DgSpace space(mesh, 2);
    const DgFunction pu = pbiharm::l2_project(u, space);
    const double err = pbiharm::lp_norm_local(
        [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
          return u(x) - pu.evaluate(e, xref).value;
        },
        2.0, space);
    if (err_prev > 0.0)
      eocs.push_back(pbiharm::eoc(err_prev, err, h_prev, mesh.max_diameter()));
    err_prev = err;
    h_prev = mesh.max_diameter();
  }
  for (double r : eocs)
    CHECK(r == Catch::Approx(3.0).margin(0.2));
}

TEST_CASE("derivatives match central finite differences") {
  const Mesh mesh = Mesh::unit_square(2);
  const DgSpace space(mesh, 3);
  const DgFunction v = testsupport::random_field(space, 11);
  const int e = 5;
  const Eigen::Vector2d xref(0.31, 0.22);
  const auto ev = v.evaluate(e, xref);

  const double step = 1e-5;
  const Eigen::Matrix2d Jinv = mesh.jacobian_inverse(e);
  auto value_at = [&](const Eigen::Vector2d& x) {
    return v.evaluate(e, mesh.to_reference(e, x)).value;
  };
  const Eigen::Vector2d x0 = mesh.to_physical(e, xref);
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector2d dx = Eigen::Vector2d::Zero();
    dx[c] = step;
    const double fd = (value_at(x0 + dx) - value_at(x0 - dx)) / (2.0 * step);
    CHECK(fd == Catch::Approx(ev.gradient[c]).epsilon(1e-6));
    const double fd2 =
        (value_at(x0 + dx) - 2.0 * value_at(x0) + value_at(x0 - dx)) /
        (step * step);
    CHECK(fd2 == Catch::Approx(ev.hessian(c, c)).epsilon(1e-4).margin(1e-4));
  }
  const Eigen::Vector2d hx(step, 0.0), hy(0.0, step);
  const double fdxy = (value_at(x0 + hx + hy) - value_at(x0 + hx - hy) -
                       value_at(x0 - hx + hy) + value_at(x0 - hx - hy)) /
                      (4.0 * step * step);
  CHECK(fdxy == Catch::Approx(ev.hessian(0, 1)).epsilon(1e-4).margin(1e-4));
  (void)Jinv;
}

TEST_CASE("volume and facet integration") {
  const Mesh mesh = Mesh::unit_square(4);
  const DgSpace space(mesh, 2);
  const double one = pbiharm::integrate_volume(
      space, [](int, const Eigen::Vector2d&) { return 1.0; });
  CHECK(one == Catch::Approx(1.0).margin(1e-12));

  const double xy = pbiharm::integrate_volume(
      space, [](int, const Eigen::Vector2d& x) { return x.x() * x.y(); });
  CHECK(xy == Catch::Approx(0.25).margin(1e-12));

  const double perimeter = pbiharm::integrate_facets(
      space, mesh.boundary_facets(),
      [](int, const Eigen::Vector2d&) { return 1.0; });
  CHECK(perimeter == Catch::Approx(4.0).margin(1e-12));
}
