#pragma once

#include <Eigen/Dense>

#include <array>
#include <cassert>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pbiharm {

/// An edge of the triangulation. Interior facets are shared by exactly two
/// elements (owner < neighbor); boundary facets have neighbor == -1. The
/// unit normal points from the owner into the neighbor, or out of the
/// domain on the boundary.
struct Facet {
  std::array<int, 2> vertices{-1, -1};
  int owner = -1;
  int neighbor = -1;
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
  double length = 0.0;

  bool on_boundary() const { return neighbor < 0; }
};

/// Conforming simplicial triangulation of the unit square with full facet
/// connectivity. Immutable after construction.
class Mesh {
public:
  /// Uniform n x n grid of squares, each split into two triangles by the
  /// diagonal from (i,j) to (i+1,j+1). 2n^2 elements, max_K h_K = sqrt(2)/n.
  static Mesh unit_square(int n);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const Eigen::Vector2d& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  const Facet& facet(int f) const { return facets_[f]; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// Facet indices of element e, opposite local vertices 0,1,2.
  const std::array<int, 3>& element_facets(int e) const { return element_facets_[e]; }

  const std::vector<int>& interior_facets() const { return interior_facets_; }
  const std::vector<int>& boundary_facets() const { return boundary_facets_; }

  double element_diameter(int e) const { return diameters_[e]; }
  double element_inradius(int e) const { return inradii_[e]; }
  double element_area(int e) const { return areas_[e]; }
  double max_diameter() const { return max_diameter_; }

  /// Affine map K: x = v0 + J * xref, with xref in the reference triangle
  /// {(0,0),(1,0),(0,1)}.
  const Eigen::Matrix2d& jacobian(int e) const { return jacobians_[e]; }
  const Eigen::Matrix2d& jacobian_inverse(int e) const { return inverse_jacobians_[e]; }
  double jacobian_det(int e) const { return 2.0 * areas_[e]; }

  Eigen::Vector2d to_physical(int e, const Eigen::Vector2d& xref) const {
    return vertices_[elements_[e][0]] + jacobians_[e] * xref;
  }
  Eigen::Vector2d to_reference(int e, const Eigen::Vector2d& x) const {
    return inverse_jacobians_[e] * (x - vertices_[elements_[e][0]]);
  }

  /// Outward unit normal of element e on facet f (flips the stored normal
  /// when e is the neighbor).
  Eigen::Vector2d outward_normal(int e, int f) const {
    const Facet& fa = facets_[f];
    assert(fa.owner == e || fa.neighbor == e);
    return fa.owner == e ? fa.normal : Eigen::Vector2d(-fa.normal);
  }

  /// min_K rho_K / h_K over all elements.
  double shape_regularity() const;

  double total_area() const;

  /// Legacy ASCII VTK dump of the triangulation (cell type 5).
  void write_vtk(std::ostream& out) const;

private:
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> element_facets_;
  std::vector<int> interior_facets_;
  std::vector<int> boundary_facets_;
  std::vector<double> diameters_;
  std::vector<double> inradii_;
  std::vector<double> areas_;
  std::vector<Eigen::Matrix2d> jacobians_;
  std::vector<Eigen::Matrix2d> inverse_jacobians_;
  double max_diameter_ = 0.0;

  void build_connectivity();
};

inline Mesh Mesh::unit_square(int n) {
  if (n < 1)
    throw std::invalid_argument("Mesh::unit_square: n must be >= 1");

  Mesh mesh;
  const double h = 1.0 / n;
  mesh.vertices_.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices_.emplace_back(i * h, j * h);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  mesh.elements_.reserve(static_cast<std::size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j);
      const int v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1);
      const int v11 = vid(i + 1, j + 1);
      // Both triangles counter-clockwise, split along v00--v11.
      mesh.elements_.push_back({v00, v10, v11});
      mesh.elements_.push_back({v00, v11, v01});
    }
  }

  mesh.build_connectivity();
  return mesh;
}

inline void Mesh::build_connectivity() {
  const int ne = num_elements();
  diameters_.resize(ne);
  inradii_.resize(ne);
  areas_.resize(ne);
  jacobians_.resize(ne);
  inverse_jacobians_.resize(ne);
  element_facets_.assign(ne, {-1, -1, -1});

  max_diameter_ = 0.0;
  for (int e = 0; e < ne; ++e) {
    const auto& tri = elements_[e];
    const Eigen::Vector2d& a = vertices_[tri[0]];
    const Eigen::Vector2d& b = vertices_[tri[1]];
    const Eigen::Vector2d& c = vertices_[tri[2]];

    Eigen::Matrix2d J;
    J.col(0) = b - a;
    J.col(1) = c - a;
    const double det = J.determinant();
    if (det <= 0.0)
      throw std::runtime_error("Mesh: element with non-positive orientation");
    jacobians_[e] = J;
    inverse_jacobians_[e] = J.inverse();
    areas_[e] = 0.5 * det;

    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    diameters_[e] = std::max({la, lb, lc});
    // Incircle radius: 2*area / perimeter.
    inradii_[e] = 2.0 * areas_[e] / (la + lb + lc);
    max_diameter_ = std::max(max_diameter_, diameters_[e]);
  }

  // Facets keyed by sorted vertex pair; owner is the lower element index.
  std::map<std::pair<int, int>, int> facet_of_edge;
  facets_.clear();
  for (int e = 0; e < ne; ++e) {
    const auto& tri = elements_[e];
    for (int le = 0; le < 3; ++le) {
      // Local edge le is opposite local vertex le.
      const int va = tri[(le + 1) % 3];
      const int vb = tri[(le + 2) % 3];
      const std::pair<int, int> key{std::min(va, vb), std::max(va, vb)};
      auto it = facet_of_edge.find(key);
      if (it == facet_of_edge.end()) {
        Facet f;
        f.vertices = {va, vb};
        f.owner = e;
        const Eigen::Vector2d t = vertices_[vb] - vertices_[va];
        f.length = t.norm();
        // Rotate the (ccw-ordered) edge tangent to get the outward normal.
        f.normal = Eigen::Vector2d(t.y(), -t.x()) / f.length;
        const int fid = static_cast<int>(facets_.size());
        facets_.push_back(f);
        facet_of_edge.emplace(key, fid);
        element_facets_[e][le] = fid;
      } else {
        Facet& f = facets_[it->second];
        if (f.neighbor >= 0)
          throw std::runtime_error("Mesh: facet shared by more than two elements");
        f.neighbor = e;
        element_facets_[e][le] = it->second;
      }
    }
  }

  interior_facets_.clear();
  boundary_facets_.clear();
  for (int f = 0; f < num_facets(); ++f) {
    if (facets_[f].on_boundary())
      boundary_facets_.push_back(f);
    else
      interior_facets_.push_back(f);
  }
}

inline double Mesh::shape_regularity() const {
  double mu = std::numeric_limits<double>::infinity();
  for (int e = 0; e < num_elements(); ++e)
    mu = std::min(mu, inradii_[e] / diameters_[e]);
  return mu;
}

inline double Mesh::total_area() const {
  double area = 0.0;
  for (double a : areas_)
    area += a;
  return area;
}

inline void Mesh::write_vtk(std::ostream& out) const {
  out << "# vtk DataFile Version 3.0\n";
  out << "triangulation\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << num_vertices() << " double\n";
  for (const auto& v : vertices_)
    out << v.x() << " " << v.y() << " 0\n";
  out << "CELLS " << num_elements() << " " << 4 * num_elements() << "\n";
  for (const auto& tri : elements_)
    out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  out << "CELL_TYPES " << num_elements() << "\n";
  for (int e = 0; e < num_elements(); ++e)
    out << "5\n";
}

}  // namespace pbiharm
