#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pbiharm/space.hpp"

namespace pbiharm {

/// Legacy ASCII VTK dump of discontinuous fields: every element gets its own
/// three point copies so the per-element vertex samples of u_h and d_h are
/// preserved without averaging across facets.
inline void write_fields_vtk(const DgFunction& u, const DgFunction& d,
                             std::ostream& out) {
  const DgSpace& space = *u.space;
  const Mesh& mesh = space.mesh();
  const int ne = mesh.num_elements();
  const Eigen::Vector2d ref[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

  out << "# vtk DataFile Version 3.0\n";
  out << "p-biharmonic dG solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * ne << " double\n";
  for (int e = 0; e < ne; ++e)
    for (const auto& r : ref) {
      const Eigen::Vector2d x = mesh.to_physical(e, r);
      out << x.x() << " " << x.y() << " 0\n";
    }
  out << "CELLS " << ne << " " << 4 * ne << "\n";
  for (int e = 0; e < ne; ++e)
    out << "3 " << 3 * e << " " << 3 * e + 1 << " " << 3 * e + 2 << "\n";
  out << "CELL_TYPES " << ne << "\n";
  for (int e = 0; e < ne; ++e)
    out << "5\n";

  out << "POINT_DATA " << 3 * ne << "\n";
  const DgFunction* fields[2] = {&u, &d};
  const char* names[2] = {"u_h", "d_h"};
  for (int k = 0; k < 2; ++k) {
    out << "SCALARS " << names[k] << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int e = 0; e < ne; ++e)
      for (const auto& r : ref)
        out << fields[k]->evaluate(e, r).value << "\n";
  }
}

}  // namespace pbiharm
