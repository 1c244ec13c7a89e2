#pragma once

#include <array>
#include <cstdio>
#include <string>

#include "dpp/dofmap.hpp"
#include "dpp/mesh.hpp"
#include "dpp/model.hpp"
#include "dpp/solver.hpp"

namespace dpp {

namespace detail {

/// Linear pressure coefficients evaluated at the cubic node set: vertex nodes
/// copy the vertex value, edge nodes interpolate along the edge, interior
/// nodes take the vertex mean.
inline Eigen::VectorXd p1_at_p3_nodes(const TriangleMesh& mesh,
                                      const MixedDofMap& dm,
                                      const Eigen::VectorXd& p1_coeffs) {
  Eigen::VectorXd out(dm.p3_scalar_count);
  const int nv = mesh.vertex_count();
  for (int v = 0; v < nv; ++v) out[v] = p1_coeffs[v];
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const double pu = p1_coeffs[mesh.edges[e][0]];
    const double pv = p1_coeffs[mesh.edges[e][1]];
    out[nv + 2 * e] = (2.0 * pu + pv) / 3.0;
    out[nv + 2 * e + 1] = (pu + 2.0 * pv) / 3.0;
  }
  const int base = nv + 2 * mesh.edge_count();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    out[base + t] =
        (p1_coeffs[tri[0]] + p1_coeffs[tri[1]] + p1_coeffs[tri[2]]) / 3.0;
  }
  return out;
}

}  // namespace detail

/// Legacy ASCII VTK export of one state. Points are the cubic node set; each
/// triangle is subdivided through its cubic nodes into 9 linear sub-triangles
/// (the legacy format has no cubic cells). Point data: the velocity vectors
/// of both networks, both pressures interpolated to the cubic nodes, and the
/// pointwise transfer rate -(beta/mu)(p1 - p2).
inline std::string write_vtk(const TriangleMesh& mesh, const MixedDofMap& dm,
                             const TransientState& state,
                             const MediumParameters& params) {
  std::string out;
  out.reserve(1 << 20);
  char buf[160];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };

  out += "# vtk DataFile Version 3.0\n";
  line("dual-network flow fields at t=%.9g\n", state.time);
  out += "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  const int np = dm.p3_scalar_count;
  line("POINTS %d double\n", np);
  for (int i = 0; i < np; ++i) {
    line("%.9g %.9g 0\n", dm.p3_nodes[i].x(), dm.p3_nodes[i].y());
  }

  // Sub-triangulation of the 10-node cubic triangle, in local node ids.
  static constexpr std::array<std::array<int, 3>, 9> kSubTriangles = {{
      {0, 3, 8}, {3, 4, 9}, {4, 1, 5}, {8, 9, 7}, {9, 5, 6}, {7, 6, 2},
      {3, 9, 8}, {4, 5, 9}, {9, 6, 7},
  }};
  const int ncells = 9 * mesh.triangle_count();
  line("CELLS %d %d\n", ncells, 4 * ncells);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& p3 = dm.element_p3[t];
    for (const auto& sub : kSubTriangles) {
      line("3 %d %d %d\n", p3[sub[0]], p3[sub[1]], p3[sub[2]]);
    }
  }
  line("CELL_TYPES %d\n", ncells);
  for (int c = 0; c < ncells; ++c) out += "5\n";

  line("POINT_DATA %d\n", np);
  for (int network : {1, 2}) {
    auto [fx, fy] = velocity_fields(network);
    line("VECTORS v%d double\n", network);
    for (int i = 0; i < np; ++i) {
      line("%.9g %.9g 0\n", state.coeffs[dm.global(fx, i)],
           state.coeffs[dm.global(fy, i)]);
    }
  }

  const Eigen::VectorXd p1 = detail::p1_at_p3_nodes(
      mesh, dm, state.coeffs.segment(dm.offset(Field::P1), dm.p1_scalar_count));
  const Eigen::VectorXd p2 = detail::p1_at_p3_nodes(
      mesh, dm, state.coeffs.segment(dm.offset(Field::P2), dm.p1_scalar_count));
  auto scalar_field = [&](const char* name, auto value_at) {
    line("SCALARS %s double 1\n", name);
    out += "LOOKUP_TABLE default\n";
    for (int i = 0; i < np; ++i) line("%.9g\n", value_at(i));
  };
  scalar_field("p1", [&](int i) { return p1[i]; });
  scalar_field("p2", [&](int i) { return p2[i]; });
  scalar_field("transfer_rate",
               [&](int i) { return transfer_rate(params, p1[i], p2[i]); });
  return out;
}

}  // namespace dpp
