#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dpp/errors.hpp"
#include "dpp/model.hpp"

namespace dpp {

struct BoundaryFacet {
  int edge = -1;                ///< index into TriangleMesh::edges
  Side side = Side::Left;
  Eigen::Vector2d normal{0, 0};  ///< outward unit normal
};

/// Conforming triangulation of the unit square. Triangles are
/// counterclockwise; edges are unique sorted vertex pairs; boundary facets
/// carry a side tag and the outward normal. Immutable after construction.
struct TriangleMesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;           ///< (min, max) vertex pairs
  std::vector<std::array<int, 3>> triangle_edges;  ///< edges (v0,v1),(v1,v2),(v2,v0)
  std::vector<BoundaryFacet> boundary_facets;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
};

inline double triangle_signed_area(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  Eigen::Vector2d a = mesh.vertices[tri[0]];
  Eigen::Vector2d b = mesh.vertices[tri[1]];
  Eigen::Vector2d c = mesh.vertices[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

namespace detail {

/// Builds edges, triangle-edge tables and tagged boundary facets from
/// vertices and triangles, validating manifoldness and orientation.
inline void finalize_mesh(TriangleMesh& mesh) {
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || v >= mesh.vertex_count()) {
        throw MeshFormatError("triangle " + std::to_string(t) +
                              " references vertex " + std::to_string(v) +
                              " out of range");
      }
    }
    if (triangle_signed_area(mesh, t) <= 0.0) {
      throw MeshFormatError("triangle " + std::to_string(t) +
                            " is degenerate or clockwise (area <= 0)");
    }
  }

  mesh.edges.clear();
  mesh.triangle_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  std::map<std::array<int, 2>, int> edge_index;
  std::vector<int> adjacency;  // triangles per edge
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int u = tri[k];
      int v = tri[(k + 1) % 3];
      std::array<int, 2> key{std::min(u, v), std::max(u, v)};
      auto [it, inserted] = edge_index.try_emplace(key, mesh.edge_count());
      if (inserted) {
        mesh.edges.push_back(key);
        adjacency.push_back(0);
      }
      mesh.triangle_edges[t][k] = it->second;
      if (++adjacency[it->second] > 2) {
        throw MeshFormatError("edge shared by more than two triangles");
      }
    }
  }

  mesh.boundary_facets.clear();
  for (int e = 0; e < mesh.edge_count(); ++e) {
    if (adjacency[e] != 1) continue;
    Eigen::Vector2d a = mesh.vertices[mesh.edges[e][0]];
    Eigen::Vector2d b = mesh.vertices[mesh.edges[e][1]];
    Side side;
    if (a.x() == 0.0 && b.x() == 0.0) side = Side::Left;
    else if (a.x() == 1.0 && b.x() == 1.0) side = Side::Right;
    else if (a.y() == 0.0 && b.y() == 0.0) side = Side::Bottom;
    else if (a.y() == 1.0 && b.y() == 1.0) side = Side::Top;
    else throw MeshFormatError("boundary edge does not lie on a side of the unit square");
    mesh.boundary_facets.push_back({e, side, side_normal(side)});
  }
}

}  // namespace detail

/// Structured triangulation of [0,1]^2: (nx+1)(ny+1) grid vertices, each cell
/// split along its lower-left to upper-right diagonal into two triangles.
inline TriangleMesh generate_unit_square_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw Error("mesh resolution must be at least 1x1 (got " +
                std::to_string(nx) + "x" + std::to_string(ny) + ")");
  }
  TriangleMesh mesh;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.vertices.emplace_back(static_cast<double>(i) / nx,
                                 static_cast<double>(j) / ny);
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  detail::finalize_mesh(mesh);
  return mesh;
}

/// All vertices on a side, corners included (a corner lies on both of its
/// adjacent sides). Returned in increasing index order.
inline std::vector<int> boundary_vertices_on_side(const TriangleMesh& mesh,
                                                  Side side) {
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Eigen::Vector2d& p = mesh.vertices[v];
    bool on = false;
    switch (side) {
      case Side::Left: on = p.x() == 0.0; break;
      case Side::Right: on = p.x() == 1.0; break;
      case Side::Bottom: on = p.y() == 0.0; break;
      case Side::Top: on = p.y() == 1.0; break;
    }
    if (on) out.push_back(v);
  }
  return out;
}

/// Text form: "dppmesh 1" header, vertex/triangle counts, vertex coordinates,
/// 0-based connectivity. Edges and boundary facets are recomputed on import.
inline std::string export_mesh(const TriangleMesh& mesh) {
  std::string out = "dppmesh 1\n";
  out += std::to_string(mesh.vertex_count()) + " " +
         std::to_string(mesh.triangle_count()) + "\n";
  char buf[72];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    out += buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
    out += buf;
  }
  return out;
}

inline TriangleMesh import_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "dppmesh" || version != 1) {
    throw MeshFormatError("missing or unsupported mesh header (want 'dppmesh 1')");
  }
  long long nv = -1, nt = -1;
  if (!(in >> nv >> nt) || nv < 3 || nt < 1) {
    throw MeshFormatError("malformed vertex/triangle counts");
  }
  TriangleMesh mesh;
  mesh.vertices.resize(static_cast<std::size_t>(nv));
  for (auto& v : mesh.vertices) {
    if (!(in >> v.x() >> v.y())) throw MeshFormatError("malformed vertex line");
  }
  mesh.triangles.resize(static_cast<std::size_t>(nt));
  for (auto& t : mesh.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) {
      throw MeshFormatError("malformed triangle line");
    }
  }
  std::string rest;
  if (in >> rest) throw MeshFormatError("trailing content after triangle list");
  detail::finalize_mesh(mesh);
  return mesh;
}

}  // namespace dpp
