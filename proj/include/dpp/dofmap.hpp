#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "dpp/element.hpp"
#include "dpp/errors.hpp"
#include "dpp/mesh.hpp"
#include "dpp/quadrature.hpp"

namespace dpp {

/// Solution fields in their global ordering: the four cubic velocity
/// components, then the two linear pressures.
enum class Field { V1X = 0, V1Y = 1, V2X = 2, V2Y = 3, P1 = 4, P2 = 5 };

inline constexpr std::array<Field, 6> kAllFields = {
    Field::V1X, Field::V1Y, Field::V2X, Field::V2Y, Field::P1, Field::P2};
inline constexpr std::array<Field, 4> kVelocityFields = {
    Field::V1X, Field::V1Y, Field::V2X, Field::V2Y};

inline bool is_velocity(Field f) { return static_cast<int>(f) < 4; }
inline bool is_pressure(Field f) { return !is_velocity(f); }

/// Velocity x/y component pair of one network.
inline std::pair<Field, Field> velocity_fields(int network) {
  return network == 1 ? std::pair{Field::V1X, Field::V1Y}
                      : std::pair{Field::V2X, Field::V2Y};
}
inline Field pressure_field(int network) {
  return network == 1 ? Field::P1 : Field::P2;
}

/// DOF layout for the mixed cubic-velocity / linear-pressure discretization.
///
/// A scalar cubic field has one DOF per vertex, two per edge (ordered from
/// the edge's lower-index vertex) and one per triangle, V + 2E + T in total;
/// a scalar linear field has one DOF per vertex. Shared edge and vertex DOFs
/// coincide across neighboring elements, so all fields are C0.
struct MixedDofMap {
  int p3_scalar_count = 0;
  int p1_scalar_count = 0;
  int total = 0;
  std::array<int, 6> offsets{};  ///< per-field start in the global vector

  /// Per triangle, the ten scalar cubic DOF indices in reference-node order.
  std::vector<std::array<int, 10>> element_p3;
  /// Physical location of every scalar cubic DOF.
  std::vector<Eigen::Vector2d> p3_nodes;

  int field_size(Field f) const {
    return is_velocity(f) ? p3_scalar_count : p1_scalar_count;
  }
  int offset(Field f) const { return offsets[static_cast<int>(f)]; }
  int global(Field f, int scalar_index) const {
    return offset(f) + scalar_index;
  }
};

inline MixedDofMap build_mixed_dof_map(const TriangleMesh& mesh) {
  MixedDofMap dm;
  const int nv = mesh.vertex_count();
  const int ne = mesh.edge_count();
  const int nt = mesh.triangle_count();
  dm.p3_scalar_count = nv + 2 * ne + nt;
  dm.p1_scalar_count = nv;
  int pos = 0;
  for (Field f : kAllFields) {
    dm.offsets[static_cast<int>(f)] = pos;
    pos += dm.field_size(f);
  }
  dm.total = pos;

  dm.p3_nodes.resize(dm.p3_scalar_count);
  for (int v = 0; v < nv; ++v) dm.p3_nodes[v] = mesh.vertices[v];
  for (int e = 0; e < ne; ++e) {
    Eigen::Vector2d a = mesh.vertices[mesh.edges[e][0]];
    Eigen::Vector2d b = mesh.vertices[mesh.edges[e][1]];
    dm.p3_nodes[nv + 2 * e] = a + (b - a) / 3.0;
    dm.p3_nodes[nv + 2 * e + 1] = a + 2.0 * (b - a) / 3.0;
  }
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    dm.p3_nodes[nv + 2 * ne + t] =
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
  }

  dm.element_p3.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    auto& loc = dm.element_p3[t];
    loc[0] = tri[0];
    loc[1] = tri[1];
    loc[2] = tri[2];
    // Edge DOF pairs follow the element's local edge direction; globally they
    // are stored from the lower-index vertex, so flip when the local edge
    // runs against that orientation.
    for (int k = 0; k < 3; ++k) {
      int u = tri[k];
      int v = tri[(k + 1) % 3];
      int base = nv + 2 * mesh.triangle_edges[t][k];
      loc[3 + 2 * k] = u < v ? base : base + 1;      // node at 1/3 from u
      loc[3 + 2 * k + 1] = u < v ? base + 1 : base;  // node at 2/3 from u
    }
    loc[9] = nv + 2 * ne + t;
  }
  return dm;
}

/// Affine reference-to-physical map data of one triangle.
struct AffineMap {
  Eigen::Matrix2d jacobian;
  double det = 0.0;
  Eigen::Matrix2d inverse_transpose;  ///< transforms reference gradients
};

inline AffineMap affine_map(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  Eigen::Vector2d a = mesh.vertices[tri[0]];
  Eigen::Vector2d b = mesh.vertices[tri[1]];
  Eigen::Vector2d c = mesh.vertices[tri[2]];
  AffineMap m;
  m.jacobian.col(0) = b - a;
  m.jacobian.col(1) = c - a;
  m.det = m.jacobian.determinant();
  if (m.det <= 0.0) {
    throw Error("degenerate triangle " + std::to_string(t) +
                " (jacobian determinant <= 0)");
  }
  m.inverse_transpose = m.jacobian.inverse().transpose();
  return m;
}

inline Eigen::Vector2d map_to_physical(const TriangleMesh& mesh, int t,
                                       const Eigen::Vector2d& ref) {
  const auto& tri = mesh.triangles[t];
  Eigen::Vector2d a = mesh.vertices[tri[0]];
  return a + (mesh.vertices[tri[1]] - a) * ref.x() +
         (mesh.vertices[tri[2]] - a) * ref.y();
}

/// Nodal interpolation of f(x, y) into one scalar field; returns the
/// coefficient segment of that field (size field_size(f)).
inline Eigen::VectorXd interpolate_field(
    const TriangleMesh& mesh, const MixedDofMap& dm, Field f,
    const std::function<double(double, double)>& fn) {
  Eigen::VectorXd coeffs(dm.field_size(f));
  if (is_velocity(f)) {
    for (int i = 0; i < dm.p3_scalar_count; ++i) {
      coeffs[i] = fn(dm.p3_nodes[i].x(), dm.p3_nodes[i].y());
    }
  } else {
    for (int i = 0; i < dm.p1_scalar_count; ++i) {
      coeffs[i] = fn(mesh.vertices[i].x(), mesh.vertices[i].y());
    }
  }
  return coeffs;
}

/// Quadrature of a pointwise integrand over the whole mesh.
inline double integrate_scalar(const TriangleMesh& mesh,
                               const std::function<double(double, double)>& fn,
                               int degree) {
  QuadratureRule rule = triangle_quadrature(degree);
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    AffineMap map = affine_map(mesh, t);
    double acc = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      Eigen::Vector2d x = map_to_physical(mesh, t, rule.points[q]);
      acc += rule.weights[q] * fn(x.x(), x.y());
    }
    total += acc * map.det;
  }
  return total;
}

namespace detail {

/// Shape tables at the points of a quadrature rule, shared by assembly and
/// the norm integrals.
struct ShapeTables {
  QuadratureRule rule;
  std::vector<std::array<double, 10>> p3_values;             // [q][node]
  std::vector<std::array<Eigen::Vector2d, 10>> p3_ref_grads;  // [q][node]
  std::vector<std::array<double, 3>> p1_values;               // [q][node]

  explicit ShapeTables(int degree) : rule(triangle_quadrature(degree)) {
    ReferenceElement p3(3), p1(1);
    const int nq = rule.size();
    p3_values.resize(nq);
    p3_ref_grads.resize(nq);
    p1_values.resize(nq);
    for (int q = 0; q < nq; ++q) {
      ShapeEval e3 = p3.eval(rule.points[q].x(), rule.points[q].y());
      ShapeEval e1 = p1.eval(rule.points[q].x(), rule.points[q].y());
      for (int a = 0; a < 10; ++a) {
        p3_values[q][a] = e3.values[a];
        p3_ref_grads[q][a] = e3.gradients[a];
      }
      for (int a = 0; a < 3; ++a) p1_values[q][a] = e1.values[a];
    }
  }
};

}  // namespace detail
}  // namespace dpp
