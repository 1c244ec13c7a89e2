#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dpp/errors.hpp"

namespace dpp {

/// Shape function values and reference-coordinate gradients at one point.
struct ShapeEval {
  std::vector<double> values;
  std::vector<Eigen::Vector2d> gradients;
};

/// Lagrange element of order 1 or 3 on the reference triangle
/// {(xi, eta) : xi, eta >= 0, xi + eta <= 1}.
///
/// P3 node layout: vertices 0..2, two equally spaced nodes per edge
/// (3,4 on edge 0-1, 5,6 on edge 1-2, 7,8 on edge 2-0, each pair ordered away
/// from the edge's first vertex), centroid 9. Basis i is 1 at node i and 0 at
/// the others.
class ReferenceElement {
 public:
  explicit ReferenceElement(int order) : order_(order) {
    if (order == 1) {
      nodes_ = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    } else if (order == 3) {
      const double c = 1.0 / 3.0;
      nodes_ = {{0.0, 0.0},     {1.0, 0.0},     {0.0, 1.0},
                {c, 0.0},       {2 * c, 0.0},                 // edge 0-1
                {2 * c, c},     {c, 2 * c},                   // edge 1-2
                {0.0, 2 * c},   {0.0, c},                     // edge 2-0
                {c, c}};
    } else {
      throw Error("unsupported element order " + std::to_string(order));
    }
  }

  int order() const { return order_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

  /// Values and gradients of every basis function at (xi, eta). The point
  /// must lie in the reference triangle up to a 1e-12 tolerance.
  ShapeEval eval(double xi, double eta) const {
    constexpr double tol = 1e-12;
    if (xi < -tol || eta < -tol || xi + eta > 1.0 + tol) {
      throw Error("shape evaluation point outside the reference triangle");
    }
    ShapeEval out;
    out.values.resize(node_count());
    out.gradients.resize(node_count());

    // Barycentric coordinates and their constant reference gradients.
    const double l[3] = {1.0 - xi - eta, xi, eta};
    static const Eigen::Vector2d gl[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

    if (order_ == 1) {
      for (int i = 0; i < 3; ++i) {
        out.values[i] = l[i];
        out.gradients[i] = gl[i];
      }
      return out;
    }

    auto vertex = [&](int i) {
      out.values[i] = 0.5 * l[i] * (3 * l[i] - 1) * (3 * l[i] - 2);
      out.gradients[i] = 0.5 * (27 * l[i] * l[i] - 18 * l[i] + 2) * gl[i];
    };
    // Edge basis with weight 2/3 on barycentric i and 1/3 on j.
    auto edge = [&](int node, int i, int j) {
      out.values[node] = 4.5 * l[i] * l[j] * (3 * l[i] - 1);
      out.gradients[node] = 4.5 * (l[j] * (6 * l[i] - 1) * gl[i] +
                                   l[i] * (3 * l[i] - 1) * gl[j]);
    };
    vertex(0);
    vertex(1);
    vertex(2);
    edge(3, 0, 1);
    edge(4, 1, 0);
    edge(5, 1, 2);
    edge(6, 2, 1);
    edge(7, 2, 0);
    edge(8, 0, 2);
    out.values[9] = 27 * l[0] * l[1] * l[2];
    out.gradients[9] = 27 * (l[1] * l[2] * gl[0] + l[0] * l[2] * gl[1] +
                             l[0] * l[1] * gl[2]);
    return out;
  }

 private:
  int order_;
  std::vector<Eigen::Vector2d> nodes_;
};

}  // namespace dpp
