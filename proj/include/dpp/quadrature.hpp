#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "dpp/errors.hpp"

namespace dpp {

/// Quadrature rule on the reference triangle. Weights are strictly positive
/// and sum to the reference area 1/2; the rule is invariant under every
/// affine symmetry of the triangle.
struct QuadratureRule {
  int degree = 0;  ///< every polynomial of total degree <= degree is exact
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

namespace detail {

/// Gauss-Legendre nodes and weights on [0, 1], computed by Newton iteration
/// on the Legendre recurrence. Accurate to machine precision for the small
/// counts used here.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_01(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * z * p1 - k * p2) / (k + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 + z);
    w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
  }
  return {x, w};
}

}  // namespace detail

/// Builds a symmetric positive-weight rule exact to at least `degree`
/// (1 <= degree <= 10). A collapsed Gauss product rule on the triangle is
/// symmetrized over the six affine symmetries; symmetrization preserves
/// exactness because polynomial total degree is affine-invariant.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 1 || degree > 10) {
    throw Error("unsupported quadrature degree " + std::to_string(degree) +
                " (supported range is 1..10)");
  }
  // Product Gauss-Legendre on (s, r): point (xi, eta) = (s, r(1-s)) with
  // weight ws * wr * (1-s). For a monomial of total degree d the integrand is
  // degree d+1 in s and d in r, so n points per direction are exact for
  // total degree 2n-2.
  const int n = (degree + 3) / 2;
  auto [gx, gw] = detail::gauss_legendre_01(n);

  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(6 * n * n);
  rule.weights.reserve(6 * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = gx[i];
      const double eta = gx[j] * (1.0 - gx[i]);
      const double w = gw[i] * gw[j] * (1.0 - gx[i]) / 6.0;
      const double l0 = 1.0 - xi - eta;
      // All six permutations of the barycentric coordinates (l0, xi, eta);
      // a barycentric triple (a, b, c) maps to the point (b, c).
      const double perm[6][2] = {{xi, eta}, {eta, xi}, {l0, eta},
                                 {eta, l0}, {l0, xi},  {xi, l0}};
      for (const auto& p : perm) {
        rule.points.emplace_back(p[0], p[1]);
        rule.weights.push_back(w);
      }
    }
  }
  return rule;
}

}  // namespace dpp
