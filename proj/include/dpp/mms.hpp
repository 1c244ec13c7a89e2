#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dpp/diagnostics.hpp"
#include "dpp/expr.hpp"
#include "dpp/solver.hpp"

namespace dpp {

/// A steady manufactured solution: smooth velocity and pressure fields of
/// (x, y) from which matching body forces, mass sources and boundary values
/// are derived by symbolic residuals of the governing equations.
struct ManufacturedSolution {
  Expression v1x, v1y, v2x, v2y, p1, p2;

  /// Cubic velocities and linear pressures; the discrete spaces reproduce
  /// these exactly, so solves recover them to solver precision.
  static ManufacturedSolution polynomial() {
    ManufacturedSolution m;
    m.v1x = Expression::parse("x^3 - 3*x*y^2 + 2");
    m.v1y = Expression::parse("y^3 - 3*x^2*y - 1");
    m.v2x = Expression::parse("x^2*y + x - y");
    m.v2y = Expression::parse("x*y^2 - y + 0.5");
    m.p1 = Expression::parse("1 + 2*x - 3*y");
    m.p2 = Expression::parse("x + y - 0.5");
    return m;
  }

  /// Half-period trigonometric fields; low enough frequency that the
  /// refinement sequence 4..32 sits in the asymptotic regime.
  static ManufacturedSolution trigonometric() {
    ManufacturedSolution m;
    m.v1x = Expression::parse("sin(0.5*pi*x)*cos(0.5*pi*y)");
    m.v1y = Expression::parse("-cos(0.5*pi*x)*sin(0.5*pi*y)");
    m.v2x = Expression::parse("cos(0.5*pi*x)*sin(0.5*pi*y)");
    m.v2y = Expression::parse("sin(0.5*pi*x)*cos(0.5*pi*y)");
    m.p1 = Expression::parse("cos(0.5*pi*x)*cos(0.5*pi*y)");
    m.p2 = Expression::parse("sin(0.5*pi*x)*sin(0.5*pi*y)");
    return m;
  }
};

struct MmsLevelResult {
  int resolution = 0;
  double h = 0.0;
  double err_v1 = 0.0;  ///< L2 error of the network-1 velocity vector
  double err_v2 = 0.0;
  double err_p1 = 0.0;
  double err_p2 = 0.0;
};

/// Per-level errors of a refinement study plus least-squares fitted orders.
struct ConvergenceReport {
  std::vector<MmsLevelResult> levels;
  double order_v1 = 0.0;
  double order_v2 = 0.0;
  double order_p1 = 0.0;
  double order_p2 = 0.0;

  double velocity_order() const { return std::min(order_v1, order_v2); }
  double pressure_order() const { return std::min(order_p1, order_p2); }
};

namespace detail {

struct MmsProblem {
  Forcing forcing;
  BoundaryConditionSpec bcs;
  double pin_value = 0.0;        // manufactured p1 at the pin vertex
  double pin_other_value = 0.0;  // manufactured p2 there (beta = 0 pins)
};

/// Derives forcing and boundary data so the manufactured fields solve the
/// steady equations exactly:
///   b_i = (phi_i^2 drag_i v_i + phi_i grad p_i) / rho_i
///   g_1 = phi_1 div v_1 + (beta/mu)(p1 - p2)
///   g_2 = phi_2 div v_2 - (beta/mu)(p1 - p2)
/// with v.n on every side taken from the manufactured velocities and the
/// pressure pin set to the manufactured value at the pin vertex.
inline MmsProblem build_mms_problem(const MediumParameters& params,
                                    const ManufacturedSolution& m,
                                    const TriangleMesh& mesh) {
  MmsProblem prob;

  struct NetworkFields {
    Expression vx, vy, p, dpx, dpy, div_v;
  };
  auto make = [](const Expression& vx, const Expression& vy,
                 const Expression& p) {
    NetworkFields f{vx, vy, p, p.derivative('x'), p.derivative('y'),
                    vx.derivative('x') + vy.derivative('y')};
    return f;
  };
  const NetworkFields f1 = make(m.v1x, m.v1y, m.p1);
  const NetworkFields f2 = make(m.v2x, m.v2y, m.p2);

  auto momentum_source = [&params](const NetworkFields& f, int network) {
    const double phi = params.phi(network);
    const double rho = params.rho(network);
    const Eigen::Matrix2d drag = phi * phi * params.drag(network);
    return [f, drag, phi, rho](double x, double y, double t) {
      (void)t;
      const Eigen::Vector2d v{f.vx.eval(x, y, 0.0), f.vy.eval(x, y, 0.0)};
      const Eigen::Vector2d gp{f.dpx.eval(x, y, 0.0), f.dpy.eval(x, y, 0.0)};
      return Eigen::Vector2d((drag * v + phi * gp) / rho);
    };
  };
  prob.forcing.b1 = momentum_source(f1, 1);
  prob.forcing.b2 = momentum_source(f2, 2);

  const double beta_mu = params.beta / params.mu;
  auto mass_source = [beta_mu, f1, f2, &params](int network) {
    const double phi = params.phi(network);
    const NetworkFields& f = network == 1 ? f1 : f2;
    const double sign = network == 1 ? 1.0 : -1.0;
    return [f, f1, f2, phi, sign, beta_mu](double x, double y, double t) {
      (void)t;
      const double dp = f1.p.eval(x, y, 0.0) - f2.p.eval(x, y, 0.0);
      return phi * f.div_v.eval(x, y, 0.0) + sign * beta_mu * dp;
    };
  };
  prob.forcing.g1 = mass_source(1);
  prob.forcing.g2 = mass_source(2);

  for (Side side : kAllSides) {
    const Eigen::Vector2d n = side_normal(side);
    for (int network : {1, 2}) {
      const NetworkFields& f = network == 1 ? f1 : f2;
      BoundaryCondition bc;
      bc.kind = BoundaryKind::NormalVelocity;
      // v . n restricted to the side; only the normal component survives.
      bc.value = n.x() != 0.0 ? (n.x() > 0 ? f.vx : -f.vx)
                              : (n.y() > 0 ? f.vy : -f.vy);
      prob.bcs.at(side, network) = bc;
    }
  }

  const int pv = pin_vertex_nearest_origin(mesh);
  prob.pin_value = m.p1.eval(mesh.vertices[pv].x(), mesh.vertices[pv].y(), 0.0);
  prob.pin_other_value =
      m.p2.eval(mesh.vertices[pv].x(), mesh.vertices[pv].y(), 0.0);
  return prob;
}

inline double fit_order(const std::vector<double>& h,
                        const std::vector<double>& err) {
  // Least-squares slope of log(err) against log(1/h).
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = -std::log(h[i]);
    const double y = -std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Error of one solved state against the manufactured fields, per field.
inline MmsLevelResult mms_errors(const TriangleMesh& mesh,
                                 const MixedDofMap& dm,
                                 const ManufacturedSolution& m,
                                 const Eigen::VectorXd& coeffs,
                                 int quadrature_degree = 8) {
  detail::ShapeTables tables(quadrature_degree);
  const int nq = tables.rule.size();
  double e2[6] = {0, 0, 0, 0, 0, 0};
  const Expression* exact[6] = {&m.v1x, &m.v1y, &m.v2x, &m.v2y, &m.p1, &m.p2};

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    AffineMap map = affine_map(mesh, t);
    const auto& p3 = dm.element_p3[t];
    const auto& tri = mesh.triangles[t];
    for (int q = 0; q < nq; ++q) {
      const double w = tables.rule.weights[q] * map.det;
      const Eigen::Vector2d x = map_to_physical(mesh, t, tables.rule.points[q]);
      for (int f = 0; f < 4; ++f) {
        double vh = 0.0;
        for (int a = 0; a < 10; ++a) {
          vh += coeffs[dm.offsets[f] + p3[a]] * tables.p3_values[q][a];
        }
        const double d = vh - exact[f]->eval(x.x(), x.y(), 0.0);
        e2[f] += w * d * d;
      }
      for (int f = 4; f < 6; ++f) {
        double ph = 0.0;
        for (int mnode = 0; mnode < 3; ++mnode) {
          ph += coeffs[dm.offsets[f] + tri[mnode]] * tables.p1_values[q][mnode];
        }
        const double d = ph - exact[f]->eval(x.x(), x.y(), 0.0);
        e2[f] += w * d * d;
      }
    }
  }
  MmsLevelResult r;
  r.err_v1 = std::sqrt(e2[0] + e2[1]);
  r.err_v2 = std::sqrt(e2[2] + e2[3]);
  r.err_p1 = std::sqrt(e2[4]);
  r.err_p2 = std::sqrt(e2[5]);
  return r;
}

/// Solves the steady problem derived from the manufactured fields on one mesh
/// and returns the solution coefficients.
inline Eigen::VectorXd mms_solve(const TriangleMesh& mesh,
                                 const MixedDofMap& dm,
                                 const MediumParameters& params,
                                 const ManufacturedSolution& m,
                                 int quadrature_degree = 8) {
  detail::MmsProblem prob = detail::build_mms_problem(params, m, mesh);
  PinConfig pin;
  pin.value = prob.pin_value;
  pin.other_value = prob.pin_other_value;
  TransientSolver solver(mesh, dm, params, prob.bcs, quadrature_degree, pin);
  return solver.solve_steady(prob.forcing, 0.0);
}

/// Refinement study over the given mesh resolutions (at least 3).
inline ConvergenceReport mms_study(const MediumParameters& params,
                                   const ManufacturedSolution& m,
                                   const std::vector<int>& resolutions,
                                   int quadrature_degree = 8) {
  if (resolutions.size() < 3) {
    throw Error("a convergence study needs at least 3 refinement levels");
  }
  ConvergenceReport report;
  std::vector<double> hs, ev1, ev2, ep1, ep2;
  for (int n : resolutions) {
    TriangleMesh mesh = generate_unit_square_mesh(n, n);
    MixedDofMap dm = build_mixed_dof_map(mesh);
    Eigen::VectorXd x = mms_solve(mesh, dm, params, m, quadrature_degree);
    MmsLevelResult r = mms_errors(mesh, dm, m, x, quadrature_degree);
    r.resolution = n;
    r.h = 1.0 / n;
    report.levels.push_back(r);
    hs.push_back(r.h);
    ev1.push_back(r.err_v1);
    ev2.push_back(r.err_v2);
    ep1.push_back(r.err_p1);
    ep2.push_back(r.err_p2);
  }
  report.order_v1 = detail::fit_order(hs, ev1);
  report.order_v2 = detail::fit_order(hs, ev2);
  report.order_p1 = detail::fit_order(hs, ep1);
  report.order_p2 = detail::fit_order(hs, ep2);
  return report;
}

}  // namespace dpp
