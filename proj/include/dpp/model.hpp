#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dpp/expr.hpp"

namespace dpp {

/// Physical constants of a dual-pore-network medium. The drag tensors store
/// the viscosity-scaled inverse permeabilities (mu K^-1), which is the
/// quantity tabulated in practice; permeability itself is never inverted here.
struct MediumParameters {
  double gamma = 1.0;  ///< true fluid density
  double mu = 1.0;     ///< dynamic viscosity
  double beta = 0.0;   ///< inter-network mass-transfer parameter, >= 0
  double phi1 = 0.5;   ///< macro-network volume fraction
  double phi2 = 0.25;  ///< micro-network volume fraction
  Eigen::Matrix2d drag1 = Eigen::Matrix2d::Identity();  ///< mu K1^-1
  Eigen::Matrix2d drag2 = Eigen::Matrix2d::Identity();  ///< mu K2^-1

  double rho1() const { return gamma * phi1; }
  double rho2() const { return gamma * phi2; }
  double rho(int network) const { return network == 1 ? rho1() : rho2(); }
  double phi(int network) const { return network == 1 ? phi1 : phi2; }
  const Eigen::Matrix2d& drag(int network) const {
    return network == 1 ? drag1 : drag2;
  }
};

/// Specific body force, shared by both networks, as expressions in (x, y, t).
struct BodyForceSpec {
  Expression bx;
  Expression by;
};

/// Initial Darcy (discharge) velocities u = phi * v per network, as
/// expressions in (x, y).
struct InitialConditionSpec {
  Expression u1x;
  Expression u1y;
  Expression u2x;
  Expression u2y;
};

enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };
inline constexpr std::array<Side, 4> kAllSides = {Side::Left, Side::Right,
                                                  Side::Bottom, Side::Top};

inline const char* to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

inline Side side_from_string(const std::string& name) {
  for (Side s : kAllSides) {
    if (name == to_string(s)) return s;
  }
  throw Error("unknown boundary side tag '" + name + "'");
}

/// Outward unit normal of the given side of the unit square.
inline Eigen::Vector2d side_normal(Side s) {
  switch (s) {
    case Side::Left: return {-1.0, 0.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Bottom: return {0.0, -1.0};
    case Side::Top: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

enum class BoundaryKind { NormalVelocity, Pressure };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::NormalVelocity;
  Expression value;  ///< v . n on the side, or the pressure value, in (x, y, t)
};

/// One condition per side per network; the per-network side assignments are
/// complementary partitions of the boundary by construction of the type.
struct BoundaryConditionSpec {
  std::array<std::array<BoundaryCondition, 2>, 4> conditions{};

  BoundaryCondition& at(Side s, int network) {
    return conditions[static_cast<int>(s)][network - 1];
  }
  const BoundaryCondition& at(Side s, int network) const {
    return conditions[static_cast<int>(s)][network - 1];
  }

  /// No-flow conditions for both networks on every side.
  static BoundaryConditionSpec no_flow() {
    BoundaryConditionSpec spec;
    for (auto& per_side : spec.conditions) {
      for (auto& bc : per_side) {
        bc.kind = BoundaryKind::NormalVelocity;
        bc.value = Expression::number(0.0);
      }
    }
    return spec;
  }

  bool has_pressure_condition(int network) const {
    for (Side s : kAllSides) {
      if (at(s, network).kind == BoundaryKind::Pressure) return true;
    }
    return false;
  }
};

/// Checks every MediumParameters invariant and names each violation.
/// Returns an empty list iff the parameters are admissible; never throws.
inline std::vector<std::string> validate_parameters(const MediumParameters& p) {
  std::vector<std::string> violations;
  auto check = [&](bool ok, const char* what) {
    if (!ok) violations.emplace_back(what);
  };

  bool finite = std::isfinite(p.gamma) && std::isfinite(p.mu) &&
                std::isfinite(p.beta) && std::isfinite(p.phi1) &&
                std::isfinite(p.phi2) && p.drag1.allFinite() &&
                p.drag2.allFinite();
  check(finite, "all parameters must be finite");
  if (!finite) return violations;

  check(p.gamma > 0.0, "gamma must be positive");
  check(p.mu > 0.0, "mu must be positive");
  check(p.beta >= 0.0, "beta must be non-negative");
  check(p.phi1 > 0.0 && p.phi1 < 1.0, "phi1 must lie in (0, 1)");
  check(p.phi2 > 0.0 && p.phi2 < 1.0, "phi2 must lie in (0, 1)");
  check(p.phi1 + p.phi2 < 1.0, "phi1 + phi2 must be less than 1");
  check(p.rho1() > 0.0, "bulk density rho1 must be positive");
  check(p.rho2() > 0.0, "bulk density rho2 must be positive");

  auto check_tensor = [&](const Eigen::Matrix2d& d, const char* name) {
    double scale = d.cwiseAbs().maxCoeff();
    if (std::abs(d(0, 1) - d(1, 0)) > 1e-12 * std::max(1.0, scale)) {
      violations.push_back(std::string(name) + " must be symmetric");
    }
    // Symmetric 2x2 is positive definite iff d00 > 0 and det > 0.
    if (!(d(0, 0) > 0.0 && d.determinant() > 0.0)) {
      violations.push_back(std::string(name) + " must be positive definite");
    }
  };
  check_tensor(p.drag1, "drag1");
  check_tensor(p.drag2, "drag2");
  return violations;
}

/// Body force at a point and time, identical in both networks.
inline Eigen::Vector2d eval_body_force(const BodyForceSpec& spec, double x,
                                       double y, double t) {
  return {spec.bx.eval(x, y, t), spec.by.eval(x, y, t)};
}

/// True (seepage) initial velocity v0 = u0 / phi for the requested network.
inline Eigen::Vector2d eval_initial_true_velocity(
    const InitialConditionSpec& spec, const MediumParameters& params,
    int network, double x, double y) {
  EvalVars vars{x, y, std::nullopt};
  Eigen::Vector2d u = network == 1
                          ? Eigen::Vector2d{spec.u1x.eval(vars), spec.u1y.eval(vars)}
                          : Eigen::Vector2d{spec.u2x.eval(vars), spec.u2y.eval(vars)};
  return u / params.phi(network);
}

/// Rate of volumetric transfer from the micro- to the macro-pore network,
/// -(beta/mu)(p1 - p2).
inline double transfer_rate(const MediumParameters& params, double p1,
                            double p2) {
  return -(params.beta / params.mu) * (p1 - p2);
}

/// Momentum drag term mu phi^2 K^-1 v = phi^2 * drag * v for one network.
inline Eigen::Vector2d drag_apply(const MediumParameters& params, int network,
                                  const Eigen::Vector2d& v) {
  double phi = params.phi(network);
  return phi * phi * (params.drag(network) * v);
}

}  // namespace dpp
