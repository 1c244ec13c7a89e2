#pragma once

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <vector>

#include "dpp/assembly.hpp"
#include "dpp/dofmap.hpp"
#include "dpp/mesh.hpp"
#include "dpp/model.hpp"

namespace dpp {

/// Solution coefficients at one time level, ordered (v1x, v1y, v2x, v2y,
/// p1, p2) per the MixedDofMap. Constrained DOFs hold their prescribed
/// values at the state's time.
struct TransientState {
  double time = 0.0;
  Eigen::VectorXd coeffs;
};

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 2.0;
  int quadrature_degree = 8;
};

/// Called after initialization (step 0) and after every completed step.
using StepObserver =
    std::function<void(int step, const TransientState& state, bool is_last)>;

/// Owns the assembled operators of one problem setup and advances it in time
/// with backward Euler. The system matrix (M/dt + A) is factorized once and
/// reused for every step taken with the same dt; only a clipped final step
/// triggers a second factorization.
///
/// The pressures carry no mass term, so the problem is a semi-explicit DAE:
/// pressure history never enters the time stepping, and initial pressures
/// are completed algebraically from the mass balance.
class TransientSolver {
 public:
  TransientSolver(const TriangleMesh& mesh, const MixedDofMap& dm,
                  const MediumParameters& params,
                  const BoundaryConditionSpec& bcs, int quadrature_degree = 8,
                  const PinConfig& pin = {})
      : mesh_(mesh),
        dm_(dm),
        params_(params),
        degree_(quadrature_degree),
        pin_(pin) {
    if (quadrature_degree < 6) {
      std::fprintf(stderr,
                   "note: quadrature degree %d under-integrates the cubic "
                   "mass and drag terms (degree 6 integrands)\n",
                   quadrature_degree);
    }
    auto violations = validate_parameters(params);
    if (!violations.empty()) {
      std::string msg = "invalid medium parameters:";
      for (const auto& v : violations) msg += " " + v + ";";
      throw Error(msg);
    }
    system_ = assemble_time_invariant(mesh, dm, params, bcs, degree_, pin);
    pin_vertex_ =
        pin.vertex >= 0 ? pin.vertex : pin_vertex_nearest_origin(mesh);
    has_pressure_bc_ =
        bcs.has_pressure_condition(1) || bcs.has_pressure_condition(2);
  }

  const SystemMatrices& matrices() const { return system_; }
  const TriangleMesh& mesh() const { return mesh_; }
  const MixedDofMap& dofmap() const { return dm_; }
  const MediumParameters& params() const { return params_; }
  int quadrature_degree() const { return degree_; }

  /// State at t = 0: velocities by nodal interpolation of v0 = u0/phi with
  /// essential values enforced, pressures completed from the discrete mass
  /// balance. The balance rows determine only the pressure difference
  /// (as a least-squares fit of the two network rows); the undetermined
  /// common level is a constant fixed by the pin.
  TransientState initialize(const InitialConditionSpec& ics,
                            const Forcing& forcing = {}) const {
    TransientState state;
    state.time = 0.0;
    state.coeffs = Eigen::VectorXd::Zero(dm_.total);

    for (int network : {1, 2}) {
      auto [fx, fy] = velocity_fields(network);
      Eigen::VectorXd vx = interpolate_field(
          mesh_, dm_, fx, [&](double x, double y) {
            return eval_initial_true_velocity(ics, params_, network, x, y).x();
          });
      Eigen::VectorXd vy = interpolate_field(
          mesh_, dm_, fy, [&](double x, double y) {
            return eval_initial_true_velocity(ics, params_, network, x, y).y();
          });
      state.coeffs.segment(dm_.offset(fx), dm_.field_size(fx)) = vx;
      state.coeffs.segment(dm_.offset(fy), dm_.field_size(fy)) = vy;
    }
    for (const auto& con : system_.constraints) {
      if (con.dof < dm_.offset(Field::P1)) {
        state.coeffs[con.dof] = con.value(0.0);
      }
    }

    if (params_.beta > 0.0) {
      // Pressure rows of A x with pressures zeroed give (C1 v1, C2 v2).
      Eigen::VectorXd div_rows = system_.stiffness * state.coeffs;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dm_.total);
      if (forcing.g1 || forcing.g2) {
        Forcing mass_only;
        mass_only.g1 = forcing.g1;
        mass_only.g2 = forcing.g2;
        g = assemble_rhs(mesh_, dm_, params_, mass_only, 0.0, degree_);
      }
      const int np = dm_.p1_scalar_count;
      Eigen::VectorXd r1 = g.segment(dm_.offset(Field::P1), np) -
                           div_rows.segment(dm_.offset(Field::P1), np);
      Eigen::VectorXd r2 = g.segment(dm_.offset(Field::P2), np) -
                           div_rows.segment(dm_.offset(Field::P2), np);
      SparseMat mp = assemble_p1_mass(mesh_);
      Eigen::SimplicialLDLT<SparseMat> ldlt(mp);
      if (ldlt.info() != Eigen::Success) {
        throw SingularSystemError("pressure mass matrix factorization failed");
      }
      Eigen::VectorXd d =
          ldlt.solve((params_.mu / params_.beta) * 0.5 * (r1 - r2));

      double shift = 0.0;
      if (!has_pressure_bc_) {
        shift = pin_.network == 1 ? pin_.value - d[pin_vertex_] : pin_.value;
      }
      state.coeffs.segment(dm_.offset(Field::P1), np) =
          d.array() + shift;
      state.coeffs.segment(dm_.offset(Field::P2), np).setConstant(shift);
    }

    for (const auto& con : system_.constraints) {
      if (con.dof >= dm_.offset(Field::P1)) {
        state.coeffs[con.dof] = con.value(0.0);
      }
    }
    return state;
  }

  /// One backward Euler step: solves (M/dt + A) x = (M/dt) x_n + F(t_next)
  /// with constraints applied at t_next.
  TransientState step(const TransientState& state, const Forcing& forcing,
                      double dt, double t_next = -1.0) const {
    if (!(dt > 0.0)) throw Error("time step must be positive");
    if (t_next < 0.0) t_next = state.time + dt;
    prepare_transient(dt);

    Eigen::VectorXd rhs = system_.mass * (state.coeffs / dt) +
                          assemble_rhs(mesh_, dm_, params_, forcing, t_next,
                                       degree_);
    transient_op_->apply_to_rhs(rhs, t_next);
    TransientState next;
    next.time = t_next;
    next.coeffs = transient_lu_->solve(rhs);
    return next;
  }

  struct RunResult {
    TransientState final_state;
    int steps = 0;
  };

  /// Advances from the given initial state to t_end with fixed dt; a shorter
  /// final step lands exactly on t_end. The observer fires for step 0 and
  /// after every step. Deterministic for identical inputs.
  RunResult run(const SolverConfig& config, const Forcing& forcing,
                const TransientState& initial,
                const StepObserver& observer = {}) const {
    if (!(config.dt > 0.0) || config.t_end < config.dt) {
      throw Error("need dt > 0 and t_end >= dt");
    }
    const double dt = config.dt;
    const double t_end = config.t_end;
    const double tol = 1e-9 * std::max(dt, t_end);
    std::vector<double> times;
    const int n_full = static_cast<int>(std::floor((t_end + tol) / dt));
    times.reserve(n_full + 1);
    for (int n = 1; n <= n_full; ++n) times.push_back(n * dt);
    if (!times.empty() && std::abs(times.back() - t_end) <= tol) {
      times.back() = t_end;
    } else {
      times.push_back(t_end);
    }

    TransientState state = initial;
    if (observer) observer(0, state, times.empty());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double prev = i == 0 ? 0.0 : times[i - 1];
      double step_dt = times[i] - prev;
      // Regular steps reuse the dt factorization exactly; only a genuinely
      // clipped final step gets its own dt.
      if (std::abs(step_dt - dt) <= tol) step_dt = dt;
      try {
        state = step(state, forcing, step_dt, times[i]);
      } catch (const Error& err) {
        throw Error("time step " + std::to_string(i + 1) + " failed: " +
                    err.what());
      }
      if (observer) observer(static_cast<int>(i) + 1, state, i + 1 == times.size());
    }
    return {state, static_cast<int>(times.size())};
  }

  /// Solves the steady problem A x = F(t) with constraints at time t
  /// (used by manufactured-solution studies).
  Eigen::VectorXd solve_steady(const Forcing& forcing, double t = 0.0) const {
    if (!steady_op_) {
      steady_op_.emplace(system_.stiffness, system_.constraints);
      steady_lu_.emplace(steady_op_->matrix());
    }
    Eigen::VectorXd rhs =
        assemble_rhs(mesh_, dm_, params_, forcing, t, degree_);
    steady_op_->apply_to_rhs(rhs, t);
    return steady_lu_->solve(rhs);
  }

 private:
  void prepare_transient(double dt) const {
    if (transient_lu_ && dt == transient_dt_) return;
    SparseMat op = system_.stiffness + system_.mass / dt;
    transient_op_.emplace(op, system_.constraints);
    transient_lu_.emplace(transient_op_->matrix());
    transient_dt_ = dt;
  }

  const TriangleMesh& mesh_;
  const MixedDofMap& dm_;
  MediumParameters params_;
  int degree_;
  PinConfig pin_;
  int pin_vertex_ = 0;
  bool has_pressure_bc_ = false;
  SystemMatrices system_;

  mutable double transient_dt_ = -1.0;
  mutable std::optional<ConstrainedOperator> transient_op_;
  mutable std::optional<SparseFactorization> transient_lu_;
  mutable std::optional<ConstrainedOperator> steady_op_;
  mutable std::optional<SparseFactorization> steady_lu_;
};

}  // namespace dpp
