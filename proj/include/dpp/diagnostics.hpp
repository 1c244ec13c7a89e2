#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpp/dofmap.hpp"
#include "dpp/mesh.hpp"
#include "dpp/model.hpp"
#include "dpp/solver.hpp"

namespace dpp {

/// All quadrature integrals of one state, gathered in a single element sweep:
///   v_norm_sq     = integral of rho1 |v1|^2 + rho2 |v2|^2
///   l2_norm_sq    = integral of |v1|^2 + |v2|^2
///   dissipation   = integral of mu phi^2 v.K^-1 v (both networks)
///                   + (beta/mu)(p1 - p2)^2
///   p_diff        = integral of (p1 - p2)
struct StateIntegrals {
  double v_norm_sq = 0.0;
  double l2_norm_sq = 0.0;
  double dissipation = 0.0;
  double p_diff = 0.0;
};

inline StateIntegrals compute_state_integrals(const TriangleMesh& mesh,
                                              const MixedDofMap& dm,
                                              const MediumParameters& params,
                                              const Eigen::VectorXd& coeffs,
                                              int quadrature_degree = 8) {
  detail::ShapeTables tables(quadrature_degree);
  const int nq = tables.rule.size();
  const double rho[2] = {params.rho1(), params.rho2()};
  const double phi2[2] = {params.phi1 * params.phi1, params.phi2 * params.phi2};
  const double beta_mu = params.beta / params.mu;

  StateIntegrals out;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    AffineMap map = affine_map(mesh, t);
    const auto& p3 = dm.element_p3[t];
    const auto& tri = mesh.triangles[t];

    double c[4][10];
    for (int f = 0; f < 4; ++f) {
      const int off = dm.offsets[f];
      for (int a = 0; a < 10; ++a) c[f][a] = coeffs[off + p3[a]];
    }
    double cp[2][3];
    for (int f = 0; f < 2; ++f) {
      const int off = dm.offsets[4 + f];
      for (int m = 0; m < 3; ++m) cp[f][m] = coeffs[off + tri[m]];
    }

    double acc_v = 0.0, acc_l2 = 0.0, acc_d = 0.0, acc_pd = 0.0;
    for (int q = 0; q < nq; ++q) {
      const double w = tables.rule.weights[q];
      const auto& n = tables.p3_values[q];
      Eigen::Vector2d v[2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (int a = 0; a < 10; ++a) {
        v[0].x() += c[0][a] * n[a];
        v[0].y() += c[1][a] * n[a];
        v[1].x() += c[2][a] * n[a];
        v[1].y() += c[3][a] * n[a];
      }
      double p[2] = {0.0, 0.0};
      for (int m = 0; m < 3; ++m) {
        p[0] += cp[0][m] * tables.p1_values[q][m];
        p[1] += cp[1][m] * tables.p1_values[q][m];
      }
      for (int k = 0; k < 2; ++k) {
        const double vv = v[k].squaredNorm();
        acc_v += w * rho[k] * vv;
        acc_l2 += w * vv;
        acc_d += w * phi2[k] * v[k].dot(params.drag(k + 1) * v[k]);
      }
      const double dp = p[0] - p[1];
      acc_d += w * beta_mu * dp * dp;
      acc_pd += w * dp;
    }
    out.v_norm_sq += map.det * acc_v;
    out.l2_norm_sq += map.det * acc_l2;
    out.dissipation += map.det * acc_d;
    out.p_diff += map.det * acc_pd;
  }
  return out;
}

/// Density-weighted velocity norm sqrt(int rho1 |v1|^2 + rho2 |v2|^2).
inline double v_norm(const TriangleMesh& mesh, const MixedDofMap& dm,
                     const MediumParameters& params, const TransientState& state,
                     int quadrature_degree = 8) {
  return std::sqrt(
      compute_state_integrals(mesh, dm, params, state.coeffs, quadrature_degree)
          .v_norm_sq);
}

/// Unweighted stacked-velocity norm.
inline double l2_norm(const TriangleMesh& mesh, const MixedDofMap& dm,
                      const TransientState& state, int quadrature_degree = 8) {
  MediumParameters unit;  // weights cancel; only field evaluation matters
  return std::sqrt(compute_state_integrals(mesh, dm, unit, state.coeffs,
                                           quadrature_degree)
                       .l2_norm_sq);
}

/// Nonnegative dissipation rate D, the negative of the decay rate of the
/// kinetic functional along solutions.
inline double dissipation_rate(const TriangleMesh& mesh, const MixedDofMap& dm,
                               const MediumParameters& params,
                               const TransientState& state,
                               int quadrature_degree = 8) {
  return compute_state_integrals(mesh, dm, params, state.coeffs,
                                 quadrature_degree)
      .dissipation;
}

inline double pressure_difference_integral(const TriangleMesh& mesh,
                                           const MixedDofMap& dm,
                                           const TransientState& state,
                                           int quadrature_degree = 8) {
  MediumParameters unit;
  return compute_state_integrals(mesh, dm, unit, state.coeffs,
                                 quadrature_degree)
      .p_diff;
}

/// Net volumetric transfer from the micro- to the macro-pore network,
/// -(beta/mu) * integral of (p1 - p2).
inline double transfer_integral(const TriangleMesh& mesh, const MixedDofMap& dm,
                                const MediumParameters& params,
                                const TransientState& state,
                                int quadrature_degree = 8) {
  return -(params.beta / params.mu) *
         pressure_difference_integral(mesh, dm, state, quadrature_degree);
}

/// Pointwise transfer rate -(beta/mu)(p1 - p2) at an arbitrary P1 node pair,
/// exposed for field export.
inline double transfer_rate_at(const MediumParameters& params, double p1,
                               double p2) {
  return transfer_rate(params, p1, p2);
}

/// Density-weighted norm of the stacked forcing at time t:
/// sqrt(int rho1 |b1|^2 + rho2 |b2|^2).
inline double f_norm_at(const TriangleMesh& mesh,
                        const MediumParameters& params, const Forcing& forcing,
                        double t, int quadrature_degree = 8) {
  auto term = [&](const std::function<Eigen::Vector2d(double, double, double)>& b,
                  double rho) {
    if (!b) return 0.0;
    return rho * integrate_scalar(
                     mesh,
                     [&](double x, double y) { return b(x, y, t).squaredNorm(); },
                     quadrature_degree);
  };
  return std::sqrt(term(forcing.b1, params.rho1()) +
                   term(forcing.b2, params.rho2()));
}

inline double f_norm_at(const TriangleMesh& mesh,
                        const MediumParameters& params,
                        const BodyForceSpec& spec, double t,
                        int quadrature_degree = 8) {
  return f_norm_at(mesh, params, Forcing::from_body_force(spec), t,
                   quadrature_degree);
}

enum class FMaxMode { AmplitudeBound, Sampled };

inline const char* to_string(FMaxMode m) {
  return m == FMaxMode::AmplitudeBound ? "amplitude-bound" : "sampled";
}

/// Bound on max_t of the forcing norm. The default amplitude-bound mode uses
/// user-declared per-component amplitude bounds (Bx, By) and evaluates
/// sqrt((rho1 + rho2) |Omega| (Bx^2 + By^2)) exactly; the sampled mode
/// maximizes f_norm_at over a uniform time sampling and is tighter.
inline double compute_f_max(
    const TriangleMesh& mesh, const MediumParameters& params,
    const BodyForceSpec& spec,
    const std::optional<std::array<double, 2>>& amplitude_bounds, double t_end,
    FMaxMode mode = FMaxMode::AmplitudeBound, int samples = 2001,
    int quadrature_degree = 8) {
  if (mode == FMaxMode::AmplitudeBound) {
    if (!amplitude_bounds) {
      throw Error(
          "amplitude-bound mode requires declared body-force amplitude bounds");
    }
    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      area += triangle_signed_area(mesh, t);
    }
    const auto& bb = *amplitude_bounds;
    return std::sqrt((params.rho1() + params.rho2()) * area *
                     (bb[0] * bb[0] + bb[1] * bb[1]));
  }
  if (samples < 2) throw Error("sampled f_max needs at least 2 samples");
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = t_end * k / (samples - 1);
    best = std::max(best, f_norm_at(mesh, params, spec, t, quadrature_degree));
  }
  return best;
}

/// One recorded step of a transient run.
struct NormRecord {
  int step = 0;
  double time = 0.0;
  double norm_v = 0.0;
  double norm_l2 = 0.0;
  double dissipation = 0.0;
  double p_diff = 0.0;
};

using NormSeries = std::vector<NormRecord>;

/// Verdict of the linear growth bound |Y(t)|_V <= t f_max + c over a series.
struct BoundReport {
  double f_max = 0.0;
  FMaxMode mode = FMaxMode::AmplitudeBound;
  double intercept = 0.0;
  double tolerance = 0.0;
  std::vector<double> margins;  ///< bound - norm, one per record
  bool pass = false;
  int first_violation_step = -1;  ///< step id of the first violation, or -1
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Margins are checked against exact zero by default; the analytic bound has
/// genuine slack, so no tolerance knob is needed to absorb discretization.
inline BoundReport check_growth_bound(const NormSeries& series, double f_max,
                                      double intercept,
                                      double tolerance = 0.0) {
  if (series.empty()) throw Error("cannot check a growth bound on an empty series");
  BoundReport report;
  report.f_max = f_max;
  report.intercept = intercept;
  report.tolerance = tolerance;
  report.pass = true;
  report.margins.reserve(series.size());
  for (const auto& rec : series) {
    const double bound = intercept + rec.time * f_max;
    const double margin = bound - rec.norm_v;
    report.margins.push_back(margin);
    report.min_margin = std::min(report.min_margin, margin);
    if (margin < -tolerance && report.pass) {
      report.pass = false;
      report.first_violation_step = rec.step;
    }
  }
  return report;
}

/// Step observer that appends StateIntegrals-based records every
/// `record_every` steps (step 0 and the final step always included).
class NormRecorder {
 public:
  NormRecorder(const TriangleMesh& mesh, const MixedDofMap& dm,
               const MediumParameters& params, int quadrature_degree = 8,
               int record_every = 1)
      : mesh_(mesh),
        dm_(dm),
        params_(params),
        degree_(quadrature_degree),
        every_(record_every < 1 ? 1 : record_every) {}

  void operator()(int step, const TransientState& state, bool is_last) {
    if (step % every_ != 0 && !is_last && step != 0) return;
    StateIntegrals s =
        compute_state_integrals(mesh_, dm_, params_, state.coeffs, degree_);
    series_.push_back({step, state.time, std::sqrt(s.v_norm_sq),
                       std::sqrt(s.l2_norm_sq), s.dissipation, s.p_diff});
  }

  const NormSeries& series() const { return series_; }

 private:
  const TriangleMesh& mesh_;
  const MixedDofMap& dm_;
  MediumParameters params_;
  int degree_;
  int every_;
  NormSeries series_;
};

}  // namespace dpp
