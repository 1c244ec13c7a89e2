#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dpp/config.hpp"
#include "dpp/diagnostics.hpp"
#include "dpp/mms.hpp"
#include "dpp/report_io.hpp"
#include "dpp/solver.hpp"
#include "dpp/svg.hpp"
#include "dpp/vtk.hpp"

namespace dpp {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

struct RunOutcome {
  NormSeries series;
  BoundReport report;
  TransientState final_state;
  int steps = 0;
  std::filesystem::path out_dir;
};

/// Runs a configured simulation end to end and emits the norm CSV, the bound
/// report, the SVG plot and periodic VTK snapshots into the output directory.
inline RunOutcome execute_run(const RunConfig& cfg,
                              const std::string& out_override = "") {
  const TriangleMesh mesh = generate_unit_square_mesh(cfg.mesh.nx, cfg.mesh.ny);
  const MixedDofMap dm = build_mixed_dof_map(mesh);
  const int degree = cfg.diagnostics.quadrature_degree;
  const BodyForceSpec body = cfg.body_force_spec();
  const BoundaryConditionSpec bcs = cfg.boundary_spec();

  TransientSolver solver(mesh, dm, cfg.params, bcs, degree);
  const Forcing forcing = Forcing::from_body_force(body);
  const TransientState initial = solver.initialize(cfg.initial_spec());

  RunOutcome outcome;
  outcome.out_dir = out_override.empty() ? cfg.output.directory : out_override;
  std::filesystem::create_directories(outcome.out_dir);

  NormRecorder recorder(mesh, dm, cfg.params, degree,
                        cfg.diagnostics.record_every);
  const int vtk_every = cfg.output.vtk_every;
  StepObserver observer = [&](int step, const TransientState& state,
                              bool is_last) {
    recorder(step, state, is_last);
    if (vtk_every > 0 && (step % vtk_every == 0 || is_last)) {
      char name[32];
      std::snprintf(name, sizeof name, "fields_%06d.vtk", step);
      write_text_file(outcome.out_dir / name,
                      write_vtk(mesh, dm, state, cfg.params));
    }
  };

  SolverConfig run_cfg;
  run_cfg.dt = cfg.time.dt;
  run_cfg.t_end = cfg.time.t_end;
  run_cfg.quadrature_degree = degree;
  TransientSolver::RunResult result =
      solver.run(run_cfg, forcing, initial, observer);
  outcome.final_state = result.final_state;
  outcome.steps = result.steps;
  outcome.series = recorder.series();

  const double f_max =
      compute_f_max(mesh, cfg.params, body, cfg.body_force.amplitude_bounds,
                    cfg.time.t_end, cfg.fmax_mode(), 2001, degree);
  const double intercept = outcome.series.front().norm_v;
  outcome.report = check_growth_bound(outcome.series, f_max, intercept);
  outcome.report.mode = cfg.fmax_mode();

  write_text_file(outcome.out_dir / "norms.csv",
                  write_norm_csv(outcome.series, outcome.report));
  write_text_file(outcome.out_dir / "report.json",
                  write_bound_report_json(outcome.report,
                                          static_cast<int>(outcome.series.size())));
  write_text_file(outcome.out_dir / "norm_plot.svg",
                  write_svg_plot(outcome.series, outcome.report));
  return outcome;
}

struct MmsOutcome {
  MmsLevelResult poly_coarse;
  MmsLevelResult poly_fine;
  ConvergenceReport trig;
  bool poly_pass = false;
  bool trig_decreasing = false;
  bool orders_pass = false;

  bool pass() const { return poly_pass && trig_decreasing && orders_pass; }
};

/// Convergence verification: a cubic-velocity / linear-pressure field must be
/// reproduced to solver precision, and a trigonometric field must converge
/// with velocity order >= 2 and pressure order >= 1.5 under refinement.
inline MmsOutcome execute_mms(int levels, const std::string& out_dir = "",
                              int quadrature_degree = 8) {
  if (levels < 3) throw Error("need at least 3 refinement levels");

  MediumParameters params;  // the standard anisotropic test medium
  params.gamma = 1.0;
  params.mu = 1.0;
  params.beta = 0.5;
  params.phi1 = 0.2;
  params.phi2 = 0.05;
  params.drag1 << 1.0, 0.1, 0.1, 0.9;
  params.drag2 << 100.0, 5.0, 5.0, 100.0;

  MmsOutcome outcome;
  const ManufacturedSolution poly = ManufacturedSolution::polynomial();
  for (int i = 0; i < 2; ++i) {
    const int n = i == 0 ? 4 : 8;
    TriangleMesh mesh = generate_unit_square_mesh(n, n);
    MixedDofMap dm = build_mixed_dof_map(mesh);
    Eigen::VectorXd x = mms_solve(mesh, dm, params, poly, quadrature_degree);
    MmsLevelResult r = mms_errors(mesh, dm, poly, x, quadrature_degree);
    r.resolution = n;
    r.h = 1.0 / n;
    (i == 0 ? outcome.poly_coarse : outcome.poly_fine) = r;
  }
  auto poly_ok = [](const MmsLevelResult& r) {
    return r.err_v1 <= 1e-10 && r.err_v2 <= 1e-10 && r.err_p1 <= 1e-10 &&
           r.err_p2 <= 1e-10;
  };
  outcome.poly_pass = poly_ok(outcome.poly_coarse) && poly_ok(outcome.poly_fine);

  std::vector<int> resolutions;
  for (int i = 0, n = 4; i < levels; ++i, n *= 2) resolutions.push_back(n);
  outcome.trig = mms_study(params, ManufacturedSolution::trigonometric(),
                           resolutions, quadrature_degree);

  outcome.trig_decreasing = true;
  for (std::size_t i = 1; i < outcome.trig.levels.size(); ++i) {
    const auto& prev = outcome.trig.levels[i - 1];
    const auto& cur = outcome.trig.levels[i];
    if (!(cur.err_v1 < prev.err_v1 && cur.err_v2 < prev.err_v2 &&
          cur.err_p1 < prev.err_p1 && cur.err_p2 < prev.err_p2)) {
      outcome.trig_decreasing = false;
    }
  }
  outcome.orders_pass = outcome.trig.velocity_order() >= 2.0 &&
                        outcome.trig.pressure_order() >= 1.5;

  if (!out_dir.empty()) {
    std::string csv = "resolution,h,err_v1,err_v2,err_p1,err_p2\n";
    auto row = [&](const MmsLevelResult& r) {
      csv += std::to_string(r.resolution) + "," + format_sig9(r.h) + "," +
             format_sig9(r.err_v1) + "," + format_sig9(r.err_v2) + "," +
             format_sig9(r.err_p1) + "," + format_sig9(r.err_p2) + "\n";
    };
    for (const auto& r : outcome.trig.levels) row(r);
    write_text_file(std::filesystem::path(out_dir) / "mms_errors.csv", csv);

    nlohmann::json j;
    j["polynomial"] = {{"max_error",
                        std::max({outcome.poly_coarse.err_v1,
                                  outcome.poly_coarse.err_v2,
                                  outcome.poly_coarse.err_p1,
                                  outcome.poly_coarse.err_p2,
                                  outcome.poly_fine.err_v1,
                                  outcome.poly_fine.err_v2,
                                  outcome.poly_fine.err_p1,
                                  outcome.poly_fine.err_p2})},
                       {"pass", outcome.poly_pass}};
    j["trigonometric"] = {{"order_v1", outcome.trig.order_v1},
                          {"order_v2", outcome.trig.order_v2},
                          {"order_p1", outcome.trig.order_p1},
                          {"order_p2", outcome.trig.order_p2},
                          {"errors_strictly_decreasing", outcome.trig_decreasing},
                          {"orders_pass", outcome.orders_pass}};
    j["pass"] = outcome.pass();
    write_text_file(std::filesystem::path(out_dir) / "mms_report.json",
                    j.dump(2) + "\n");
  }
  return outcome;
}

}  // namespace dpp
