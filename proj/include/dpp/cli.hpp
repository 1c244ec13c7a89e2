#pragma once

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dpp/runner.hpp"

namespace dpp {

/// Command-line entry point. Exit codes: 0 on success (for `run` and
/// `verify-bound` this includes a passing bound check, for `mms` passing
/// thresholds), 1 when the growth bound is violated or convergence thresholds
/// fail, 2 on usage, configuration or I/O errors. Diagnostics go to stderr.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"dpp2d: transient dual-pore-network porous-media flow simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path, mesh_out;
  double fmax_arg = 0.0, intercept_arg = 0.0;
  int levels = 4, nx = 0, ny = 0;

  CLI::App* run = app.add_subcommand(
      "run", "Run a configured simulation and check its growth bound");
  run->add_option("--config", config_path, "configuration file (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");

  CLI::App* verify = app.add_subcommand(
      "verify-bound", "Re-check a norm CSV against a linear growth bound");
  verify->add_option("--csv", csv_path, "norms.csv written by `run`")->required();
  verify->add_option("--fmax", fmax_arg, "bound slope")->required();
  verify->add_option("--intercept", intercept_arg, "bound intercept")->required();

  CLI::App* mms = app.add_subcommand(
      "mms", "Manufactured-solution convergence study");
  mms->add_option("--levels", levels, "refinement levels (meshes 4,8,16,...)")
      ->check(CLI::Range(3, 7));
  mms->add_option("--out", out_dir, "output directory for error tables");

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Export a unit-square mesh");
  mesh_cmd->add_option("--nx", nx, "cells along x")
      ->required()
      ->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--ny", ny, "cells along y")
      ->required()
      ->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--out", mesh_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      RunConfig cfg = read_config(read_text_file(config_path));
      RunOutcome outcome = execute_run(cfg, out_dir);
      std::fprintf(stderr,
                   "run complete: %d steps, %zu records, f_max=%s, c=%s\n",
                   outcome.steps, outcome.series.size(),
                   format_sig9(outcome.report.f_max).c_str(),
                   format_sig9(outcome.report.intercept).c_str());
      if (!outcome.report.pass) {
        std::fprintf(stderr, "growth bound violated at step %d (margin %s)\n",
                     outcome.report.first_violation_step,
                     format_sig9(outcome.report.min_margin).c_str());
        return 1;
      }
      std::fprintf(stderr, "growth bound satisfied (min margin %s)\n",
                   format_sig9(outcome.report.min_margin).c_str());
      return 0;
    }

    if (verify->parsed()) {
      NormSeries series = read_norm_csv(read_text_file(csv_path));
      BoundReport report = check_growth_bound(series, fmax_arg, intercept_arg);
      if (!report.pass) {
        std::fprintf(stderr,
                     "growth bound violated: first violating step %d "
                     "(margin %s)\n",
                     report.first_violation_step,
                     format_sig9(report.min_margin).c_str());
        return 1;
      }
      std::fprintf(stderr, "growth bound satisfied over %zu records "
                   "(min margin %s)\n",
                   series.size(), format_sig9(report.min_margin).c_str());
      return 0;
    }

    if (mms->parsed()) {
      MmsOutcome outcome = execute_mms(levels, out_dir);
      std::fprintf(stderr,
                   "polynomial reproduction: %s\n"
                   "trigonometric orders: v=(%.2f, %.2f) p=(%.2f, %.2f), "
                   "decreasing=%s\n",
                   outcome.poly_pass ? "pass" : "FAIL", outcome.trig.order_v1,
                   outcome.trig.order_v2, outcome.trig.order_p1,
                   outcome.trig.order_p2,
                   outcome.trig_decreasing ? "yes" : "NO");
      return outcome.pass() ? 0 : 1;
    }

    if (mesh_cmd->parsed()) {
      TriangleMesh mesh = generate_unit_square_mesh(nx, ny);
      write_text_file(mesh_out, export_mesh(mesh));
      std::fprintf(stderr, "wrote %d vertices, %d triangles to %s\n",
                   mesh.vertex_count(), mesh.triangle_count(),
                   mesh_out.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace dpp
