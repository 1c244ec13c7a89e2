#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpp/cli.hpp"
#include "dpp/config.hpp"
#include "dpp/report_io.hpp"
#include "dpp/runner.hpp"
#include "dpp/svg.hpp"
#include "dpp/vtk.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

fs::path config_dir() { return fs::path(DPP_CONFIG_DIR); }

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "dpp2d_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A desk-second configuration: tiny mesh, a handful of steps.
std::string small_config(const std::string& extra = "") {
  return std::string(R"json({
  "mesh": {"nx": 4, "ny": 4},
  "time": {"dt": 0.01, "t_end": 0.05},
  "params": {
    "gamma": 1.0, "mu": 1.0, "beta": 0.5, "phi1": 0.2, "phi2": 0.05,
    "drag1": [[1.0, 0.1], [0.1, 0.9]],
    "drag2": [[100.0, 5.0], [5.0, 100.0]]
  },
  "body_force": {"bx": "0", "by": "-10", "amplitude_bounds": [0.0, 10.0]},
  "initial": {
    "u1x": "sin(pi*x)*cos(pi*y)", "u1y": "-cos(pi*x)*sin(pi*y)",
    "u2x": "0", "u2y": "0"
  })json") +
         extra + "\n}\n";
}

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"dpp2d"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  return dpp::cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(ReadConfig, BundledCase1MatchesReferenceParameters) {
  dpp::RunConfig cfg =
      dpp::read_config(dpp::read_text_file(config_dir() / "case1.json"));
  EXPECT_EQ(cfg.mesh.nx, 20);
  EXPECT_EQ(cfg.mesh.ny, 20);
  EXPECT_DOUBLE_EQ(cfg.time.dt, 0.001);
  EXPECT_DOUBLE_EQ(cfg.time.t_end, 2.0);
  EXPECT_DOUBLE_EQ(cfg.params.gamma, 1.0);
  EXPECT_DOUBLE_EQ(cfg.params.beta, 0.5);
  EXPECT_DOUBLE_EQ(cfg.params.phi1, 0.2);
  EXPECT_DOUBLE_EQ(cfg.params.phi2, 0.05);
  EXPECT_DOUBLE_EQ(cfg.params.drag1(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(cfg.params.drag2(1, 1), 100.0);
  ASSERT_TRUE(cfg.body_force.amplitude_bounds.has_value());
  EXPECT_DOUBLE_EQ((*cfg.body_force.amplitude_bounds)[0], 10.0);
  EXPECT_EQ(cfg.body_force.bx, "10*sin(pi*x*t)");
  // Default boundary: no-flow velocity conditions everywhere.
  for (const auto& per_side : cfg.boundary) {
    for (const auto& entry : per_side) {
      EXPECT_EQ(entry.kind, "velocity");
      EXPECT_EQ(entry.value, "0");
    }
  }
}

TEST(ReadConfig, DocumentedDefaults) {
  dpp::RunConfig cfg = dpp::read_config(R"json({
    "params": {
      "gamma": 1.0, "mu": 1.0, "beta": 0.5, "phi1": 0.2, "phi2": 0.05,
      "drag1": [[1.0, 0.1], [0.1, 0.9]],
      "drag2": [[100.0, 5.0], [5.0, 100.0]]
    }
  })json");
  EXPECT_EQ(cfg.mesh.nx, 20);
  EXPECT_EQ(cfg.mesh.ny, 20);
  EXPECT_DOUBLE_EQ(cfg.time.dt, 0.001);
  EXPECT_DOUBLE_EQ(cfg.time.t_end, 2.0);
  EXPECT_EQ(cfg.diagnostics.record_every, 1);
  EXPECT_EQ(cfg.diagnostics.quadrature_degree, 8);
  EXPECT_EQ(cfg.diagnostics.fmax_mode, "amplitude-bound");
  EXPECT_EQ(cfg.output.vtk_every, 0);
  EXPECT_EQ(cfg.body_force.bx, "0");
  ASSERT_TRUE(cfg.body_force.amplitude_bounds.has_value());
  EXPECT_DOUBLE_EQ((*cfg.body_force.amplitude_bounds)[1], 0.0);
  EXPECT_EQ(cfg.initial.u1x, "0");
  for (const auto& per_side : cfg.boundary) {
    for (const auto& entry : per_side) EXPECT_EQ(entry.kind, "velocity");
  }
}

TEST(ReadConfig, UnknownKeyIsNamed) {
  try {
    dpp::read_config(R"({"params": {"viscocity": 1.0}})");
    FAIL() << "expected ConfigError";
  } catch (const dpp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("viscocity"), std::string::npos);
  }
}

TEST(ReadConfig, EmptyDocumentListsRequiredKeys) {
  try {
    dpp::read_config("{}");
    FAIL() << "expected ConfigError";
  } catch (const dpp::ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("params"), std::string::npos);
    EXPECT_NE(msg.find("params.gamma"), std::string::npos);
    EXPECT_NE(msg.find("params.drag2"), std::string::npos);
  }
}

TEST(ReadConfig, ValidationAndExpressionErrorsCarryKeyPaths) {
  EXPECT_THROW(dpp::read_config("not json"), dpp::ConfigError);
  try {
    dpp::read_config(small_config(R"(, "body_force2": 1)"));
    FAIL();
  } catch (const dpp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("body_force2"), std::string::npos);
  }
  try {
    dpp::read_config(
        R"({"params": {"gamma": 1, "mu": 1, "beta": -2, "phi1": 0.2,
            "phi2": 0.05, "drag1": [[1,0],[0,1]], "drag2": [[1,0],[0,1]]}})");
    FAIL();
  } catch (const dpp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  try {
    dpp::read_config(small_config(R"(, "boundary": {"left": {"network1":
        {"kind": "velocity", "value": "sin(x"}}})"));
    FAIL();
  } catch (const dpp::ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("boundary.left.network1.value"), std::string::npos);
    EXPECT_NE(msg.find("offset"), std::string::npos);
  }
}

TEST(ReadConfig, RoundTrip) {
  dpp::RunConfig cfg = dpp::read_config(small_config());
  dpp::RunConfig again = dpp::read_config(dpp::write_config(cfg));
  EXPECT_TRUE(cfg == again);

  dpp::RunConfig case1 =
      dpp::read_config(dpp::read_text_file(config_dir() / "case1.json"));
  EXPECT_TRUE(case1 == dpp::read_config(dpp::write_config(case1)));
}

TEST(NormCsv, HeaderAndRowShape) {
  dpp::NormSeries series = {{0, 0.0, 1.58113883, 3.53553391, 0.1, 1e-12},
                            {1, 0.001, 1.58, 3.53, 0.1, 1e-12},
                            {2, 0.002, 1.579, 3.52, 0.1, 1e-12},
                            {3, 0.003, 1.578, 3.51, 0.1, 1e-12}};
  dpp::BoundReport report = dpp::check_growth_bound(series, 5.0, 1.58113883);
  std::string csv = dpp::write_norm_csv(series, report);

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "step,time,norm_V,norm_L2,bound,margin,dissipation_rate,"
            "p_diff_integral");
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  EXPECT_EQ(rows, 4);  // 3 steps + the t = 0 record

  // Row 0: margin is exactly zero when the intercept is the t=0 norm.
  std::istringstream in2(csv);
  std::getline(in2, line);
  std::getline(in2, line);
  EXPECT_EQ(line, "0,0,1.58113883,3.53553391,1.58113883,0,0.1,1e-12");
}

TEST(NormCsv, ParseRoundTripAndErrors) {
  dpp::NormSeries series = {{0, 0.0, 1.0, 2.0, 0.5, 1e-9},
                            {1, 0.5, 1.2, 2.2, 0.4, 1e-9}};
  dpp::BoundReport report = dpp::check_growth_bound(series, 2.0, 1.0);
  dpp::NormSeries back = dpp::read_norm_csv(dpp::write_norm_csv(series, report));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].step, 0);
  EXPECT_DOUBLE_EQ(back[1].time, 0.5);
  EXPECT_DOUBLE_EQ(back[1].norm_v, 1.2);

  EXPECT_THROW(dpp::read_norm_csv("bogus header\n1,2\n"), dpp::Error);
  EXPECT_THROW(dpp::read_norm_csv(std::string(dpp::kNormCsvHeader) + "\n1,2\n"),
               dpp::Error);
  EXPECT_THROW(dpp::read_norm_csv(std::string(dpp::kNormCsvHeader) + "\n"),
               dpp::Error);
}

TEST(VtkWriter, SmallestMeshLayout) {
  dpp::TriangleMesh mesh = dpp::generate_unit_square_mesh(1, 1);
  dpp::MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  dpp::TransientState state{0.0, Eigen::VectorXd::Zero(dm.total)};
  std::string vtk = dpp::write_vtk(mesh, dm, state, dpp_test::table_params());

  EXPECT_EQ(vtk.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(vtk.find("POINTS 16 double"), std::string::npos);
  EXPECT_NE(vtk.find("CELLS 18 72"), std::string::npos);
  EXPECT_NE(vtk.find("CELL_TYPES 18"), std::string::npos);
  EXPECT_NE(vtk.find("POINT_DATA 16"), std::string::npos);
  EXPECT_NE(vtk.find("VECTORS v1 double"), std::string::npos);
  EXPECT_NE(vtk.find("VECTORS v2 double"), std::string::npos);
  EXPECT_NE(vtk.find("SCALARS p1 double 1"), std::string::npos);
  EXPECT_NE(vtk.find("SCALARS transfer_rate double 1"), std::string::npos);
}

TEST(VtkWriter, StructureIsSelfConsistent) {
  dpp::TriangleMesh mesh = dpp::generate_unit_square_mesh(3, 2);
  dpp::MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  dpp::TransientState state{0.5, Eigen::VectorXd::Zero(dm.total)};
  state.coeffs.setConstant(0.25);
  std::string vtk = dpp::write_vtk(mesh, dm, state, dpp_test::table_params());

  // Minimal legacy-grammar walk: declared counts must match the data present
  // and every cell index must name a valid point.
  std::istringstream in(vtk);
  std::string tok;
  int npoints = 0, ncells = 0, nlist = 0;
  while (in >> tok) {
    if (tok == "POINTS") {
      in >> npoints;
      in >> tok;  // type
      for (int i = 0; i < 3 * npoints; ++i) {
        double v;
        ASSERT_TRUE(static_cast<bool>(in >> v));
      }
    } else if (tok == "CELLS") {
      in >> ncells >> nlist;
      ASSERT_EQ(nlist, 4 * ncells);
      for (int c = 0; c < ncells; ++c) {
        int k, a, b, d;
        ASSERT_TRUE(static_cast<bool>(in >> k >> a >> b >> d));
        EXPECT_EQ(k, 3);
        for (int idx : {a, b, d}) {
          EXPECT_GE(idx, 0);
          EXPECT_LT(idx, npoints);
        }
      }
    } else if (tok == "CELL_TYPES") {
      int n;
      in >> n;
      ASSERT_EQ(n, ncells);
      for (int c = 0; c < n; ++c) {
        int type;
        ASSERT_TRUE(static_cast<bool>(in >> type));
        EXPECT_EQ(type, 5);  // VTK_TRIANGLE
      }
    }
  }
  EXPECT_EQ(npoints, dm.p3_scalar_count);
  EXPECT_EQ(ncells, 9 * mesh.triangle_count());

  // Constant state: velocity samples carry the constant, zero state doesn't.
  EXPECT_NE(vtk.find("0.25 0.25 0"), std::string::npos);
  dpp::TransientState zero{0.0, Eigen::VectorXd::Zero(dm.total)};
  std::string vtk0 = dpp::write_vtk(mesh, dm, zero, dpp_test::table_params());
  EXPECT_EQ(vtk0.find("0.25 0.25 0"), std::string::npos);
}

namespace {

// Tiny XML well-formedness walk: tags balance and exactly one root element.
bool xml_well_formed(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  bool seen_root = false;
  while ((i = doc.find('<', i)) != std::string::npos) {
    std::size_t j = doc.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = doc.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.rfind("?", 0) == 0 || tag.rfind("!", 0) == 0) continue;
    if (tag.rfind("/", 0) == 0) {
      if (stack.empty()) return false;
      std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
      if (stack.empty()) ++roots;
    } else if (tag.back() == '/') {
      if (stack.empty()) return false;  // no self-closing root expected
    } else {
      std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
      if (stack.empty() && seen_root) return false;
      seen_root = true;
      stack.push_back(name);
    }
  }
  return stack.empty() && roots == 1;
}

}  // namespace

TEST(SvgWriter, TwoPolylinesAndWellFormedXml) {
  dpp::NormSeries series = {{0, 0.0, 1.5811, 0, 0, 0}, {1, 2.0, 1.2, 0, 0, 0}};
  dpp::BoundReport report = dpp::check_growth_bound(series, 5.0, 1.5811);
  std::string svg = dpp::write_svg_plot(series, report);

  int polylines = 0;
  std::size_t pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    pos += 9;
  }
  EXPECT_EQ(polylines, 2);
  EXPECT_NE(svg.find("width=\"800\" height=\"500\""), std::string::npos);
  EXPECT_TRUE(xml_well_formed(svg));
  EXPECT_EQ(svg.find("href"), std::string::npos);  // no external assets
}

TEST(ExecuteRun, SmallRunArtifactsAndDeterminism) {
  dpp::RunConfig cfg = dpp::read_config(small_config());
  fs::path out1 = temp_dir("run_a");
  fs::path out2 = temp_dir("run_b");
  dpp::RunOutcome o1 = dpp::execute_run(cfg, out1.string());
  dpp::RunOutcome o2 = dpp::execute_run(cfg, out2.string());

  EXPECT_EQ(o1.steps, 5);
  EXPECT_EQ(o1.series.size(), 6u);
  EXPECT_TRUE(o1.report.pass);
  EXPECT_TRUE(fs::exists(out1 / "norms.csv"));
  EXPECT_TRUE(fs::exists(out1 / "report.json"));
  EXPECT_TRUE(fs::exists(out1 / "norm_plot.svg"));

  // Byte-identical outputs for identical inputs.
  EXPECT_EQ(dpp::read_text_file(out1 / "norms.csv"),
            dpp::read_text_file(out2 / "norms.csv"));
  EXPECT_EQ(dpp::read_text_file(out1 / "norm_plot.svg"),
            dpp::read_text_file(out2 / "norm_plot.svg"));
  EXPECT_EQ(dpp::read_text_file(out1 / "report.json"),
            dpp::read_text_file(out2 / "report.json"));
}

TEST(ExecuteRun, VtkSnapshotsWhenRequested) {
  dpp::RunConfig cfg = dpp::read_config(
      small_config(R"(, "output": {"directory": "unused", "vtk_every": 2})"));
  fs::path out = temp_dir("run_vtk");
  dpp::execute_run(cfg, out.string());
  EXPECT_TRUE(fs::exists(out / "fields_000000.vtk"));
  EXPECT_TRUE(fs::exists(out / "fields_000002.vtk"));
  EXPECT_TRUE(fs::exists(out / "fields_000004.vtk"));
  EXPECT_TRUE(fs::exists(out / "fields_000005.vtk"));  // forced final snapshot
}

TEST(CliMain, RunVerifyRoundTripReproducesVerdict) {
  fs::path dir = temp_dir("cli_run");
  fs::path cfg_path = dir / "config.json";
  dpp::write_text_file(cfg_path, small_config());

  EXPECT_EQ(run_cli({"run", "--config", cfg_path.string(), "--out",
                     (dir / "out").string()}),
            0);

  // Re-check with the f_max/intercept recorded in the report.
  auto report =
      nlohmann::json::parse(dpp::read_text_file(dir / "out" / "report.json"));
  EXPECT_TRUE(report.at("pass").get<bool>());
  const std::string csv = (dir / "out" / "norms.csv").string();
  EXPECT_EQ(run_cli({"verify-bound", "--csv", csv, "--fmax",
                     dpp::format_sig9(report.at("f_max").get<double>()),
                     "--intercept",
                     dpp::format_sig9(report.at("intercept").get<double>())}),
            0);

  // A bound that undercuts the recorded norms must fail with exit 1.
  EXPECT_EQ(run_cli({"verify-bound", "--csv", csv, "--fmax", "0.0",
                     "--intercept", "0.5"}),
            1);
}

TEST(CliMain, MeshSubcommandAndUsageErrors) {
  fs::path dir = temp_dir("cli_mesh");
  fs::path mesh_path = dir / "mesh.txt";
  EXPECT_EQ(run_cli({"mesh", "--nx", "3", "--ny", "2", "--out",
                     mesh_path.string()}),
            0);
  dpp::TriangleMesh mesh = dpp::import_mesh(dpp::read_text_file(mesh_path));
  EXPECT_EQ(mesh.vertex_count(), 12);
  EXPECT_EQ(mesh.triangle_count(), 12);

  EXPECT_EQ(run_cli({"mesh", "--nx", "0", "--ny", "2", "--out",
                     mesh_path.string()}),
            2);
  EXPECT_EQ(run_cli({"bogus-subcommand"}), 2);
  EXPECT_EQ(run_cli({"run"}), 2);  // missing --config
  EXPECT_EQ(run_cli({"run", "--config", "/nonexistent/path.json"}), 2);
}

TEST(CliMain, ConfigErrorsExitTwo) {
  fs::path dir = temp_dir("cli_badcfg");
  fs::path cfg_path = dir / "bad.json";
  dpp::write_text_file(cfg_path, R"({"params": {"gamma": 1.0}})");
  EXPECT_EQ(run_cli({"run", "--config", cfg_path.string()}), 2);
}
