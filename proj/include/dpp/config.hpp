#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "dpp/diagnostics.hpp"
#include "dpp/errors.hpp"
#include "dpp/expr.hpp"
#include "dpp/model.hpp"

namespace dpp {

/// Full description of a simulation run. The document format is JSON with a
/// strict schema: unknown keys are rejected, missing keys take the defaults
/// below, and every expression string is parsed eagerly. Only `params` is
/// required.
struct RunConfig {
  struct Mesh {
    int nx = 20;
    int ny = 20;
    bool operator==(const Mesh&) const = default;
  } mesh;

  struct Time {
    double dt = 1e-3;
    double t_end = 2.0;
    bool operator==(const Time&) const = default;
  } time;

  MediumParameters params;

  struct BodyForce {
    std::string bx = "0";
    std::string by = "0";
    std::optional<std::array<double, 2>> amplitude_bounds;
    bool operator==(const BodyForce&) const = default;
  } body_force;

  struct Initial {
    std::string u1x = "0";
    std::string u1y = "0";
    std::string u2x = "0";
    std::string u2y = "0";
    bool operator==(const Initial&) const = default;
  } initial;

  struct BoundaryEntry {
    std::string kind = "velocity";  // or "pressure"
    std::string value = "0";
    bool operator==(const BoundaryEntry&) const = default;
  };
  std::array<std::array<BoundaryEntry, 2>, 4> boundary{};  // [side][network-1]

  struct Diagnostics {
    std::string fmax_mode = "amplitude-bound";  // or "sampled"
    int record_every = 1;
    int quadrature_degree = 8;
    bool operator==(const Diagnostics&) const = default;
  } diagnostics;

  struct Output {
    std::string directory = "out";
    int vtk_every = 0;  // 0 disables field snapshots
    bool operator==(const Output&) const = default;
  } output;

  BodyForceSpec body_force_spec() const {
    return {Expression::parse(body_force.bx), Expression::parse(body_force.by)};
  }
  InitialConditionSpec initial_spec() const {
    return {Expression::parse(initial.u1x), Expression::parse(initial.u1y),
            Expression::parse(initial.u2x), Expression::parse(initial.u2y)};
  }
  BoundaryConditionSpec boundary_spec() const {
    BoundaryConditionSpec spec;
    for (Side s : kAllSides) {
      for (int network : {1, 2}) {
        const BoundaryEntry& e =
            boundary[static_cast<int>(s)][network - 1];
        BoundaryCondition bc;
        bc.kind = e.kind == "pressure" ? BoundaryKind::Pressure
                                       : BoundaryKind::NormalVelocity;
        bc.value = Expression::parse(e.value);
        spec.at(s, network) = bc;
      }
    }
    return spec;
  }
  FMaxMode fmax_mode() const {
    return diagnostics.fmax_mode == "sampled" ? FMaxMode::Sampled
                                              : FMaxMode::AmplitudeBound;
  }

  bool operator==(const RunConfig& other) const {
    auto params_equal = [](const MediumParameters& a, const MediumParameters& b) {
      return a.gamma == b.gamma && a.mu == b.mu && a.beta == b.beta &&
             a.phi1 == b.phi1 && a.phi2 == b.phi2 && a.drag1 == b.drag1 &&
             a.drag2 == b.drag2;
    };
    return mesh == other.mesh && time == other.time &&
           params_equal(params, other.params) &&
           body_force == other.body_force && initial == other.initial &&
           boundary == other.boundary && diagnostics == other.diagnostics &&
           output == other.output;
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

inline double get_number(const json& obj, const std::string& path,
                         const char* key, double fallback,
                         bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(path + "." + key, "missing required key");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

inline int get_int(const json& obj, const std::string& path, const char* key,
                   int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(path + "." + key, "expected an integer");
  }
  return v.get<int>();
}

inline std::string get_string(const json& obj, const std::string& path,
                              const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::string get_expression(const json& obj, const std::string& path,
                                  const char* key,
                                  const std::string& fallback) {
  std::string src = get_string(obj, path, key, fallback);
  try {
    Expression::parse(src);
  } catch (const ParseError& e) {
    throw ConfigError(path + "." + key, e.what());
  }
  return src;
}

inline Eigen::Matrix2d get_matrix2(const json& obj, const std::string& path,
                                   const char* key) {
  const std::string full = path + "." + key;
  if (!obj.contains(key)) throw ConfigError(full, "missing required key");
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_array() || v[0].size() != 2 ||
      !v[1].is_array() || v[1].size() != 2) {
    throw ConfigError(full, "expected a 2x2 array of numbers");
  }
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      if (!v[r][c].is_number()) {
        throw ConfigError(full, "expected a 2x2 array of numbers");
      }
      m(r, c) = v[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline RunConfig read_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");
  detail::reject_unknown_keys(doc, "",
                              {"mesh", "time", "params", "body_force",
                               "initial", "boundary", "diagnostics", "output"});
  if (!doc.contains("params")) {
    throw ConfigError("params",
                      "missing required key (required keys: params.gamma, "
                      "params.mu, params.beta, params.phi1, params.phi2, "
                      "params.drag1, params.drag2)");
  }

  RunConfig cfg;

  if (doc.contains("mesh")) {
    const json& j = doc.at("mesh");
    detail::reject_unknown_keys(j, "mesh", {"nx", "ny"});
    cfg.mesh.nx = detail::get_int(j, "mesh", "nx", cfg.mesh.nx);
    cfg.mesh.ny = detail::get_int(j, "mesh", "ny", cfg.mesh.ny);
    if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1) {
      throw ConfigError("mesh", "nx and ny must be at least 1");
    }
  }

  if (doc.contains("time")) {
    const json& j = doc.at("time");
    detail::reject_unknown_keys(j, "time", {"dt", "t_end"});
    cfg.time.dt = detail::get_number(j, "time", "dt", cfg.time.dt);
    cfg.time.t_end = detail::get_number(j, "time", "t_end", cfg.time.t_end);
    if (!(cfg.time.dt > 0.0)) throw ConfigError("time.dt", "must be positive");
    if (cfg.time.t_end < cfg.time.dt) {
      throw ConfigError("time.t_end", "must be at least dt");
    }
  }

  {
    const json& j = doc.at("params");
    detail::reject_unknown_keys(
        j, "params", {"gamma", "mu", "beta", "phi1", "phi2", "drag1", "drag2"});
    cfg.params.gamma = detail::get_number(j, "params", "gamma", 0, true);
    cfg.params.mu = detail::get_number(j, "params", "mu", 0, true);
    cfg.params.beta = detail::get_number(j, "params", "beta", 0, true);
    cfg.params.phi1 = detail::get_number(j, "params", "phi1", 0, true);
    cfg.params.phi2 = detail::get_number(j, "params", "phi2", 0, true);
    cfg.params.drag1 = detail::get_matrix2(j, "params", "drag1");
    cfg.params.drag2 = detail::get_matrix2(j, "params", "drag2");
    auto violations = validate_parameters(cfg.params);
    if (!violations.empty()) {
      std::string msg;
      for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v;
      throw ConfigError("params", msg);
    }
  }

  if (doc.contains("body_force")) {
    const json& j = doc.at("body_force");
    detail::reject_unknown_keys(j, "body_force",
                                {"bx", "by", "amplitude_bounds"});
    cfg.body_force.bx =
        detail::get_expression(j, "body_force", "bx", cfg.body_force.bx);
    cfg.body_force.by =
        detail::get_expression(j, "body_force", "by", cfg.body_force.by);
    if (j.contains("amplitude_bounds")) {
      const json& b = j.at("amplitude_bounds");
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() ||
          !b[1].is_number()) {
        throw ConfigError("body_force.amplitude_bounds",
                          "expected an array of two numbers");
      }
      cfg.body_force.amplitude_bounds = {{b[0].get<double>(), b[1].get<double>()}};
    }
  } else {
    cfg.body_force.amplitude_bounds = {{0.0, 0.0}};  // zero force
  }

  if (doc.contains("initial")) {
    const json& j = doc.at("initial");
    detail::reject_unknown_keys(j, "initial", {"u1x", "u1y", "u2x", "u2y"});
    cfg.initial.u1x = detail::get_expression(j, "initial", "u1x", "0");
    cfg.initial.u1y = detail::get_expression(j, "initial", "u1y", "0");
    cfg.initial.u2x = detail::get_expression(j, "initial", "u2x", "0");
    cfg.initial.u2y = detail::get_expression(j, "initial", "u2y", "0");
  }

  if (doc.contains("boundary")) {
    const json& j = doc.at("boundary");
    detail::reject_unknown_keys(j, "boundary",
                                {"left", "right", "bottom", "top"});
    for (Side s : kAllSides) {
      const char* side_name = to_string(s);
      if (!j.contains(side_name)) continue;
      const json& js = j.at(side_name);
      const std::string side_path = std::string("boundary.") + side_name;
      detail::reject_unknown_keys(js, side_path, {"network1", "network2"});
      for (int network : {1, 2}) {
        const std::string net_key = "network" + std::to_string(network);
        if (!js.contains(net_key)) continue;
        const json& jn = js.at(net_key);
        const std::string net_path = side_path + "." + net_key;
        detail::reject_unknown_keys(jn, net_path, {"kind", "value"});
        auto& entry = cfg.boundary[static_cast<int>(s)][network - 1];
        entry.kind = detail::get_string(jn, net_path, "kind", "velocity");
        if (entry.kind != "velocity" && entry.kind != "pressure") {
          throw ConfigError(net_path + ".kind",
                            "expected 'velocity' or 'pressure'");
        }
        entry.value = detail::get_expression(jn, net_path, "value", "0");
      }
    }
  }

  if (doc.contains("diagnostics")) {
    const json& j = doc.at("diagnostics");
    detail::reject_unknown_keys(
        j, "diagnostics", {"fmax_mode", "record_every", "quadrature_degree"});
    cfg.diagnostics.fmax_mode = detail::get_string(j, "diagnostics", "fmax_mode",
                                                   cfg.diagnostics.fmax_mode);
    if (cfg.diagnostics.fmax_mode != "amplitude-bound" &&
        cfg.diagnostics.fmax_mode != "sampled") {
      throw ConfigError("diagnostics.fmax_mode",
                        "expected 'amplitude-bound' or 'sampled'");
    }
    cfg.diagnostics.record_every =
        detail::get_int(j, "diagnostics", "record_every", 1);
    if (cfg.diagnostics.record_every < 1) {
      throw ConfigError("diagnostics.record_every", "must be at least 1");
    }
    cfg.diagnostics.quadrature_degree =
        detail::get_int(j, "diagnostics", "quadrature_degree", 8);
    if (cfg.diagnostics.quadrature_degree < 1 ||
        cfg.diagnostics.quadrature_degree > 10) {
      throw ConfigError("diagnostics.quadrature_degree", "must be in 1..10");
    }
  }

  if (doc.contains("output")) {
    const json& j = doc.at("output");
    detail::reject_unknown_keys(j, "output", {"directory", "vtk_every"});
    cfg.output.directory =
        detail::get_string(j, "output", "directory", cfg.output.directory);
    cfg.output.vtk_every = detail::get_int(j, "output", "vtk_every", 0);
    if (cfg.output.vtk_every < 0) {
      throw ConfigError("output.vtk_every", "must be non-negative");
    }
  }

  return cfg;
}

inline std::string write_config(const RunConfig& cfg) {
  using detail::json;
  json doc;
  doc["mesh"] = {{"nx", cfg.mesh.nx}, {"ny", cfg.mesh.ny}};
  doc["time"] = {{"dt", cfg.time.dt}, {"t_end", cfg.time.t_end}};
  doc["params"] = {
      {"gamma", cfg.params.gamma},
      {"mu", cfg.params.mu},
      {"beta", cfg.params.beta},
      {"phi1", cfg.params.phi1},
      {"phi2", cfg.params.phi2},
      {"drag1",
       {{cfg.params.drag1(0, 0), cfg.params.drag1(0, 1)},
        {cfg.params.drag1(1, 0), cfg.params.drag1(1, 1)}}},
      {"drag2",
       {{cfg.params.drag2(0, 0), cfg.params.drag2(0, 1)},
        {cfg.params.drag2(1, 0), cfg.params.drag2(1, 1)}}}};
  doc["body_force"] = {{"bx", cfg.body_force.bx}, {"by", cfg.body_force.by}};
  if (cfg.body_force.amplitude_bounds) {
    doc["body_force"]["amplitude_bounds"] = *cfg.body_force.amplitude_bounds;
  }
  doc["initial"] = {{"u1x", cfg.initial.u1x},
                    {"u1y", cfg.initial.u1y},
                    {"u2x", cfg.initial.u2x},
                    {"u2y", cfg.initial.u2y}};
  for (Side s : kAllSides) {
    for (int network : {1, 2}) {
      const auto& e = cfg.boundary[static_cast<int>(s)][network - 1];
      doc["boundary"][to_string(s)]["network" + std::to_string(network)] = {
          {"kind", e.kind}, {"value", e.value}};
    }
  }
  doc["diagnostics"] = {{"fmax_mode", cfg.diagnostics.fmax_mode},
                        {"record_every", cfg.diagnostics.record_every},
                        {"quadrature_degree", cfg.diagnostics.quadrature_degree}};
  doc["output"] = {{"directory", cfg.output.directory},
                   {"vtk_every", cfg.output.vtk_every}};
  return doc.dump(2) + "\n";
}

}  // namespace dpp
