#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/abstraction.hpp"
#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/extraction.hpp"
#include "mosaic/faults.hpp"
#include "mosaic/network.hpp"
#include "mosaic/refinement.hpp"

namespace mosaic {

// Fully resolved run setup: everything the pipeline needs, validated.
struct RunConfig {
  Environment env = Environment::pendulum();
  Network net = Network(1, {});
  FaultModel fault = FaultModel::fault_free(2);
  BuildOptions build;
  RefineOptions refine;
  std::vector<double> grid_widths;  // empty = single cell covering init_region
  std::string output_dir = "out";
};

namespace detail {

inline double get_number(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    fail(errc::parse_error, "config", "'" + key + "' must be a number");
  return j[key].get<double>();
}

inline Box parse_box(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    fail(errc::parse_error, "config", what + " must be a non-empty array of [lo, hi] pairs");
  std::vector<Interval> dims;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      fail(errc::parse_error, "config", what + " entries must be [lo, hi] number pairs");
    const double lo = pair[0].get<double>();
    const double hi = pair[1].get<double>();
    if (lo > hi) fail(errc::parse_error, "config", what + " has lo > hi");
    dims.push_back(Interval(lo, hi));
  }
  return Box(std::move(dims));
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const std::string& k : known)
      if (k == key) {
        ok = true;
        break;
      }
    if (!ok) fail(errc::parse_error, "config", "unknown key '" + key + "' in " + where);
  }
}

inline Environment parse_environment(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    fail(errc::parse_error, "config", "environment needs a string 'name'");
  reject_unknown_keys(j, {"name", "params", "init_region"}, "environment");
  const std::string name = j["name"].get<std::string>();
  const nlohmann::json params =
      j.contains("params") ? j["params"] : nlohmann::json::object();
  if (!params.is_object())
    fail(errc::parse_error, "config", "environment params must be an object");
  if (name == "pendulum") {
    reject_unknown_keys(
        params, {"gravity", "mass", "length", "dt", "torque", "omega_max", "theta_fail"},
        "pendulum params");
    PendulumParams p;
    p.gravity = get_number(params, "gravity", p.gravity);
    p.mass = get_number(params, "mass", p.mass);
    p.length = get_number(params, "length", p.length);
    p.dt = get_number(params, "dt", p.dt);
    p.torque = get_number(params, "torque", p.torque);
    p.omega_max = get_number(params, "omega_max", p.omega_max);
    p.theta_fail = get_number(params, "theta_fail", p.theta_fail);
    Box init = Environment::pendulum().init_region();
    if (j.contains("init_region")) init = parse_box(j["init_region"], "init_region");
    return Environment::pendulum(p, std::move(init));
  }
  if (name == "cartpole") {
    reject_unknown_keys(params,
                        {"gravity", "cart_mass", "pole_mass", "half_length", "force", "dt",
                         "x_fail", "theta_fail"},
                        "cartpole params");
    CartpoleParams p;
    p.gravity = get_number(params, "gravity", p.gravity);
    p.cart_mass = get_number(params, "cart_mass", p.cart_mass);
    p.pole_mass = get_number(params, "pole_mass", p.pole_mass);
    p.half_length = get_number(params, "half_length", p.half_length);
    p.force = get_number(params, "force", p.force);
    p.dt = get_number(params, "dt", p.dt);
    p.x_fail = get_number(params, "x_fail", p.x_fail);
    p.theta_fail = get_number(params, "theta_fail", p.theta_fail);
    Box init = Environment::cartpole().init_region();
    if (j.contains("init_region")) init = parse_box(j["init_region"], "init_region");
    return Environment::cartpole(p, std::move(init));
  }
  fail(errc::parse_error, "config", "unknown environment '" + name + "'");
}

inline FaultModel parse_fault(const nlohmann::json& j, std::size_t action_count) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    fail(errc::parse_error, "config", "fault needs a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "none") return FaultModel::fault_free(action_count);
  if (kind == "sticky" || kind == "dropped") {
    if (!j.contains("p") || !j["p"].is_number())
      fail(errc::parse_error, "config", "fault '" + kind + "' needs a numeric 'p'");
    const double p = j["p"].get<double>();
    return kind == "sticky" ? FaultModel::sticky(p, action_count)
                            : FaultModel::dropped(p, action_count);
  }
  if (kind == "custom") {
    if (!j.contains("table") || !j["table"].is_object())
      fail(errc::parse_error, "config", "custom fault needs a 'table' object");
    std::vector<std::vector<Outcome>> table(action_count);
    for (const auto& [key, rows] : j["table"].items()) {
      std::size_t a = 0;
      try {
        a = std::stoul(key);
      } catch (...) {
        fail(errc::parse_error, "config", "fault table key '" + key + "' is not an action");
      }
      if (a >= action_count)
        fail(errc::bad_action_index, "config",
             "fault table action " + key + " out of range");
      if (!rows.is_array())
        fail(errc::parse_error, "config", "fault table entries must be arrays");
      for (const auto& row : rows) {
        if (!row.is_object() || !row.contains("prob") || !row["prob"].is_number() ||
            !row.contains("word") || !row["word"].is_array())
          fail(errc::parse_error, "config",
               "fault outcomes must be {\"prob\": number, \"word\": [actions]}");
        Outcome o;
        o.probability = row["prob"].get<double>();
        for (const auto& v : row["word"]) {
          if (!v.is_number_unsigned())
            fail(errc::parse_error, "config", "fault words must hold action indices");
          o.word.push_back(v.get<std::size_t>());
        }
        table[a].push_back(std::move(o));
      }
    }
    return FaultModel(action_count, std::move(table));
  }
  fail(errc::parse_error, "config", "unknown fault kind '" + kind + "'");
}

}  // namespace detail

// Default branch-and-bound precision: 1/64 of the widest initial dimension.
inline double default_epsilon(const Box& init_region) {
  return init_region.max_width() / 64.0;
}

inline RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) fail(errc::parse_error, "config", "configuration must be an object");
  detail::reject_unknown_keys(
      j,
      {"environment", "network", "fault", "horizon", "epsilon", "p_safe", "grid",
       "refinement_rounds", "max_states", "bound_method", "output_dir"},
      "configuration");
  for (const char* key : {"environment", "network", "fault", "horizon"})
    if (!j.contains(key))
      fail(errc::parse_error, "config", std::string("missing required key '") + key + "'");

  RunConfig cfg;
  cfg.env = detail::parse_environment(j["environment"]);

  if (!j["network"].is_string())
    fail(errc::parse_error, "config", "'network' must be a file path");
  std::string net_path = j["network"].get<std::string>();
  if (!net_path.empty() && net_path.front() != '/' && !base_dir.empty())
    net_path = base_dir + "/" + net_path;
  cfg.net = load_network(net_path);

  cfg.fault = detail::parse_fault(j["fault"], cfg.env.action_count());

  if (!j["horizon"].is_number_integer() || j["horizon"].get<int>() < 1)
    fail(errc::parse_error, "config", "'horizon' must be a positive integer");
  cfg.build.horizon = j["horizon"].get<int>();

  cfg.build.eps = detail::get_number(j, "epsilon", 0.0);
  if (cfg.build.eps == 0.0) cfg.build.eps = default_epsilon(cfg.env.init_region());
  if (!(cfg.build.eps > 0.0))
    fail(errc::bad_precision, "config", "'epsilon' must be positive");

  cfg.refine.p_safe = detail::get_number(j, "p_safe", 0.2);
  if (!(cfg.refine.p_safe >= 0.0 && cfg.refine.p_safe <= 1.0))
    fail(errc::bad_probability, "config", "'p_safe' must lie in [0, 1]");

  if (j.contains("grid")) {
    if (!j["grid"].is_array())
      fail(errc::parse_error, "config", "'grid' must be an array of cell widths");
    for (const auto& v : j["grid"]) {
      if (!v.is_number()) fail(errc::parse_error, "config", "'grid' entries must be numbers");
      cfg.grid_widths.push_back(v.get<double>());
    }
  }

  cfg.refine.max_rounds = 0;
  if (j.contains("refinement_rounds")) {
    if (!j["refinement_rounds"].is_number_integer() || j["refinement_rounds"].get<int>() < 0)
      fail(errc::parse_error, "config", "'refinement_rounds' must be a non-negative integer");
    cfg.refine.max_rounds = j["refinement_rounds"].get<int>();
  }

  if (j.contains("max_states")) {
    if (!j["max_states"].is_number_unsigned() || j["max_states"].get<std::size_t>() == 0)
      fail(errc::parse_error, "config", "'max_states' must be a positive integer");
    cfg.build.max_states = j["max_states"].get<std::size_t>();
  }

  if (j.contains("bound_method")) {
    const std::string m = j["bound_method"].is_string() ? j["bound_method"].get<std::string>()
                                                        : std::string();
    if (m == "planet")
      cfg.build.method = BoundMethod::planet;
    else if (m == "interval")
      cfg.build.method = BoundMethod::interval;
    else
      fail(errc::parse_error, "config", "'bound_method' must be \"planet\" or \"interval\"");
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      fail(errc::parse_error, "config", "'output_dir' must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  return cfg;
}

inline nlohmann::json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, "config", "invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

// Applies a `--set key=value` override; dotted keys descend into objects.
// The value is parsed as JSON when possible, else taken as a string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(errc::parse_error, "config", "override must look like key=value: '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (...) {
    value = raw;
  }
  nlohmann::json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) fail(errc::parse_error, "config", "bad override path '" + path + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = std::move(value);
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = nlohmann::json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

inline std::string directory_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

inline RunConfig load_run_config(const std::string& path,
                                 const std::vector<std::string>& overrides = {}) {
  nlohmann::json j = load_config_json(path);
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_run_config(j, directory_of(path));
}

}  // namespace mosaic
