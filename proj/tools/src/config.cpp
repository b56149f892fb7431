#include "cli/config.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>

#include "qconserve/error.hpp"

namespace qconserve::cli {

namespace {

using nlohmann::json;

// Pulls typed fields out of the "parameters" object and rejects leftovers.
class Params {
 public:
  explicit Params(const json& obj) : obj_(obj) {
    if (!obj_.is_object()) throw ValidationError("parameters must be a JSON object");
  }

  void real(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ValidationError(std::string("parameter '") + key + "' must be a number");
      out = v->get<double>();
    }
  }

  void count(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        throw ValidationError(std::string("parameter '") + key + "' must be a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void flag(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ValidationError(std::string("parameter '") + key + "' must be true or false");
      out = v->get<bool>();
    }
  }

  // A complex amplitude is a number or a [re, im] pair.
  void amplitude(const char* key, Complex& out) {
    if (const json* v = take(key)) {
      if (v->is_number()) {
        out = Complex(v->get<double>(), 0.0);
      } else if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
        out = Complex((*v)[0].get<double>(), (*v)[1].get<double>());
      } else {
        throw ValidationError(std::string("parameter '") + key + "' must be a number or [re, im]");
      }
    }
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!used_.count(key)) throw ValidationError("unknown parameter '" + key + "'");
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& obj_;
  std::set<std::string> used_;
};

ScenarioSpec parse_spec(const std::string& scenario, const json& params) {
  Params p(params);
  if (scenario == "mach_zehnder") {
    MachZehnderSpec s;
    p.real("kick", s.kick);
    p.real("apparatus_sigma_p", s.apparatus_sigma_p);
    p.amplitude("amp_r", s.amp_r);
    p.amplitude("amp_t", s.amp_t);
    p.count("interaction_steps", s.interaction_steps);
    p.finish();
    s.validate();
    return s;
  }
  if (scenario == "free_packet") {
    GaussianPacketSpec s;
    p.real("a", s.a);
    p.real("mass", s.mass);
    p.count("grid_points", s.grid.points);
    p.real("grid_length", s.grid.length);
    p.real("detect_time", s.detect_time);
    p.real("window_center", s.window_center);
    p.real("window_width", s.window_width);
    p.count("steps", s.steps);
    p.count("snapshots", s.snapshots);
    p.finish();
    s.validate();
    return s;
  }
  if (scenario == "stern_gerlach") {
    SternGerlachSpec s;
    p.real("kick", s.kick);
    p.count("particle_mode_dim", s.particle_mode_dim);
    p.count("apparatus_mode_dim", s.apparatus_mode_dim);
    p.real("pointer_spread", s.pointer_spread);
    p.flag("angular_ladder", s.angular_ladder);
    p.count("angular_mode_dim", s.angular_mode_dim);
    p.count("interaction_steps", s.interaction_steps);
    p.finish();
    s.validate();
    return s;
  }
  if (scenario == "apr_box") {
    APRBoxSpec s;
    p.real("box_length", s.box_length);
    p.count("n_modes", s.n_modes);
    p.real("target_wavenumber", s.target_wavenumber);
    p.real("window_lo", s.window_lo);
    p.real("window_hi", s.window_hi);
    p.real("mass", s.mass);
    p.count("grid_points", s.grid_points);
    p.count("quadrature_points", s.quadrature_points);
    p.real("preparation_time", s.preparation_time);
    p.count("preparation_steps", s.preparation_steps);
    p.finish();
    s.validate();
    return s;
  }
  throw ValidationError("unknown scenario '" + scenario + "'");
}

json amplitude_json(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog{
      {"mach_zehnder", "photon path qubit entangled with a beam-splitter momentum pointer; entropy vs overlap deficit",
       {"kick", "apparatus_sigma_p", "amp_r", "amp_t", "interaction_steps"}},
      {"free_packet", "free Gaussian packet detected in a position window; segment momentum and expectation audits",
       {"a", "mass", "grid_points", "grid_length", "detect_time", "window_center", "window_width", "steps",
        "snapshots"}},
      {"stern_gerlach", "spin-dependent momentum kick with apparatus recoil ladders; per-branch momentum ledger",
       {"kick", "particle_mode_dim", "apparatus_mode_dim", "pointer_spread", "angular_ladder", "angular_mode_dim",
        "interaction_steps"}},
      {"apr_box", "superoscillating box state opened over a window; high-energy verdict and energy audit",
       {"box_length", "n_modes", "target_wavenumber", "window_lo", "window_hi", "mass", "grid_points",
        "quadrature_points", "preparation_time", "preparation_steps"}},
  };
  return catalog;
}

std::vector<std::string> parse_formats(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item != "json" && item != "csv") throw ValidationError("unknown format '" + item + "' (json, csv)");
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw ValidationError("at least one output format is required");
  return out;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known{"scenario", "parameters", "seed", "output_dir", "formats"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ValidationError("unknown config field '" + key + "'");
  }
  RunConfig cfg;
  if (!doc.contains("scenario") || !doc["scenario"].is_string()) throw ValidationError("config needs a scenario name");
  cfg.scenario = doc["scenario"].get<std::string>();
  const bool seed_ok = doc.contains("seed") && doc["seed"].is_number_integer() &&
                       (doc["seed"].is_number_unsigned() || doc["seed"].get<std::int64_t>() >= 0);
  if (!seed_ok) {
    throw ValidationError("config needs an unsigned integer seed");
  }
  cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ValidationError("output_dir must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("formats")) {
    const json& f = doc["formats"];
    if (!f.is_array()) throw ValidationError("formats must be an array of strings");
    std::string joined;
    for (const auto& item : f) {
      if (!item.is_string()) throw ValidationError("formats must be an array of strings");
      joined += (joined.empty() ? "" : ",") + item.get<std::string>();
    }
    cfg.formats = parse_formats(joined);
  }
  cfg.spec = parse_spec(cfg.scenario, doc.contains("parameters") ? doc["parameters"] : json::object());
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json parameters_json(const ScenarioSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MachZehnderSpec>) {
          return {{"kick", s.kick},
                  {"apparatus_sigma_p", s.apparatus_sigma_p},
                  {"amp_r", amplitude_json(s.amp_r)},
                  {"amp_t", amplitude_json(s.amp_t)},
                  {"interaction_steps", s.interaction_steps}};
        } else if constexpr (std::is_same_v<T, GaussianPacketSpec>) {
          return {{"a", s.a},
                  {"mass", s.mass},
                  {"grid_points", s.grid.points},
                  {"grid_length", s.grid.length},
                  {"detect_time", s.detect_time},
                  {"window_center", s.window_center},
                  {"window_width", s.window_width},
                  {"steps", s.steps},
                  {"snapshots", s.snapshots}};
        } else if constexpr (std::is_same_v<T, SternGerlachSpec>) {
          return {{"kick", s.kick},
                  {"particle_mode_dim", s.particle_mode_dim},
                  {"apparatus_mode_dim", s.apparatus_mode_dim},
                  {"pointer_spread", s.pointer_spread},
                  {"angular_ladder", s.angular_ladder},
                  {"angular_mode_dim", s.angular_mode_dim},
                  {"interaction_steps", s.interaction_steps}};
        } else {
          return {{"box_length", s.box_length},
                  {"n_modes", s.n_modes},
                  {"target_wavenumber", s.target_wavenumber},
                  {"window_lo", s.window_lo},
                  {"window_hi", s.window_hi},
                  {"mass", s.mass},
                  {"grid_points", s.grid_points},
                  {"quadrature_points", s.quadrature_points},
                  {"preparation_time", s.preparation_time},
                  {"preparation_steps", s.preparation_steps}};
        }
      },
      spec);
}

}  // namespace qconserve::cli
