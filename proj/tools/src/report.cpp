#include "cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "qconserve/error.hpp"

namespace qconserve::cli {

namespace {

using nlohmann::json;

json audit_json(const AuditRecord& a) {
  return {{"pre_value", a.pre_value},
          {"branch_weighted", a.branch_weighted},
          {"difference", a.difference},
          {"commutator_norms", a.commutator_norms},
          {"classification", a.classification()}};
}

json results_json(const MachZehnderReport& r) {
  json branches = json::array();
  for (const auto& b : r.branches) {
    branches.push_back({{"label", b.label},
                        {"probability", b.probability},
                        {"photon_momentum", b.photon},
                        {"apparatus_momentum", b.apparatus},
                        {"total_momentum", b.total},
                        {"change_from_pre_interaction", b.change_from_pre_interaction}});
  }
  return {{"apparatus_points", r.apparatus_points},
          {"momentum_spacing", r.momentum_spacing},
          {"overlap", r.overlap},
          {"epsilon", r.epsilon},
          {"entropy_exact", r.entropy_exact},
          {"entropy_approx", r.entropy_approx},
          {"entropy_relative_error", r.entropy_relative_error},
          {"visibility", r.visibility},
          {"reflected_probability", r.reflected_probability},
          {"collapsed_fidelity", r.collapsed_fidelity},
          {"pre_interaction_momentum", r.pre_interaction_momentum},
          {"post_interaction_momentum", r.post_interaction_momentum},
          {"branches", branches}};
}

json results_json(const FreePacketReport& r) {
  return {{"width_at_detection", r.width_at_detection},
          {"position_sq_at_detection", r.position_sq_at_detection},
          {"global_momentum_at_detection", r.global_momentum_at_detection},
          {"window_probability", r.window_probability},
          {"segment_momentum", r.segment_momentum},
          {"predicted_momentum", r.predicted_momentum},
          {"momentum_difference", r.momentum_difference},
          {"segment_momentum_sq", r.segment_momentum_sq},
          {"initial_momentum_sq", r.initial_momentum_sq},
          {"momentum_audit", audit_json(r.momentum_audit)},
          {"kinetic_audit", audit_json(r.kinetic_audit)}};
}

json results_json(const SternGerlachReport& r) {
  json branches = json::array();
  for (const auto& b : r.branches) {
    branches.push_back({{"label", b.label},
                        {"probability", b.probability},
                        {"particle_delta", b.particle_delta},
                        {"apparatus_delta", b.apparatus_delta},
                        {"total_change", b.total_change},
                        {"angular_particle_delta", b.angular_particle_delta},
                        {"angular_apparatus_delta", b.angular_apparatus_delta},
                        {"angular_total_change", b.angular_total_change}});
  }
  return {{"initial_sigma_z", r.initial_sigma_z},
          {"initial_sigma_x", r.initial_sigma_x},
          {"initial_total_momentum", r.initial_total_momentum},
          {"post_total_momentum", r.post_total_momentum},
          {"post_particle_momentum", r.post_particle_momentum},
          {"post_apparatus_momentum", r.post_apparatus_momentum},
          {"post_sigma_x", r.post_sigma_x},
          {"pointer_overlap", r.pointer_overlap},
          {"momentum_drift", r.momentum_drift},
          {"branches", branches}};
}

json results_json(const APRBoxReport& r) {
  json coeffs = json::array();
  for (const auto& c : r.design.coefficients) coeffs.push_back(json::array({c.real(), c.imag()}));
  return {{"design",
           {{"coefficients", coeffs},
            {"scale", r.design.scale},
            {"residual", r.design.residual},
            {"achieved_local_wavenumber", r.design.achieved_local_wavenumber},
            {"target_wavenumber", r.design.target_wavenumber},
            {"success", r.design.success}}},
          {"band_limit_energy", r.band_limit_energy},
          {"pre_measurement_energy", r.pre_measurement_energy},
          {"preparation_energy_drift", r.preparation_energy_drift},
          {"p_in", r.p_in},
          {"p_out", r.p_out},
          {"inside_energy", r.inside_energy},
          {"inside_energy_sharp", r.inside_energy_sharp},
          {"inside_local_wavenumber", r.inside_local_wavenumber},
          {"high_energy", r.high_energy},
          {"inside_mode_weights", r.inside_mode_weights},
          {"energy_audit", audit_json(r.energy_audit)}};
}

json samples_json(const std::vector<LedgerSample>& samples) {
  json out = json::array();
  for (const auto& s : samples) out.push_back({{"t", s.t}, {"global", s.global}, {"per_factor", s.per_factor}});
  return out;
}

// Draws one outcome of the last measurement with the configured seed.
json sampled_outcome(const ConservationReport& ledger, std::uint64_t seed) {
  if (ledger.events.empty()) return nullptr;
  const MeasurementEvent& ev = ledger.events.back();
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < ev.labels.size(); ++i) branches.push_back(Branch{ev.labels[i], ev.probabilities[i], {}});
  std::mt19937_64 rng(seed);
  const std::size_t k = sample_outcome(branches, rng);
  return {{"event", ev.name}, {"label", ev.labels[k]}, {"index", k}};
}

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_value(std::string& out, const json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {  // std::map storage: keys already sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        write_value(out, item, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write_value(out, v[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("report schema: " + what);
}

}  // namespace

json ledger_json(const ConservationReport& ledger) {
  json entries = json::array();
  for (const auto& e : ledger.entries) {
    entries.push_back({{"name", e.name},
                       {"tag", e.tag},
                       {"commutator_with_h", e.commutator_with_h},
                       {"factors", e.factors},
                       {"drift", e.drift},
                       {"samples", samples_json(e.samples)}});
  }
  json events = json::array();
  for (const auto& ev : ledger.events) {
    json recs = json::array();
    for (const auto& rec : ev.entries) {
      json branches = json::array();
      for (const auto& b : rec.branches) {
        json jb = {{"label", b.label},
                   {"probability", b.probability},
                   {"null_branch", b.null_branch},
                   {"global", b.global},
                   {"per_factor", b.per_factor},
                   {"deltas", b.deltas},
                   {"global_delta", b.global_delta},
                   {"offset_residual", b.offset_residual}};
        if (b.change_from_pre_interaction) jb["change_from_pre_interaction"] = *b.change_from_pre_interaction;
        branches.push_back(std::move(jb));
      }
      json jr = {{"entry", rec.entry},
                 {"baseline_global", rec.baseline_global},
                 {"baseline_per_factor", rec.baseline_per_factor},
                 {"audit_difference", rec.audit_difference},
                 {"branches", branches}};
      if (rec.pre_interaction_global) jr["pre_interaction_global"] = *rec.pre_interaction_global;
      if (rec.classification) jr["classification"] = *rec.classification;
      recs.push_back(std::move(jr));
    }
    events.push_back(
        {{"name", ev.name}, {"labels", ev.labels}, {"probabilities", ev.probabilities}, {"entries", recs}});
  }
  return {{"entries", entries},
          {"events", events},
          {"max_unitary_drift", ledger.max_unitary_drift},
          {"branch_offset_residuals", ledger.branch_offset_residuals}};
}

ScenarioOutput run_scenario(const RunConfig& config) {
  ScenarioOutput out;
  json results = std::visit(
      [&out](const auto& spec) -> json {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MachZehnderSpec>) {
          auto r = run_mach_zehnder(spec);
          out.ledger = r.ledger;
          return results_json(r);
        } else if constexpr (std::is_same_v<T, GaussianPacketSpec>) {
          auto r = run_free_packet(spec);
          out.ledger = r.ledger;
          return results_json(r);
        } else if constexpr (std::is_same_v<T, SternGerlachSpec>) {
          auto r = run_stern_gerlach(spec);
          out.ledger = r.ledger;
          return results_json(r);
        } else {
          auto r = run_apr_box(spec);
          out.ledger = r.ledger;
          return results_json(r);
        }
      },
      config.spec);
  results["sampled_outcome"] = sampled_outcome(out.ledger, config.seed);

  // output_dir is left out of the echo so that the report only depends on config + seed.
  out.report = {{"schema", report_schema},
                {"config",
                 {{"scenario", config.scenario},
                  {"seed", config.seed},
                  {"parameters", parameters_json(config.spec)},
                  {"formats", config.formats}}},
                {"results", std::move(results)},
                {"ledger", ledger_json(out.ledger)}};
  return out;
}

std::string dump_deterministic(const json& value) {
  std::string out;
  write_value(out, value, 0);
  out += "\n";
  return out;
}

std::string timeseries_csv(const ConservationReport& ledger) {
  std::string out = "t";
  std::size_t rows = 0;
  for (const auto& e : ledger.entries) {
    out += "," + e.name;
    for (const auto& f : e.factors) out += "," + e.name + ":" + f;
    rows = std::max(rows, e.samples.size());
  }
  out += "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    bool have_t = false;
    std::string line;
    for (const auto& e : ledger.entries) {
      if (i >= e.samples.size()) throw ValidationError("ledger entries have different sample counts");
      const LedgerSample& s = e.samples[i];
      if (!have_t) {
        write_number(line, s.t);
        have_t = true;
      }
      line += ",";
      write_number(line, s.global);
      for (const auto& f : e.factors) {
        line += ",";
        auto it = s.per_factor.find(f);
        write_number(line, it == s.per_factor.end() ? 0.0 : it->second);
      }
    }
    out += line + "\n";
  }
  return out;
}

void check_report_schema(const json& doc) {
  require(doc.is_object(), "top level must be an object");
  require(doc.value("schema", "") == report_schema, "schema tag");
  require(doc.contains("config") && doc["config"].is_object(), "config object");
  const json& cfg = doc["config"];
  require(cfg.contains("scenario") && cfg["scenario"].is_string(), "config.scenario");
  require(cfg.contains("seed") && cfg["seed"].is_number_unsigned(), "config.seed");
  require(cfg.contains("parameters") && cfg["parameters"].is_object(), "config.parameters");
  require(doc.contains("results") && doc["results"].is_object(), "results object");
  require(doc.contains("ledger") && doc["ledger"].is_object(), "ledger object");
  const json& led = doc["ledger"];
  require(led.contains("entries") && led["entries"].is_array(), "ledger.entries");
  require(led.contains("events") && led["events"].is_array(), "ledger.events");
  require(led.contains("max_unitary_drift") && led["max_unitary_drift"].is_number(), "ledger.max_unitary_drift");
  for (const auto& e : led["entries"]) {
    require(e.contains("name") && e["name"].is_string(), "entry name");
    require(e.contains("tag") && e["tag"].is_string(), "entry tag");
    require(e.contains("samples") && e["samples"].is_array(), "entry samples");
    for (const auto& s : e["samples"]) {
      require(s.contains("t") && s["t"].is_number() && s.contains("global") && s["global"].is_number(),
              "sample fields");
    }
  }
}

}  // namespace qconserve::cli
