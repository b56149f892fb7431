// One line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/run.hpp"
#include "json.hpp"
#include "qconserve/dynamics.hpp"
#include "qconserve/entanglement.hpp"
#include "qconserve/measurement.hpp"
#include "qconserve/scenarios.hpp"
#include "support/oracles.hpp"

using namespace qconserve;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Criteria {
 public:
  void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_s;
    const bool ok = o.pass && in_time;
    failures_ += ok ? 0 : 1;
    std::printf("[%s] criterion %d %s: %s (%.2f s, limit %.0f s)\n", ok ? "PASS" : "FAIL", id, title,
                o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
  }
  [[nodiscard]] int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const EntrySeries* find_entry(const ConservationReport& r, const std::string& name) {
  for (const auto& e : r.entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Outcome entropy_approximation() {
  Outcome o;
  const auto r = entropy_report(OverlapDeficit(0.01));
  const double direct = oracle::bipartite_entropy(
      two_branch_state(Complex(0.99, 0.0), 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2).amplitudes(), 2);
  o.pass = std::abs(r.exact_nats - 0.0314791) <= 1e-6 && std::abs(direct - r.exact_nats) <= 1e-12 &&
           std::abs(r.approx_nats - 0.0314916) <= 1e-6 && r.relative_error <= 1e-3;
  double last = r.relative_error;
  for (double eps : {1e-3, 1e-4}) {
    const double rel = entropy_report(OverlapDeficit(eps)).relative_error;
    o.pass = o.pass && rel < last;
    last = rel;
  }
  o.detail = "S=" + fmt("%.7f", r.exact_nats) + " approx=" + fmt("%.7f", r.approx_nats) +
             " rel=" + fmt("%.3e", r.relative_error) + " rel(1e-4)=" + fmt("%.3e", last);
  return o;
}

Outcome commuting_conservation() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dims(2, 128);
  const double times[] = {0.1, 1.0, 10.0};
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = dims(rng);
    const SpaceLayout l({Factor::discrete("s", static_cast<std::size_t>(n))});
    const auto pair = oracle::commuting_pair(n, rng);
    const auto h = HermitianOperator::dense(l, pair.h);
    const auto q = HermitianOperator::dense(l, pair.q);
    const SpectralPropagator prop(h, l);
    const auto psi = oracle::random_state(l, rng);
    const double q0 = expectation(q, psi);
    for (double t : times) worst = std::max(worst, std::abs(expectation(q, prop.evolve(psi, t)) - q0));
  }
  int drifting = 0;
  double weakest = 1e300;
  for (int k = 0; k < 20; ++k) {
    const int n = dims(rng);
    const SpaceLayout l({Factor::discrete("s", static_cast<std::size_t>(n))});
    const auto h = HermitianOperator::dense(l, oracle::random_hermitian(n, rng));
    const auto q = HermitianOperator::dense(l, oracle::random_hermitian(n, rng));
    const SpectralPropagator prop(h, l);
    const auto psi = oracle::random_state(l, rng);
    const double q0 = expectation(q, psi);
    double best = 0.0;
    for (double t : times) best = std::max(best, std::abs(expectation(q, prop.evolve(psi, t)) - q0));
    weakest = std::min(weakest, best);
    drifting += best > 1e-4 ? 1 : 0;
  }
  return {worst <= 1e-9 && drifting == 20,
          "commuting max drift " + fmt("%.2e", worst) + ", non-commuting " + std::to_string(drifting) +
              "/20 drift (smallest " + fmt("%.2e", weakest) + ")"};
}

Outcome free_packet() {
  Outcome o;
  const GaussianPacketSpec spec;
  const auto psi0 = gaussian_packet(spec.grid, spec.a);
  const auto x2 = grid_function(spec.grid, [](double x) { return x * x; });
  const RealVector v = RealVector::Zero(static_cast<Eigen::Index>(spec.grid.points));
  double worst_rel = 0.0;
  for (double t : {1.0, 2.0, 5.0}) {
    const auto psi = evolve_split_step(spec.mass, v, psi0, t, spec.steps);
    const double ref = oracle::free_gaussian_width_sq(spec.a, spec.mass, t);
    worst_rel = std::max(worst_rel, std::abs(expectation(x2, psi) - ref) / ref);
  }
  const auto rep = run_free_packet(spec);
  const EntrySeries* p = find_entry(rep.ledger, "momentum");
  const double p_drift = p ? p->drift : 1.0;
  const auto ref = oracle::free_packet_segment_momentum(spec.a, spec.mass, spec.detect_time,
                                                        spec.window_center - 0.5 * spec.window_width,
                                                        spec.window_center + 0.5 * spec.window_width);
  const double bound = std::abs(ref.mean - rep.predicted_momentum) + ref.spread;
  o.pass = worst_rel <= 1e-5 && p_drift <= 1e-12 && std::abs(rep.global_momentum_at_detection) <= 1e-12 &&
           bound <= 2.0 / spec.window_width && std::abs(rep.momentum_difference) <= bound;
  o.detail = "<x^2> rel err " + fmt("%.2e", worst_rel) + ", p drift " + fmt("%.2e", p_drift) + ", segment <p> " +
             fmt("%.6f", rep.segment_momentum) + " vs 0.5 (|diff| " + fmt("%.4f", std::abs(rep.momentum_difference)) +
             " <= oracle bound " + fmt("%.4f", bound) + ")";
  return o;
}

Outcome stern_gerlach() {
  const auto rep = run_stern_gerlach(SternGerlachSpec{});
  double worst_pair = 0.0;
  double worst_total = 0.0;
  for (const auto& b : rep.branches) {
    worst_pair = std::max(worst_pair, std::abs(b.particle_delta + b.apparatus_delta));
    worst_total = std::max(worst_total, std::abs(b.total_change));
  }
  const bool ok = rep.branches.size() == 2 && rep.momentum_drift <= 1e-10 && worst_pair <= 1e-9 &&
                  worst_total <= 1e-9 && std::abs(rep.post_sigma_x) <= 1e-9;
  return {ok, "p_z drift " + fmt("%.2e", rep.momentum_drift) + ", |dp_part + dp_app| " + fmt("%.2e", worst_pair) +
                  ", branch total change " + fmt("%.2e", worst_total) + ", post <sigma_x> " +
                  fmt("%.2e", rep.post_sigma_x)};
}

Outcome mach_zehnder() {
  const MachZehnderSpec spec;
  const auto rep = run_mach_zehnder(spec);
  const double eps_ref = 1.0 - oracle::gaussian_overlap(spec.kick, spec.apparatus_sigma_p);
  double worst = 0.0;
  for (const auto& b : rep.branches) worst = std::max(worst, std::abs(b.change_from_pre_interaction));
  const double rel = std::abs(rep.epsilon - eps_ref) / eps_ref;
  const bool ok = rel <= 0.01 && rep.collapsed_fidelity >= 1.0 - 1e-9 && worst <= 1e-9 && !rep.branches.empty();
  return {ok, "eps " + fmt("%.6e", rep.epsilon) + " (oracle " + fmt("%.6e", eps_ref) + ", rel " + fmt("%.1e", rel) +
                  "), fidelity " + fmt("%.15f", rep.collapsed_fidelity) + ", branch total change " +
                  fmt("%.1e", worst)};
}

Outcome apr_box() {
  const APRBoxSpec spec;
  const auto rep = run_apr_box(spec);
  APRBoxSpec control = spec;
  control.target_wavenumber = 10.0 * std::numbers::pi;
  const auto ctl = run_apr_box(control);
  double drift = 0.0;
  for (const auto* r : {&rep.ledger, &ctl.ledger}) {
    for (const auto& e : r->entries) {
      if (e.tag == "conserved") drift = std::max(drift, e.drift);
    }
  }
  drift = std::max({drift, rep.preparation_energy_drift, ctl.preparation_energy_drift});
  const bool ok = rep.design.achieved_local_wavenumber >= 0.9 * spec.target_wavenumber &&
                  rep.inside_energy > rep.band_limit_energy && rep.p_in < 1e-2 && !ctl.high_energy &&
                  rep.energy_audit.difference != 0.0 &&
                  rep.energy_audit.classification() == "non-commuting projector" && drift <= 1e-9;
  return {ok, "k_loc/k_s " + fmt("%.4f", rep.design.achieved_local_wavenumber / spec.target_wavenumber) +
                  ", p_in " + fmt("%.6e", rep.p_in) + ", E_in " + fmt("%.4f", rep.inside_energy) + " > E_N " +
                  fmt("%.2f", rep.band_limit_energy) + ", control E_in " + fmt("%.2f", ctl.inside_energy) +
                  ", audit " + fmt("%.3e", rep.energy_audit.difference) + " (" +
                  rep.energy_audit.classification() + "), unitary drift " + fmt("%.1e", drift)};
}

ProjectorSet random_projectors(std::size_t d, std::mt19937_64& rng, ComplexMatrix& basis) {
  basis = oracle::haar_unitary(static_cast<Eigen::Index>(d), rng);
  std::uniform_int_distribution<std::size_t> outcomes_dist(2, d);
  const std::size_t k = outcomes_dist(rng);
  std::vector<std::size_t> owner(d);
  for (std::size_t i = 0; i < d; ++i) owner[i] = i < k ? i : std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
  std::vector<std::string> labels;
  std::vector<HermitianOperator> ps;
  for (std::size_t o = 0; o < k; ++o) {
    ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (owner[i] == o) p += basis.col(static_cast<Eigen::Index>(i)) * basis.col(static_cast<Eigen::Index>(i)).adjoint();
    }
    labels.push_back("o" + std::to_string(o));
    ps.push_back(HermitianOperator::dense(0.5 * (p + p.adjoint())).on("m"));
  }
  return ProjectorSet(labels, ps);
}

Outcome measurement_axioms() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<std::size_t> dims(2, 12);
  std::uniform_int_distribution<std::size_t> spectators(2, 4);
  double born = 0.0;
  double repeat = 0.0;
  int audits = 0;
  int audit_failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = dims(rng);
    const SpaceLayout l({Factor::discrete("m", d), Factor::discrete("e", spectators(rng))});
    ComplexMatrix basis;
    const ProjectorSet ps = random_projectors(d, rng, basis);
    const auto psi = oracle::random_state(l, rng);
    const auto branches = measure(psi, ps);
    double total = 0.0;
    for (const auto& b : branches) total += b.probability;
    born = std::max(born, std::abs(total - 1.0));
    for (std::size_t i = 0; i < branches.size(); ++i) {
      if (branches[i].is_null()) continue;
      const auto again = measure(*branches[i].state, ps);
      repeat = std::max(repeat, std::abs(again[i].probability - 1.0));
    }
    // Q diagonal in the measurement basis, so it commutes with every projector
    std::uniform_real_distribution<double> eig(-1.0, 1.0);
    RealVector spectrum(static_cast<Eigen::Index>(d));
    for (auto& x : spectrum) x = eig(rng);
    const ComplexMatrix qm = basis * spectrum.cast<Complex>().asDiagonal() * basis.adjoint();
    const auto q = HermitianOperator::dense(0.5 * (qm + qm.adjoint())).on("m");
    const auto audit = total_expectation_audit(psi, ps, q);
    ++audits;
    if (!audit.commuting || std::abs(audit.difference) > 1e-10) ++audit_failures;
  }
  return {born <= 1e-12 && repeat <= 1e-10 && audit_failures == 0,
          "Born sum dev " + fmt("%.1e", born) + ", repeatability dev " + fmt("%.1e", repeat) + ", commuting audits " +
              std::to_string(audits - audit_failures) + "/" + std::to_string(audits)};
}

Outcome structure_dependence() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dims(2, 8);
  double local = 0.0;
  double residual = 0.0;
  double smallest_start = 1e300;
  for (int k = 0; k < 100; ++k) {
    const std::size_t da = dims(rng);
    const std::size_t db = dims(rng);
    const SpaceLayout l({Factor::discrete("A", da), Factor::discrete("B", db)});
    const auto psi = oracle::random_state(l, rng);
    const Bipartition cut{1};
    const double s0 = entropy(psi, cut);
    smallest_start = std::min(smallest_start, s0);
    const auto ua = embed_unitary(oracle::haar_unitary(static_cast<Eigen::Index>(da), rng), l, "A");
    const auto ub = embed_unitary(oracle::haar_unitary(static_cast<Eigen::Index>(db), rng), l, "B");
    local = std::max(local, std::abs(entropy(ub.apply(ua.apply(psi)), cut) - s0));
    residual = std::max(residual, entropy(disentangling_unitary(psi, cut).apply(psi), cut));
  }
  return {local <= 1e-9 && residual <= 1e-8 && smallest_start > 1e-3,
          "local-unitary entropy change " + fmt("%.1e", local) + ", entropy after disentangler " +
              fmt("%.1e", residual) + " (smallest initial " + fmt("%.3f", smallest_start) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  std::random_device rd;
  const fs::path root = fs::temp_directory_path() / ("qconserve_acceptance_" + std::to_string(rd()));
  fs::create_directories(root);
  Outcome o;
  for (const char* scenario : {"mach_zehnder", "free_packet", "stern_gerlach", "apr_box"}) {
    const fs::path cfg = root / (std::string(scenario) + ".json");
    std::ofstream(cfg) << nlohmann::json{{"scenario", scenario}, {"seed", 12345}, {"parameters", nlohmann::json::object()}}.dump();
    std::size_t hashes[2] = {0, 0};
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = root / (std::string(scenario) + "_" + std::to_string(run));
      std::ostringstream sink;
      std::ostringstream err;
      const int status = cli::run_command({cfg.string(), out.string(), std::nullopt}, sink, err);
      ran = ran && status == 0;
      hashes[run] = std::hash<std::string>{}(slurp(out / "report.json"));
    }
    const bool same = ran && hashes[0] == hashes[1];
    o.pass = o.pass && same;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + scenario + (same ? " identical" : " DIFFERS");
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  Criteria c;
  c.run(1, "entropy approximation", 1.0, entropy_approximation);
  c.run(2, "commutator conservation", 30.0, commuting_conservation);
  c.run(3, "free packet", 60.0, free_packet);
  c.run(4, "stern-gerlach ledger", 5.0, stern_gerlach);
  c.run(5, "mach-zehnder", 5.0, mach_zehnder);
  c.run(6, "apr box", 60.0, apr_box);
  c.run(7, "measurement axioms", 30.0, measurement_axioms);
  c.run(8, "structure dependence", 10.0, structure_dependence);
  // two runs of every scenario, held to the sum of the scenario limits
  c.run(9, "cli determinism", 2.0 * (60.0 + 5.0 + 5.0 + 60.0), cli_determinism);
  std::printf("%d of 9 criteria failed\n", c.failures());
  return c.failures() == 0 ? 0 : 1;
}
