#include "qconserve/ledger.hpp"

#include <algorithm>
#include <cmath>

#include "qconserve/error.hpp"

namespace qconserve {

namespace {

constexpr const char* interaction_key = "interaction";

}  // namespace

LedgerEntry LedgerEntry::sum_form(std::string name, const SpaceLayout& layout, std::vector<LocalTerm> terms) {
  if (terms.empty()) throw ValidationError("sum-form entry '" + name + "' needs at least one local term");
  HermitianOperator total = HermitianOperator::zero(layout);
  for (const auto& t : terms) total += embed(t.observable, layout, t.factor);
  return LedgerEntry{std::move(name), std::move(total), std::move(terms), std::nullopt, 0.0};
}

LedgerEntry LedgerEntry::plain(std::string name, HermitianOperator observable) {
  return LedgerEntry{std::move(name), std::move(observable), {}, std::nullopt, 0.0};
}

void ConservationLedger::track(LedgerEntry entry, const HermitianOperator& h) {
  if (entry.name.empty()) throw ValidationError("ledger entries need a name");
  for (const auto& t : tracked_) {
    if (t.entry.name == entry.name) throw ValidationError("duplicate ledger entry '" + entry.name + "'");
  }
  if (entry.observable.is_local()) throw LayoutError("ledger observables must have full-layout scope");
  const SpaceLayout& layout = *entry.observable.layout();
  if (entry.is_sum_form()) {
    HermitianOperator rebuilt = HermitianOperator::zero(layout);
    for (const auto& t : entry.local_terms) rebuilt += embed(t.observable, layout, t.factor);
    if (entry.interaction) rebuilt += in_layout(*entry.interaction, layout);
    if (frobenius_norm(rebuilt - entry.observable) > 1e-9) {
      throw ValidationError("local terms of '" + entry.name + "' do not add up to its observable");
    }
  }
  entry.commutator_with_h = commutator_norm(in_layout(h, layout), entry.observable);
  tracked_.push_back(Tracked{std::move(entry), {}});
}

LedgerSample ConservationLedger::evaluate(const Tracked& t, double time, const StateVector& psi) const {
  LedgerSample s;
  s.t = time;
  s.global = expectation(t.entry.observable, psi);
  for (const auto& term : t.entry.local_terms) {
    s.per_factor[term.factor] += expectation(embed(term.observable, psi.layout(), term.factor), psi);
  }
  if (t.entry.interaction) s.per_factor[interaction_key] = expectation(*t.entry.interaction, psi);
  return s;
}

void ConservationLedger::snapshot(double t, const StateVector& psi) {
  require_normalized(psi, "ledger snapshot");
  for (auto& tracked : tracked_) tracked.samples.push_back(evaluate(tracked, t, psi));
}

void ConservationLedger::record_measurement(const std::string& name, std::span<const Branch> branches,
                                            const StateVector& baseline, const ProjectorSet* projectors,
                                            const StateVector* pre_interaction) {
  require_normalized(baseline, "record_measurement baseline");
  MeasurementEvent event;
  event.name = name;
  for (const auto& b : branches) {
    if (!b.is_null() && !(b.state->layout() == baseline.layout())) {
      throw LayoutError("branch '" + b.label + "' lives on a different layout than the baseline");
    }
    event.labels.push_back(b.label);
    event.probabilities.push_back(b.probability);
  }
  if (pre_interaction && !(pre_interaction->layout() == baseline.layout())) {
    throw LayoutError("pre-interaction state lives on a different layout than the baseline");
  }

  for (const auto& tracked : tracked_) {
    const auto& entry = tracked.entry;
    EntryMeasurementRecord rec;
    rec.entry = entry.name;
    const LedgerSample base = evaluate(tracked, 0.0, baseline);
    rec.baseline_global = base.global;
    rec.baseline_per_factor = base.per_factor;
    if (pre_interaction) rec.pre_interaction_global = expectation(entry.observable, *pre_interaction);

    double weighted = 0.0;
    for (const auto& b : branches) {
      BranchAudit audit;
      audit.label = b.label;
      audit.probability = b.probability;
      if (b.is_null()) {
        audit.null_branch = true;
        rec.branches.push_back(std::move(audit));
        continue;
      }
      const LedgerSample v = evaluate(tracked, 0.0, *b.state);
      audit.global = v.global;
      audit.per_factor = v.per_factor;
      audit.global_delta = v.global - base.global;
      double sum = 0.0;
      for (const auto& [factor, value] : v.per_factor) {
        const double d = value - base.per_factor.at(factor);
        audit.deltas[factor] = d;
        sum += d;
      }
      audit.offset_residual = entry.is_sum_form() ? std::abs(sum - audit.global_delta) : 0.0;
      if (rec.pre_interaction_global) audit.change_from_pre_interaction = v.global - *rec.pre_interaction_global;
      weighted += b.probability * v.global;
      rec.branches.push_back(std::move(audit));
    }
    rec.audit_difference = weighted - base.global;
    if (projectors) {
      bool commuting = true;
      for (const auto& p : projectors->projectors()) {
        commuting = commuting &&
                    commutator_norm(entry.observable, in_layout(p, baseline.layout())) <= AuditRecord::commuting_tolerance;
      }
      rec.classification = commuting ? "commuting" : "non-commuting projector";
    }
    event.entries.push_back(std::move(rec));
  }
  events_.push_back(std::move(event));
}

ConservationReport ConservationLedger::report() const {
  if (tracked_.empty()) throw ValidationError("ledger has no entries");
  if (tracked_.front().samples.empty()) throw ValidationError("ledger has no snapshots");
  ConservationReport out;
  for (const auto& t : tracked_) {
    EntrySeries series;
    series.name = t.entry.name;
    series.tag = t.entry.tag();
    series.commutator_with_h = t.entry.commutator_with_h;
    for (const auto& term : t.entry.local_terms) {
      if (std::find(series.factors.begin(), series.factors.end(), term.factor) == series.factors.end()) {
        series.factors.push_back(term.factor);
      }
    }
    if (t.entry.interaction) series.factors.emplace_back(interaction_key);
    series.samples = t.samples;
    std::stable_sort(series.samples.begin(), series.samples.end(),
                     [](const LedgerSample& a, const LedgerSample& b) { return a.t < b.t; });
    const double start = t.samples.front().global;
    for (const auto& s : t.samples) series.drift = std::max(series.drift, std::abs(s.global - start));
    if (t.entry.conserved()) out.max_unitary_drift = std::max(out.max_unitary_drift, series.drift);
    out.entries.push_back(std::move(series));
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const EntrySeries& a, const EntrySeries& b) { return a.name < b.name; });
  out.events = events_;
  for (const auto& e : events_) {
    for (const auto& rec : e.entries) {
      for (const auto& b : rec.branches) {
        if (!b.null_branch) out.branch_offset_residuals.push_back(b.offset_residual);
      }
    }
  }
  return out;
}

const LedgerEntry& ConservationLedger::entry(const std::string& name) const {
  for (const auto& t : tracked_) {
    if (t.entry.name == name) return t.entry;
  }
  throw ValidationError("no ledger entry named '" + name + "'");
}

}  // namespace qconserve
