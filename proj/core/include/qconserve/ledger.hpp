#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qconserve/measurement.hpp"
#include "qconserve/operators.hpp"
#include "qconserve/state.hpp"

namespace qconserve {

/// Part of a sum-form observable living on one factor.
struct LocalTerm {
  std::string factor;
  HermitianOperator observable;  // local, acting on `factor`
};

/// An observable tracked by the ledger.
///
/// When `local_terms` is non-empty, their embedded sum plus the optional
/// `interaction` remainder must reproduce `observable` to 1e-9 (Frobenius).
/// Per-factor values are then attributed term by term and the remainder is
/// reported under the "interaction" key.
struct LedgerEntry {
  static constexpr double conserved_tolerance = 1e-10;

  std::string name;
  HermitianOperator observable;
  std::vector<LocalTerm> local_terms;
  std::optional<HermitianOperator> interaction;
  double commutator_with_h = 0.0;

  /// Observable built as the embedded sum of per-factor terms.
  static LedgerEntry sum_form(std::string name, const SpaceLayout& layout, std::vector<LocalTerm> terms);
  static LedgerEntry plain(std::string name, HermitianOperator observable);

  [[nodiscard]] bool conserved() const { return commutator_with_h <= conserved_tolerance; }
  /// "conserved" or "not conserved under H".
  [[nodiscard]] std::string tag() const { return conserved() ? "conserved" : "not conserved under H"; }
  [[nodiscard]] bool is_sum_form() const { return !local_terms.empty(); }
};

struct LedgerSample {
  double t = 0.0;
  double global = 0.0;
  std::map<std::string, double> per_factor;
};

struct BranchAudit {
  std::string label;
  double probability = 0.0;
  bool null_branch = false;
  double global = 0.0;
  std::map<std::string, double> per_factor;
  std::map<std::string, double> deltas;  // branch minus baseline, per factor
  double global_delta = 0.0;
  double offset_residual = 0.0;  // |sum of factor deltas - global delta|
  std::optional<double> change_from_pre_interaction;
};

struct EntryMeasurementRecord {
  std::string entry;
  double baseline_global = 0.0;
  std::map<std::string, double> baseline_per_factor;
  std::optional<double> pre_interaction_global;
  double audit_difference = 0.0;  // sum_i p_i <Q>_i - <Q>_baseline
  std::optional<std::string> classification;
  std::vector<BranchAudit> branches;
};

struct MeasurementEvent {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> probabilities;
  std::vector<EntryMeasurementRecord> entries;
};

struct EntrySeries {
  std::string name;
  std::string tag;
  double commutator_with_h = 0.0;
  std::vector<std::string> factors;
  std::vector<LedgerSample> samples;
  double drift = 0.0;  // max |<Q>(t) - <Q>(t0)|
};

struct ConservationReport {
  std::vector<EntrySeries> entries;  // sorted by name, samples by time
  std::vector<MeasurementEvent> events;
  double max_unitary_drift = 0.0;
  std::vector<double> branch_offset_residuals;
};

/// Observer that records conserved-quantity bookkeeping for one run. It
/// never modifies the states it is shown.
class ConservationLedger {
 public:
  /// Stores the entry with its commutator against `h`; throws ValidationError
  /// on a duplicate name or an inconsistent sum-form decomposition.
  void track(LedgerEntry entry, const HermitianOperator& h);

  void snapshot(double t, const StateVector& psi);

  /// Per-branch attribution relative to `baseline` (the state that was
  /// measured). `projectors` adds the audit classification and
  /// `pre_interaction` the change against the state before any coupling.
  void record_measurement(const std::string& name, std::span<const Branch> branches, const StateVector& baseline,
                          const ProjectorSet* projectors = nullptr, const StateVector* pre_interaction = nullptr);

  [[nodiscard]] ConservationReport report() const;

  [[nodiscard]] const LedgerEntry& entry(const std::string& name) const;
  [[nodiscard]] std::size_t size() const { return tracked_.size(); }

 private:
  struct Tracked {
    LedgerEntry entry;
    std::vector<LedgerSample> samples;
  };

  [[nodiscard]] LedgerSample evaluate(const Tracked& t, double time, const StateVector& psi) const;

  std::vector<Tracked> tracked_;
  std::vector<MeasurementEvent> events_;
};

}  // namespace qconserve
