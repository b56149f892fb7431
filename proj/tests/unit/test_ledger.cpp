#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qconserve/dynamics.hpp"
#include "qconserve/error.hpp"
#include "qconserve/ledger.hpp"
#include "support/oracles.hpp"

using namespace qconserve;
using Catch::Approx;

namespace {

SpaceLayout qubits(std::initializer_list<const char*> labels) {
  std::vector<Factor> f;
  for (const char* l : labels) f.push_back(Factor::discrete(l, 2));
  return SpaceLayout(f);
}

// sigma+ sigma- + h.c. on two qubits
ComplexMatrix flip_flop() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(1, 2) = m(2, 1) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("register tags conserved and non-conserved entries", "[ledger]") {
  const GridSpec g{256, 40.0, true};
  const SpaceLayout l({Factor::on_grid("x", g)});
  const auto ops = grid_operators(g, 1.0);
  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("momentum", l, {{"x", ops.momentum}}), ops.kinetic);
  ledger.track(LedgerEntry::sum_form("position", l, {{"x", ops.position}}), ops.kinetic);
  CHECK(ledger.entry("momentum").tag() == "conserved");
  CHECK(ledger.entry("position").tag() == "not conserved under H");
  CHECK_THROWS_AS(ledger.track(LedgerEntry::sum_form("momentum", l, {{"x", ops.momentum}}), ops.kinetic),
                  ValidationError);
}

TEST_CASE("total sigma_z commutes with a flip-flop exchange", "[ledger]") {
  const SpaceLayout l = qubits({"a", "b"});
  const ComplexMatrix z = pauli_z().to_dense();
  const ComplexMatrix total = oracle::kron(z, ComplexMatrix::Identity(2, 2)) + oracle::kron(ComplexMatrix::Identity(2, 2), z);
  const ComplexMatrix h = flip_flop();
  CHECK((h * total - total * h).norm() == 0.0);  // explicit oracle

  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("sigma_z", l, {{"a", pauli_z()}, {"b", pauli_z()}}), HermitianOperator::dense(l, h));
  ledger.track(LedgerEntry::sum_form("sigma_x", l, {{"a", pauli_x()}, {"b", pauli_x()}}), HermitianOperator::dense(l, h + ComplexMatrix(oracle::kron(z, ComplexMatrix::Identity(2, 2)))));
  CHECK(ledger.entry("sigma_z").conserved());
  CHECK(ledger.entry("sigma_z").commutator_with_h <= 1e-10);
  CHECK_FALSE(ledger.entry("sigma_x").conserved());
}

TEST_CASE("inconsistent sum-form entries are rejected", "[ledger]") {
  const SpaceLayout l = qubits({"a", "b"});
  LedgerEntry e = LedgerEntry::sum_form("bad", l, {{"a", pauli_z()}});
  e.local_terms.push_back({"b", pauli_z()});
  ConservationLedger ledger;
  CHECK_THROWS_AS(ledger.track(e, HermitianOperator::zero(l)), ValidationError);

  LedgerEntry with_cross = LedgerEntry::sum_form("energy", l, {{"a", pauli_z()}, {"b", pauli_z()}});
  with_cross.interaction = HermitianOperator::dense(l, flip_flop());
  with_cross.observable += *with_cross.interaction;
  CHECK_NOTHROW(ledger.track(with_cross, HermitianOperator::zero(l)));
}

TEST_CASE("snapshots are additive across factors", "[ledger]") {
  std::mt19937_64 rng(3);
  const SpaceLayout l({Factor::discrete("a", 3), Factor::discrete("b", 4)});
  const auto qa = HermitianOperator::dense(oracle::random_hermitian(3, rng));
  const auto qb = HermitianOperator::dense(oracle::random_hermitian(4, rng));
  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("q", l, {{"a", qa}, {"b", qb}}), HermitianOperator::zero(l));
  const SpaceLayout la({Factor::discrete("a", 3)});
  const SpaceLayout lb({Factor::discrete("b", 4)});
  const auto prod = tensor(oracle::random_state(la, rng), oracle::random_state(lb, rng));
  const auto ent = oracle::random_state(l, rng);
  ledger.snapshot(0.0, prod);
  ledger.snapshot(1.0, ent);
  const auto rep = ledger.report();
  REQUIRE(rep.entries.size() == 1);
  for (const auto& s : rep.entries[0].samples) {
    CHECK(std::abs(s.global - s.per_factor.at("a") - s.per_factor.at("b")) <= 1e-10);
  }
  // a single-entry report with zero-H commutator counts as conserved; no unitary ran between samples here
  ConservationLedger single;
  single.track(LedgerEntry::sum_form("q", l, {{"a", qa}, {"b", qb}}), HermitianOperator::zero(l));
  single.snapshot(0.0, ent);
  CHECK(single.report().max_unitary_drift == 0.0);
}

TEST_CASE("measurement in a commuting basis keeps branch bookkeeping exact", "[ledger]") {
  std::mt19937_64 rng(41);
  const SpaceLayout l({Factor::discrete("a", 3), Factor::discrete("b", 2)});
  const auto qa = HermitianOperator::diagonal((RealVector(3) << -1.0, 0.0, 2.0).finished());
  const auto qb = pauli_z();
  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("q", l, {{"a", qa}, {"b", qb}}), HermitianOperator::zero(l));
  const auto psi = oracle::random_state(l, rng);
  const auto ps = on_factor(basis_projectors(3, {"0", "1", "2"}), "a");
  const auto branches = measure(psi, ps);
  ledger.snapshot(0.0, psi);
  ledger.record_measurement("m", branches, psi, &ps);
  const auto rep = ledger.report();
  REQUIRE(rep.events.size() == 1);
  const auto& rec = rep.events[0].entries.at(0);
  CHECK(std::abs(rec.audit_difference) <= 1e-12);
  CHECK(rec.classification.value() == "commuting");
  double weighted = 0.0;
  double psum = 0.0;
  for (const auto& b : rec.branches) {
    CHECK(b.offset_residual <= 1e-9);
    weighted += b.probability * b.global;
    psum += b.probability;
  }
  CHECK(std::abs(psum - 1.0) <= 1e-12);
  CHECK(weighted == Approx(rec.baseline_global).margin(1e-12));
  for (double r : rep.branch_offset_residuals) CHECK(r <= 1e-9);
}

TEST_CASE("report drift over free evolution", "[ledger]") {
  const GridSpec g{512, 60.0, true};
  const SpaceLayout l({Factor::on_grid("x", g)});
  ComplexVector v(512);
  for (std::size_t j = 0; j < g.points; ++j) {
    const double x = g.coordinate(j);
    v[static_cast<Eigen::Index>(j)] = std::exp(-x * x / 4.0) * std::polar(1.0, 0.8 * x);
  }
  const StateVector psi0 = StateVector(l, v).normalized();
  const auto ops = grid_operators(g, 1.0);
  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("momentum", l, {{"x", ops.momentum}}), ops.kinetic);
  ledger.track(LedgerEntry::sum_form("position", l, {{"x", ops.position}}), ops.kinetic);
  ledger.snapshot(0.0, psi0);
  EvolutionPlan plan{ops.kinetic, 3.0, 6, EvolutionMethod::exact};
  evolve(plan, psi0, [&](double t, const StateVector& s) { ledger.snapshot(t, s); });
  const auto rep = ledger.report();
  CHECK(rep.max_unitary_drift <= 1e-9);
  const auto& pos = rep.entries[1];
  REQUIRE(pos.name == "position");
  CHECK(pos.samples.size() == 7);
  CHECK(pos.drift == Approx(0.8 * 3.0).epsilon(1e-6));  // the packet moves by k t / m
  CHECK(rep.max_unitary_drift < pos.drift);
}
