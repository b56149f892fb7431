#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qconserve/dynamics.hpp"
#include "qconserve/error.hpp"
#include "qconserve/measurement.hpp"
#include "support/oracles.hpp"

using namespace qconserve;
using Catch::Approx;

namespace {

SpaceLayout qubits(std::initializer_list<const char*> labels) {
  std::vector<Factor> f;
  for (const char* l : labels) f.push_back(Factor::discrete(l, 2));
  return SpaceLayout(f);
}

StateVector packet(const GridSpec& g, double a, double center) {
  ComplexVector v(static_cast<Eigen::Index>(g.points));
  for (std::size_t j = 0; j < g.points; ++j) {
    const double x = g.coordinate(j) - center;
    v[static_cast<Eigen::Index>(j)] = std::exp(-x * x / (4.0 * a * a));
  }
  return StateVector(SpaceLayout({Factor::on_grid("x", g)}), v).normalized();
}

}  // namespace

TEST_CASE("projector sets are checked", "[measurement]") {
  const auto p0 = HermitianOperator::diagonal((RealVector(2) << 1.0, 0.0).finished());
  const auto p1 = HermitianOperator::diagonal((RealVector(2) << 0.0, 1.0).finished());
  const auto half = HermitianOperator::diagonal((RealVector(2) << 0.5, 0.0).finished());
  CHECK_NOTHROW(ProjectorSet({"0", "1"}, {p0, p1}));
  CHECK_THROWS_AS(ProjectorSet({"0"}, {p0}), ValidationError);              // incomplete
  CHECK_THROWS_AS(ProjectorSet({"0", "1"}, {p0, p0}), ValidationError);     // overlapping
  CHECK_THROWS_AS(ProjectorSet({"h", "1"}, {half, p1}), ValidationError);   // not idempotent
  CHECK_THROWS_AS(ProjectorSet({"0", "1", "2"}, {p0, p1}), ValidationError);
}

TEST_CASE("z-basis measurements", "[measurement]") {
  const SpaceLayout one({Factor::discrete("s", 2)});
  const auto z = spin_projectors(0.0, 0.0);
  const auto up = measure(StateVector::basis(one, 0), z);
  REQUIRE(up.size() == 2);
  CHECK(up[0].label == "up");
  CHECK(up[0].probability == Approx(1.0));
  CHECK(up[1].is_null());

  const double s = 1.0 / std::sqrt(2.0);
  const auto half = measure(StateVector(one, (ComplexVector(2) << s, s).finished()), z);
  CHECK(half[0].probability == Approx(0.5));
  CHECK(half[1].probability == Approx(0.5));
  CHECK(half[1].state->is_normalized());
}

TEST_CASE("singlet outcomes are anticorrelated along any shared axis", "[measurement]") {
  ComplexVector v = ComplexVector::Zero(4);
  v[1] = 1.0 / std::sqrt(2.0);
  v[2] = -1.0 / std::sqrt(2.0);
  const StateVector singlet(qubits({"a", "b"}), v);
  for (const auto& [theta, phi] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {1.1, 0.4}, {2.5, -2.0}}) {
    const std::vector<ProjectorSet> sets{on_factor(spin_projectors(theta, phi), "a"),
                                         on_factor(spin_projectors(theta, phi), "b")};
    const auto branches = measure_joint(singlet, sets);
    REQUIRE(branches.size() == 4);
    for (const auto& b : branches) {
      const double expected = (b.label == "up,down" || b.label == "down,up") ? 0.5 : 0.0;
      CHECK(b.probability == Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("window projectors on a grid", "[measurement]") {
  const GridSpec g{1024, 40.0, true};
  const auto psi = packet(g, 1.0, 0.0);
  const auto& l = psi.layout();
  const auto all = measure(psi, window_projector(g, -20.0, 20.0, l, "x"));
  CHECK(all[0].probability == Approx(1.0).epsilon(1e-14));
  const auto far = measure(packet(g, 0.3, -10.0), window_projector(g, 5.0, 15.0, l, "x"));
  CHECK(far[0].probability < 1e-10);

  // quadrature oracle of |psi|^2 over [-1, 1] against erf(1/sqrt2)
  const double continuum = oracle::simpson([](double x) { return std::exp(-x * x / 2.0); }, -1.0, 1.0) /
                           std::sqrt(2.0 * std::numbers::pi);
  CHECK(continuum == Approx(0.6826894921370859).epsilon(1e-12));
  // the grid window covers whole cells around the points with |x| <= 1
  double discrete = 0.0;
  double edge = 0.0;
  for (std::size_t j = 0; j < g.points; ++j) {
    const double x = g.coordinate(j);
    if (std::abs(x) > 1.0) continue;
    discrete += std::exp(-x * x / 2.0) * g.spacing() / std::sqrt(2.0 * std::numbers::pi);
    edge = std::max(edge, std::abs(x) + 0.5 * g.spacing());
  }
  const double cells = oracle::simpson([](double x) { return std::exp(-x * x / 2.0); }, -edge, edge) /
                       std::sqrt(2.0 * std::numbers::pi);
  const auto mid = measure(psi, window_projector(g, -1.0, 1.0, l, "x"));
  CHECK(mid[0].probability == Approx(discrete).epsilon(1e-10));
  CHECK(mid[0].probability == Approx(cells).epsilon(1e-4));
  CHECK(std::abs(mid[0].probability - continuum) <= g.spacing() * 0.25);
  CHECK_THROWS_AS(window_projector(g, 0.001, 0.002, l, "x"), ValidationError);
}

TEST_CASE("total expectation audit", "[measurement]") {
  std::mt19937_64 rng(12);
  const SpaceLayout l({Factor::discrete("a", 3), Factor::discrete("b", 4)});
  const auto psi = oracle::random_state(l, rng);
  const auto ps = on_factor(basis_projectors(3, {"0", "1", "2"}), "a");
  const auto audit_identity = total_expectation_audit(psi, ps, HermitianOperator::dense(l, ComplexMatrix::Identity(12, 12)));
  CHECK(audit_identity.difference == 0.0);
  CHECK(audit_identity.classification() == "commuting");

  const auto diag = embed(HermitianOperator::diagonal((RealVector(3) << -1.0, 0.5, 2.0).finished()), l, "a");
  const auto d = total_expectation_audit(psi, ps, diag);
  CHECK(std::abs(d.difference) <= 1e-12);
  CHECK(d.commuting);

  // momentum against a position window: the apparent violation
  const GridSpec g{1024, 60.0, true};
  ComplexVector v(1024);
  for (std::size_t j = 0; j < g.points; ++j) {
    const double x = g.coordinate(j);
    v[static_cast<Eigen::Index>(j)] = std::exp(-x * x / 16.0) * std::polar(1.0, 0.05 * x * x);
  }
  const StateVector chirp = StateVector(SpaceLayout({Factor::on_grid("x", g)}), v).normalized();
  const auto win = window_projector(g, 1.0, 3.0, chirp.layout(), "x");
  const auto p = total_expectation_audit(chirp, win, grid_operators(g, 1.0).momentum);
  CHECK(std::abs(p.difference) > 1e-6);
  CHECK(p.classification() == "non-commuting projector");
}

TEST_CASE("audit difference equals the branch-weighted sum minus the mean", "[measurement]") {
  std::mt19937_64 rng(31);
  const SpaceLayout l({Factor::discrete("a", 4), Factor::discrete("b", 3)});
  const auto psi = oracle::random_state(l, rng);
  const auto q = HermitianOperator::dense(l, oracle::random_hermitian(12, rng));
  const auto ps = on_factor(basis_projectors(4, {"0", "1", "2", "3"}), "a");
  const auto rec = total_expectation_audit(psi, ps, q);
  double weighted = 0.0;
  for (const auto& b : measure(psi, ps)) weighted += b.probability * expectation(q, *b.state);
  CHECK(rec.branch_weighted == Approx(weighted).epsilon(1e-12));
  CHECK(rec.difference == Approx(weighted - expectation(q, psi)).margin(1e-12));
  CHECK_FALSE(rec.commuting);
}

TEST_CASE("sampling follows Born weights", "[measurement]") {
  std::mt19937_64 rng(2024);
  std::vector<Branch> b{{"a", 0.25, std::nullopt}, {"b", 0.75, std::nullopt}};
  int count_b = 0;
  for (int i = 0; i < 4000; ++i) count_b += sample_outcome(b, rng) == 1 ? 1 : 0;
  CHECK(count_b / 4000.0 == Approx(0.75).margin(0.03));
  std::mt19937_64 r1(5);
  std::mt19937_64 r2(5);
  CHECK(sample_outcome(b, r1) == sample_outcome(b, r2));
}
