#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evsem/densem.hpp"
#include "evsem/equiv.hpp"
#include "evsem/opsem.hpp"
#include "evsem/quantum.hpp"

using namespace evsem;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const Matrix kH = mat2(kR, kR, kR, -kR);
const Matrix kX = mat2(0, 1, 1, 0);
const Matrix kZ = mat2(1, 0, 0, -1);
const Matrix kP0 = mat2(1, 0, 0, 0);
const Matrix kP1 = mat2(0, 0, 0, 1);

struct Spec {
  std::string name;
  Label label;
  Matrix op;
};

// Events in the given order (ids sort the same way), operators attached.
EventStructure ues(const std::vector<Spec>& evs,
                   const std::vector<std::pair<int, int>>& le,
                   const std::vector<std::pair<int, int>>& cf, int dim) {
  Draft d;
  for (const auto& e : evs) d.add({EventId{{e.name}}, e.label});
  for (auto [a, b] : le) d.add_le(a, b);
  for (auto [a, b] : cf) d.add_conflict(a, b);
  EventStructure es = EventStructure::finalize(std::move(d), AnnotationKind::kOperators);
  std::vector<Matrix> ops;
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (const auto& e : evs) {
      if (EventId{{e.name}} == es.id(i)) ops.push_back(e.op);
    }
  }
  es.set_operators(ops, dim);
  return es;
}

// The structure of H(1); meas 1 {X(1)} else {Z(1)} by hand.
EventStructure fig_meas() {
  return ues({{"e0", Label::gate("H", {1}), kH},
              {"e1", Label::tau0(1), kP0},
              {"e2", Label::tau1(1), kP1},
              {"e3", Label::gate("X", {1}), kX},
              {"e4", Label::gate("Z", {1}), kZ}},
             {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 3}, {2, 4}}, {{1, 2}, {1, 4}, {2, 3}, {3, 4}}, 2);
}

EventSet named(const EventStructure& es, std::initializer_list<const char*> ns) {
  EventSet x = es.empty_set();
  for (auto n : ns) x.set(*es.find(EventId{{n}}));
  return x;
}

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
  for (const auto& v : vs) {
    if (v.rule == rule) return true;
  }
  return false;
}

// Smallest drop value over all configurations and their full cover families,
// by inclusion-exclusion over unions.
Rational brute_drop(const EventStructure& es) {
  Rational worst = 1;
  auto value = [&](const EventSet& x) {
    return is_configuration(es, x) ? es.value(x) : Rational(0);
  };
  for (const auto& y : configurations(es)) {
    std::vector<EventSet> covers;
    for (std::size_t e = 0; e < es.size(); ++e) {
      if (y.test(e)) continue;
      EventSet x = y;
      x.set(e);
      if (is_configuration(es, x)) covers.push_back(x);
    }
    Rational d = value(y);
    const std::size_t n = covers.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      EventSet u = y;
      int bits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) {
          u |= covers[i];
          ++bits;
        }
      }
      d += (bits % 2 ? -1 : 1) * value(u);
    }
    if (d < worst) worst = d;
  }
  return worst;
}

}  // namespace

TEST_CASE("matrix kernel") {
  CHECK(is_unitary(kH));
  CHECK_FALSE(is_projection(kH));
  CHECK(is_projection(kP0));
  CHECK_FALSE(is_unitary(kP0));
  CHECK_FALSE(commutes(kH, kX));
  CHECK(commutes(embed(kX, {0}, 2), embed(kZ, {1}, 2)));
  Matrix plus = kH * kP0 * kH.adjoint();
  CHECK(std::abs(trace(kP0 * plus * kP0.adjoint()) - Complex(0.5)) < 1e-15);
  CHECK(max_abs_diff(adjoint(mat2(0, Complex(0, 1), 2, 3)), mat2(0, 2, Complex(0, -1), 3)) ==
        0);
  CHECK(max_abs_diff(multiply(kX, kX), identity(2)) == 0);
}

TEST_CASE("embedding places gates on wires") {
  // Wire 0 is the most significant bit.
  Matrix x0 = embed(kX, {0}, 2);
  CHECK(x0(2, 0) == Complex(1));
  Matrix x1 = embed(kX, {1}, 2);
  CHECK(x1(1, 0) == Complex(1));
  const Matrix cnot = GateTable::builtin().gate("CNOT");
  Matrix flipped = embed(cnot, {1, 0}, 2);
  // Control on wire 1: |01> -> |11>.
  CHECK(flipped(3, 1) == Complex(1));
  CHECK(flipped(0, 0) == Complex(1));
  CHECK_THROWS_AS(embed(cnot, {0}, 2), Error);
}

TEST_CASE("the built-in gate table") {
  auto t = GateTable::builtin();
  for (const char* g : {"I", "X", "Y", "Z", "H", "S", "T", "CNOT", "CZ", "SWAP"}) {
    CHECK_MESSAGE(is_unitary(t.gate(g)), g);
  }
  CHECK(t.signature().at("SWAP") == 2);
  CHECK_THROWS_AS(t.gate("NOPE"), Error);
}

TEST_CASE("gate files") {
  auto t = GateTable::builtin();
  auto j = nlohmann::json::parse(R"({
    "SX": {"arity": 1, "matrix": [[[0.5, 0.5], [0.5, -0.5]], [[0.5, -0.5], [0.5, 0.5]]]},
    "@meas:1": {"m0": [[1, 0], [0, 0]], "m1": [[0, 0], [0, 1]]}
  })");
  load_gate_json(t, j);
  CHECK(max_abs_diff(t.gate("SX") * t.gate("SX"), kX) < 1e-12);
  CHECK(t.measurements.count(1) == 1);
  CHECK_THROWS_AS(load_gate_json(t, nlohmann::json::parse(
                                        R"({"B": {"arity": 1, "matrix": [[1, 1], [0, 1]]}})")),
                  Error);
  CHECK_THROWS_AS(load_gate_json(t, nlohmann::json::parse(
                                        R"({"B": {"arity": 2, "matrix": [[1, 0], [0, 1]]}})")),
                  Error);
  CHECK_THROWS_AS(load_gate_json(t, nlohmann::json::parse(
                                        R"({"@meas:1": {"m0": [[1, 0], [0, 0]],
                                                        "m1": [[1, 0], [0, 0]]}})")),
                  Error);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1, 0]]")), Error);
}

TEST_CASE("density specifications") {
  Matrix plus = parse_density("ket:+", 1);
  CHECK(std::abs(plus(0, 1) - Complex(0.5)) < 1e-15);
  Matrix zo = parse_density("ket:01", 2);
  CHECK(zo(1, 1) == Complex(1));
  CHECK(is_density(zo));
  CHECK(is_density(parse_density("[[0.5, 0], [0, 0.5]]", 1)));
  CHECK_FALSE(is_density(mat2(1, 0, 0, -0.5)));
  CHECK_THROWS_AS(parse_density("ket:0", 2), Error);
  CHECK_THROWS_AS(parse_density("ket:2", 1), Error);
  std::mt19937_64 rng(1);
  CHECK(is_density(random_density(4, rng)));
}

TEST_CASE("unitary event structure validation") {
  CHECK(validate_ues(fig_meas()).empty());

  auto parallel = ues({{"a", Label::gate("H", {1}), kH}, {"b", Label::gate("X", {1}), kX}}, {},
                      {}, 2);
  CHECK(has_rule(validate_ues(parallel), "commutation"));

  auto twice = ues({{"a", Label::tau0(1), kP0}, {"b", Label::tau0(1), kP0}}, {}, {{0, 1}}, 2);
  CHECK(has_rule(validate_ues(twice), "class sum unitary"));

  auto lone = ues({{"a", Label::tau0(1), kP0}}, {}, {}, 2);
  CHECK(validate_ues(lone).empty());

  auto bad = ues({{"a", Label::gate("B", {1}), mat2(1, 1, 0, 1)}}, {}, {}, 2);
  CHECK(has_rule(validate_ues(bad), "unitary or projection"));

  // a ~ b and b ~ c minimal, a and c concurrent.
  auto chain = ues({{"a", Label::tau0(1), kP0},
                    {"b", Label::tau1(1), kP1},
                    {"c", Label::tau0(1), kP0}},
                   {}, {{0, 1}, {1, 2}}, 2);
  CHECK(has_rule(validate_ues(chain), "minimal conflict transitivity"));
}

TEST_CASE("configuration operators") {
  EventStructure es = fig_meas();
  Matrix a = config_operator(es, named(es, {"e0", "e1", "e3"}));
  CHECK(max_abs_diff(a, kX * kP0 * kH) < 1e-12);
  CHECK(max_abs_diff(config_operator(es, es.empty_set()), identity(2)) == 0);

  auto xz = ues({{"a", Label::gate("X", {1}), embed(kX, {0}, 2)},
                 {"b", Label::gate("Z", {2}), embed(kZ, {1}, 2)}},
                {}, {}, 4);
  EventSet both = xz.empty_set();
  both.set();
  CHECK(covering_chains(xz, both).size() == 2);
  CHECK(chain_disagreement(xz, both) < 1e-12);
  CHECK(max_abs_diff(config_operator(xz, both), embed(kX, {0}, 2) * embed(kZ, {1}, 2)) <
        1e-12);

  auto clash = ues({{"a", Label::gate("X", {1}), kX}, {"b", Label::gate("Z", {1}), kZ}}, {},
                   {}, 2);
  CHECK(chain_disagreement(clash, named(clash, {"a", "b"})) > 1);
  CHECK_THROWS_AS(config_operator(clash, named(clash, {"a", "b"})), Error);
}

TEST_CASE("valuations from a state") {
  EventStructure es = fig_meas();
  Matrix zero = parse_density("ket:0", 1);
  auto v = valuation_from_state(es, zero).v;
  CHECK(std::abs(v.at(named(es, {"e0", "e1", "e3"})) - 0.5) < 1e-12);
  CHECK(std::abs(v.at(named(es, {"e0", "e2", "e4"})) - 0.5) < 1e-12);
  CHECK(std::abs(v.at(es.empty_set()) - 1) < 1e-12);

  auto one = ues({{"e", Label::gate("X", {1}), kX}}, {}, {}, 2);
  CHECK(std::abs(valuation_from_state(one, zero).v.at(named(one, {"e"})) - 1) < 1e-12);

  CHECK_THROWS_AS(valuation_from_state(es, Matrix::Zero(2, 2)), Error);
  CHECK_THROWS_AS(valuation_from_state(es, parse_density("ket:00", 2)), Error);
}

TEST_CASE("drop condition") {
  EventStructure ex = interpret(parse("(a;b) +[1/3] (c||d)", Flavor::kProb), Flavor::kProb, {}, 2);
  auto r = drop_check(ex);
  CHECK(r.ok);
  CHECK(r.worst == 0);

  // Two conflicting events both valued 1.
  Draft d;
  auto a = d.add({EventId{{"a"}}, Label::act("a")});
  auto b = d.add({EventId{{"b"}}, Label::act("b")});
  d.add_conflict(a, b);
  EventStructure es = EventStructure::finalize(std::move(d), AnnotationKind::kValuation);
  Valuation v;
  v[es.empty_set()] = 1;
  v[make_set(es, {0})] = 1;
  v[make_set(es, {1})] = 1;
  es.set_valuation(v);
  auto bad = drop_check(es);
  CHECK_FALSE(bad.ok);
  CHECK(bad.worst == -1);
  CHECK(bad.witness == "{}");

  RealValuation rv{{es.empty_set(), 1.0}, {make_set(es, {0}), 1.0}, {make_set(es, {1}), 1.0}};
  CHECK(drop_check(es, rv).worst == doctest::Approx(-1));

  // No covers: the drop value is v(y) itself.
  EventStructure single = interpret(parse("a", Flavor::kProb), Flavor::kProb, {}, 1);
  CHECK(drop_check(single).ok);
}

TEST_CASE("drop values agree with inclusion-exclusion") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    Command c = random_program(Flavor::kProb, 5, rng);
    EventStructure es = interpret(c, Flavor::kProb, {}, 3);
    if (es.size() > 14) continue;
    auto r = drop_check(es);
    Rational want = brute_drop(es);
    CHECK_MESSAGE(r.worst == doctest::Approx(want.get_d()), print(c));
    CHECK(r.ok == (want >= 0));
  }
}

TEST_CASE("quantum valuations satisfy the drop condition and match word traces") {
  std::mt19937_64 rng(37);
  int tested = 0;
  for (int i = 0; i < 40; ++i) {
    Command c = random_program(Flavor::kQuantum, 5, rng);
    auto ctx = QuantumContext::for_program(c);
    EventStructure es = interpret(c, Flavor::kQuantum, {}, 2, &ctx);
    if (es.size() > 40) continue;
    ++tested;
    CHECK(validate_ues(es).empty());
    Matrix rho = random_density(ctx.dim(), rng);
    auto v = valuation_from_state(es, rho).v;
    CHECK_MESSAGE(drop_check(es, v).ok, print(c));
    for (const auto& x : configurations(es)) {
      for (const auto& ch : covering_chains(es, x)) {
        double t = trace(apply_word(chain_word(es, ch), rho, ctx)).real();
        CHECK(std::abs(t - v.at(x)) < 1e-9);
      }
    }
    if (!has_loops(c)) {
      double total = 0;
      for (const auto& x : maximal_configs(es)) total += v.at(x);
      CHECK(std::abs(total - 1) < 1e-9);
    }
  }
  CHECK(tested > 25);
}

TEST_CASE("merging measurement branches") {
  EventStructure es = fig_meas();
  Matrix zero = parse_density("ket:0", 1);
  auto r = merge_oracle(es, named(es, {"e0"}), zero);
  CHECK(r.ok());
  CHECK(r.classes == 1);
  CHECK(r.tilde_events == 2);
  CHECK(r.sizes_preserved);
  CHECK(r.max_sum_error < 1e-12);

  // Non-projective covers violate the precondition.
  CHECK_THROWS_AS(merge_oracle(es, named(es, {"e0", "e1"}), zero), Error);
  CHECK_THROWS_AS(merge_oracle(es, named(es, {"e1"}), zero), Error);

  // A lone projection next to a measured pair: classes of size 1 and 2.
  auto two = QuantumContext::for_qubits({1, 2});
  auto mixed = ues({{"m0", Label::tau0(1), two.projector(1, 0)},
                    {"m1", Label::tau1(1), two.projector(1, 1)},
                    {"p", Label::tau0(2), two.projector(2, 0)}},
                   {}, {{0, 1}}, 4);
  REQUIRE(validate_ues(mixed).empty());
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    auto m = merge_oracle(mixed, mixed.empty_set(), random_density(4, rng));
    CHECK(m.ok());
    CHECK(m.classes == 2);
    CHECK(m.tilde_events == 3);
    CHECK(m.sizes_preserved);
    CHECK(std::abs(m.drop_tilde - m.drop_hat) < 1e-9);
  }

  auto lone = ues({{"p", Label::tau0(1), kP0}}, {}, {}, 2);
  auto l = merge_oracle(lone, lone.empty_set(), zero);
  CHECK(l.classes == l.tilde_events);
  CHECK(l.ok());
}

TEST_CASE("merge identity on sampled programs") {
  std::mt19937_64 rng(43);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    Command c = random_program(Flavor::kQuantum, 5, rng);
    auto ctx = QuantumContext::for_program(c);
    EventStructure es = interpret(c, Flavor::kQuantum, {}, 2, &ctx);
    Matrix rho = random_density(ctx.dim(), rng);
    for (const auto& y : configurations(es)) {
      bool projective = true, any = false;
      for (auto e : enabled(es, y)) {
        any = true;
        if (!is_projection(es.op(e))) projective = false;
      }
      if (!any || !projective) continue;
      auto r = merge_oracle(es, y, rho);
      CHECK_MESSAGE(r.ok(), print(c) << " at " << set_string(es, y));
      ++compared;
    }
  }
  CHECK(compared > 20);
}
