#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evsem/equiv.hpp"

using namespace evsem;

namespace {

Command nd(const std::string& s) { return parse(s, Flavor::kNonDet); }
Command pr(const std::string& s) { return parse(s, Flavor::kProb); }
Command qu(const std::string& s) { return parse(s, Flavor::kQuantum); }

std::string failures(const StepReport& r) {
  std::string s;
  for (const auto& f : r.failures) s += f + "; ";
  return s;
}

}  // namespace

TEST_CASE("non-deterministic checker on the examples") {
  for (auto [src, d] : std::vector<std::pair<std::string, std::size_t>>{
           {"(a;b)+(c||d)", 2}, {"(a;b)||c", 3}, {"mu X . (skip + (a ; X))", 3}}) {
    auto r = check_nondet(nd(src), d);
    CHECK_MESSAGE(r.pass(), src << " " << r.to_json().dump());
    CHECK(r.depth == d);
  }
}

TEST_CASE("probabilistic checker on the examples") {
  for (auto [src, d] : std::vector<std::pair<std::string, std::size_t>>{
           {"(a;b) +[1/3] (c||d)", 3}, {"skip +[1/2] skip", 2}, {"mu X . (skip +[1/2] X)", 4}}) {
    auto r = check_prob(pr(src), d);
    CHECK_MESSAGE(r.pass(), src << " " << r.to_json().dump());
  }
}

TEST_CASE("quantum checker on the examples") {
  auto run = [](const std::string& src, std::size_t d, const std::string& state) {
    Command c = qu(src);
    auto ctx = QuantumContext::for_program(c);
    return check_quantum(c, d, parse_density(state, ctx.n_qubits()), ctx);
  };
  CHECK(run("H(1); meas 1 {X(1)} else {Z(1)}", 3, "ket:0").pass());
  CHECK(run("H(1); meas 1 {skip} else {X(1)}", 3, "ket:0").pass());
  CHECK(run("while 1 { H(1) }", 5, "ket:+").pass());
  CHECK(run("(H(1) || X(2)); meas 2 {CNOT(1,2)} else {skip}", 4, "ket:+0").pass());
}

TEST_CASE("while loop termination probabilities on |+>") {
  Command c = qu("while 1 { H(1) }");
  auto ctx = QuantumContext::for_program(c);
  Matrix plus = parse_density("ket:+", 1);
  const Label h = Label::gate("H", {1}), p0 = Label::tau0(1), p1 = Label::tau1(1);
  std::vector<std::pair<Word, double>> want{
      {{p0}, 0.5}, {{p1, h, p0}, 0.25}, {{p1, h, p1, h, p0}, 0.125}};
  for (const auto& [w, p] : want) {
    CHECK(std::abs(trace(apply_word(w, plus, ctx)).real() - p) < 1e-9);
  }
  // The denotation agrees on the corresponding maximal configurations.
  EventStructure es = interpret(c, Flavor::kQuantum, {}, 5, &ctx);
  auto v = valuation_from_state(es, plus).v;
  std::map<std::string, double> got;
  for (const auto& x : configurations(es)) {
    if (!enabled(es, x).empty()) continue;
    for (const auto& ch : covering_chains(es, x)) {
      got[word_string(chain_word(es, ch))] = v.at(x);
    }
  }
  for (const auto& [w, p] : want) {
    REQUIRE(got.count(word_string(w)) == 1);
    CHECK(std::abs(got[word_string(w)] - p) < 1e-9);
  }
}

TEST_CASE("report json") {
  auto r = check_prob(pr("(a;b) +[1/3] (c||d)"), 3);
  r.program = "(a;b) +[1/3] (c||d)";
  auto j = r.to_json();
  CHECK(j["verdict"] == "pass");
  CHECK(j["depth"] == 3);
  CHECK(j["program"] == "(a;b) +[1/3] (c||d)");
  CHECK(j["missing_in_denotation"].empty());
  CHECK(j["missing_in_operational"].empty());
  CHECK(j["probability_mismatches"].empty());
  CHECK_FALSE(j.contains("error"));

  EquivReport bad;
  bad.missing_in_operational.push_back({Label::act("a")});
  bad.probability_mismatches.push_back({{Label::tau()}, "1/2", "-"});
  CHECK_FALSE(bad.pass());
  auto k = bad.to_json();
  CHECK(k["verdict"] == "fail");
  CHECK(k["missing_in_operational"][0] == "a");
  CHECK(k["probability_mismatches"][0]["denotational"] == "-");
}

TEST_CASE("single steps match initial event removal") {
  CHECK(check_single_step(nd("a ; b"), Flavor::kNonDet).pass());
  auto sk = check_single_step(nd("skip"), Flavor::kNonDet);
  CHECK(sk.pass());
  CHECK(sk.steps == 1);
  CHECK(sk.initial_events == 1);
  auto ctx = QuantumContext::for_qubits({1});
  auto m = check_single_step(qu("meas 1 {X(1)} else {H(1)}"), Flavor::kQuantum, &ctx);
  CHECK(m.pass());
  CHECK(m.steps == 2);
  CHECK(check_single_step(pr("(a;b) +[1/3] (c||d)"), Flavor::kProb).pass());
  CHECK(check_single_step(pr("(a +[1/2] b) || c"), Flavor::kProb).pass());
  CHECK(check_single_step(nd("mu X . (skip + (a ; X))"), Flavor::kNonDet).pass());
  CHECK(check_single_step(pr("mu X . (skip +[1/2] X)"), Flavor::kProb).pass());
}

TEST_CASE("single steps on random programs") {
  std::mt19937_64 rng(51);
  for (Flavor f : {Flavor::kNonDet, Flavor::kProb, Flavor::kQuantum}) {
    for (int i = 0; i < 40; ++i) {
      Command c = random_program(f, 4, rng);
      std::optional<QuantumContext> ctx;
      if (f == Flavor::kQuantum) ctx = QuantumContext::for_program(c);
      auto r = check_single_step(c, f, ctx ? &*ctx : nullptr, 3);
      CHECK_MESSAGE(r.pass(), print(c) << " " << failures(r));
      if (!r.pass()) continue;
      // A passing single step implies agreement at depth one.
      switch (f) {
        case Flavor::kNonDet: CHECK(check_nondet(c, 1).pass()); break;
        case Flavor::kProb: CHECK(check_prob(c, 1).pass()); break;
        case Flavor::kQuantum:
          CHECK(check_quantum(c, 1, random_density(ctx->dim(), rng), *ctx).pass());
          break;
      }
    }
  }
}

TEST_CASE("single steps notice a broken kernel") {
  testing::set_mutation(testing::Mutation::kDropNdCrossConflict);
  auto r = check_single_step(nd("a + b"), Flavor::kNonDet);
  testing::set_mutation(testing::Mutation::kNone);
  CHECK_FALSE(r.pass());
}

TEST_CASE("fuzzing") {
  CHECK(fuzz(Flavor::kNonDet, 0, 6, 5, 42).empty());
  for (Flavor f : {Flavor::kNonDet, Flavor::kProb, Flavor::kQuantum}) {
    auto a = fuzz(f, 25, 6, 5, 42);
    auto b = fuzz(f, 25, 6, 5, 42);
    REQUIRE(a.size() == 25);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK_MESSAGE(a[i].pass(), a[i].program);
      CHECK(a[i].to_json() == b[i].to_json());
    }
  }
  auto c1 = fuzz_cases(Flavor::kQuantum, 10, 6, 3, 7);
  auto c2 = fuzz_cases(Flavor::kQuantum, 10, 6, 3, 8);
  int same = 0;
  for (std::size_t i = 0; i < 10; ++i) same += print(c1[i].program) == print(c2[i].program);
  CHECK(same < 10);
  for (const auto& fc : c1) {
    CHECK(qvar(fc.program).size() <= 3);
    CHECK(operator_count(fc.program) <= 6);
    CHECK(is_density(fc.rho));
  }
}

TEST_CASE("fuzzing catches the mutations") {
  for (auto [m, f] : std::vector<std::pair<testing::Mutation, Flavor>>{
           {testing::Mutation::kDropNdCrossConflict, Flavor::kNonDet},
           {testing::Mutation::kDropProbTau, Flavor::kProb}}) {
    testing::set_mutation(m);
    auto rs = fuzz(f, 30, 6, 5, 42);
    testing::set_mutation(testing::Mutation::kNone);
    int failed = 0;
    for (const auto& r : rs) failed += !r.pass();
    CHECK(failed > 0);
  }
}
