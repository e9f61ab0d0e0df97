#pragma once

#include <compare>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "evsem/common.hpp"

namespace evsem {

enum class Flavor { kNonDet, kProb, kQuantum };

const char* flavor_name(Flavor f);
Flavor parse_flavor(const std::string& name);

struct Label {
  enum class Kind { kSk, kAct, kTau, kTau0, kTau1, kGate };

  Kind kind = Kind::kSk;
  std::string name;         // action or gate name
  std::vector<int> qubits;  // gate wires, or the measured qubit for Tau0/Tau1

  static Label sk() { return {Kind::kSk, "", {}}; }
  static Label act(std::string n) { return {Kind::kAct, std::move(n), {}}; }
  static Label tau() { return {Kind::kTau, "", {}}; }
  static Label tau0(int q) { return {Kind::kTau0, "", {q}}; }
  static Label tau1(int q) { return {Kind::kTau1, "", {q}}; }
  static Label gate(std::string n, std::vector<int> q) {
    return {Kind::kGate, std::move(n), std::move(q)};
  }

  bool is_tau() const { return kind == Kind::kTau; }
  // "sk", "a", "tau", "P0(1)", "P1(1)", "CNOT(1,2)".
  std::string str() const;

  auto operator<=>(const Label&) const = default;
  bool operator==(const Label&) const = default;
};

using Word = std::vector<Label>;
std::string word_string(const Word& w);

// Name -> number of wires. Parsing only needs arities.
using GateSignature = std::map<std::string, int>;
const GateSignature& builtin_gate_signature();

struct CommandNode;
using Command = std::shared_ptr<const CommandNode>;

enum class NodeKind {
  kSkip, kAct, kGate, kSeq, kNd, kProb, kPar, kMeas, kWhile, kRec, kVar, kCheck
};

struct CommandNode {
  NodeKind kind = NodeKind::kSkip;
  std::string name;         // action, gate or variable name
  std::vector<int> qubits;  // gate wires; measured qubit for Meas/While
  Rational prob;            // weight of the left operand of ProbChoice
  Command left;             // first operand, meas-then branch, loop/rec body
  Command right;            // second operand, meas-else branch
};

namespace cmd {
Command skip();
Command act(const std::string& name);
Command gate(const std::string& name, std::vector<int> qubits);
Command seq(Command a, Command b);
Command nd(Command a, Command b);
Command prob(const Rational& p, Command a, Command b);
Command par(Command a, Command b);
Command meas(int qubit, Command a, Command b);
Command loop(int qubit, Command body);
Command rec(const std::string& var, Command body);
Command var(const std::string& name);
Command check();
}  // namespace cmd

Command parse(const std::string& source, Flavor flavor,
              const GateSignature& gates = builtin_gate_signature());

// Canonical concrete syntax; parse(print(c)) reproduces c.
std::string print(const Command& c);

bool same_command(const Command& a, const Command& b);
bool is_check(const Command& c);

std::set<std::string> fvar(const Command& c);
std::set<std::string> bvar(const Command& c);
std::set<int> qvar(const Command& c);
bool has_loops(const Command& c);
int operator_count(const Command& c);

Command substitute(const Command& c, const std::string& x, const Command& r);

// Throws the matching Error for the first violated well-formedness rule.
void check_well_formed(const Command& c, Flavor flavor,
                       const GateSignature& gates = builtin_gate_signature());

}  // namespace evsem
