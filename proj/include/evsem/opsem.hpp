#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "evsem/lang.hpp"
#include "evsem/quantum.hpp"

namespace evsem {

// A successor; `target` is the check command when the program has finished.
struct Transition {
  Label label;
  Command target;
};

struct Branch {
  Rational p;
  Label label;
  Command target;
};
using Distribution = std::vector<Branch>;

// Non-deterministic and quantum small steps, sorted and without duplicates.
std::vector<Transition> step(const Command& c, Flavor flavor);

// Probabilistic small steps. Branches are kept in rule order, so two equal
// branches of one choice stay distinct.
std::vector<Distribution> step_prob(const Command& c);

struct WordEntry {
  Word word;
  bool terminal = false;

  auto operator<=>(const WordEntry&) const = default;
};

// Every word of length 1..depth, flagged terminal when it ends in the check.
std::vector<WordEntry> words(const Command& c, Flavor flavor, std::size_t depth);

struct WeightedWord {
  Word word;
  Rational probability;
  bool terminal = false;
  std::string residual;     // printed target command
  std::vector<int> trace;   // branch index taken at every step
};

// One entry per derivation class: equal words reached through different
// branches are not merged.
std::vector<WeightedWord> prob_words(const Command& c, std::size_t depth);

// Folds rho -> A rho A^dagger over the word, head first.
Matrix apply_word(const Word& w, const Matrix& rho, const QuantumContext& ctx);

}  // namespace evsem
