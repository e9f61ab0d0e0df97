#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsem/densem.hpp"
#include "evsem/lang.hpp"
#include "evsem/opsem.hpp"
#include "evsem/quantum.hpp"

namespace evsem {

struct ProbabilityMismatch {
  Word word;
  std::string operational;   // "-" when the side has no value
  std::string denotational;
};

struct EquivReport {
  std::string program;
  Flavor flavor = Flavor::kNonDet;
  std::size_t depth = 0;
  std::vector<Word> missing_in_denotation;
  std::vector<Word> missing_in_operational;
  std::vector<ProbabilityMismatch> probability_mismatches;
  std::string error;  // set when a checker stage threw

  bool pass() const {
    return error.empty() && missing_in_denotation.empty() &&
           missing_in_operational.empty() && probability_mismatches.empty();
  }
  nlohmann::json to_json() const;
};

// `unroll` below depth is raised to depth (plus one for the probabilistic
// checker, which needs to see past the deepest maximal configuration).
EquivReport check_nondet(const Command& c, std::size_t depth, std::size_t unroll = 0);
EquivReport check_prob(const Command& c, std::size_t depth, std::size_t unroll = 0);
EquivReport check_quantum(const Command& c, std::size_t depth, const Matrix& rho,
                          const QuantumContext& ctx, std::size_t unroll = 0);

struct StepReport {
  std::size_t steps = 0;           // operational successors examined
  std::size_t initial_events = 0;  // initial events examined
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

// Compares every small step C -l-> C' with removal of an initial event of
// [[C]], in both directions. Programs with loops are compared on events with
// down-closures of at most unroll - 1 elements.
StepReport check_single_step(const Command& c, Flavor flavor,
                             const QuantumContext* ctx = nullptr,
                             std::size_t unroll = 4);

// Random closed well-formed program with at most `size` operators. Loops
// are guarded: a recursion variable only occurs after an event.
Command random_program(Flavor flavor, int size, std::mt19937_64& rng);
// Random full-rank density matrix with trace 1.
Matrix random_density(int dim, std::mt19937_64& rng);

struct FuzzCase {
  Command program;
  Matrix rho;  // quantum only
  EquivReport report;
};

std::vector<FuzzCase> fuzz_cases(Flavor flavor, std::size_t count, int size,
                                 std::size_t depth, std::uint64_t seed);
std::vector<EquivReport> fuzz(Flavor flavor, std::size_t count, int size,
                              std::size_t depth, std::uint64_t seed);

}  // namespace evsem
