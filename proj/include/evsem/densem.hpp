#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "evsem/escore.hpp"
#include "evsem/lang.hpp"
#include "evsem/quantum.hpp"

namespace evsem {

using Environment = std::map<std::string, EventStructure>;

AnnotationKind annotation_for(Flavor f);

// The empty structure of a flavor: v(empty) = 1, or an empty operator map.
EventStructure bottom(Flavor f, const QuantumContext* ctx = nullptr);
EventStructure atom(const Label& l, Flavor f, const QuantumContext* ctx = nullptr);

EventStructure seq_compose(const EventStructure& e1, const EventStructure& e2);
EventStructure par_compose(const EventStructure& e1, const EventStructure& e2,
                           double tol = kDefaultTolerance);
EventStructure nd_compose(const EventStructure& e1, const EventStructure& e2);
EventStructure prob_compose(const std::vector<Rational>& weights,
                            const std::vector<EventStructure>& parts);
EventStructure meas_compose(int qubit, const EventStructure& u1,
                            const EventStructure& u2, const QuantumContext& ctx);

// Loops are read as the unroll-th approximant of their fixpoint. With a
// finite max_depth every intermediate result keeps only events whose
// down-closure has at most max_depth elements; the outcome equals the
// truncation of the full interpretation.
EventStructure interpret(const Command& c, Flavor flavor, const Environment& env,
                         std::size_t unroll, const QuantumContext* ctx = nullptr,
                         std::size_t max_depth = kUnbounded);

// The approximants 0..k of a Rec or While command.
std::vector<EventStructure> fixpoint_chain(const Command& loop, Flavor flavor,
                                           const Environment& env, std::size_t k,
                                           const QuantumContext* ctx = nullptr,
                                           std::size_t max_depth = kUnbounded);

// Events whose down-closure has at most `depth` elements; configurations are
// capped at the same size.
EventStructure truncate(const EventStructure& es, std::size_t depth);

namespace testing {

// Deliberate kernel faults used to show that the checkers can fail.
enum class Mutation { kNone, kDropNdCrossConflict, kDropProbTau };

void set_mutation(Mutation m);
Mutation mutation();

}  // namespace testing

}  // namespace evsem
