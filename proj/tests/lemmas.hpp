#pragma once

// Sampled instances of the composition lemmas and the fixpoint properties,
// shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evsem/densem.hpp"
#include "evsem/equiv.hpp"
#include "evsem/escore.hpp"

namespace lemmas {

using namespace evsem;

struct Tally {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string first_failure;

  bool ok() const { return total > 0 && passed == total; }
  void record(bool ok, const std::string& what) {
    ++total;
    if (ok) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = what;
    }
  }
};

inline EventStructure denote(const Command& c, Flavor f, const QuantumContext* ctx = nullptr) {
  return interpret(c, f, {}, 2, ctx);
}

// The event of `part` that `composite` copied under the given prefix.
inline std::optional<std::size_t> strip(const EventStructure& part,
                                        const EventStructure& composite,
                                        std::size_t e, const std::string& prefix) {
  const auto& path = composite.id(e).path;
  if (path.size() < 2 || path.front() != prefix) return std::nullopt;
  EventId inner{{path.begin() + 1, path.end()}};
  return part.find(inner);
}

// A closed program together with a random event structure of it.
struct Sample {
  Command c;
  EventStructure es;
};

inline Sample sample(Flavor f, std::mt19937_64& rng, int size = 4) {
  Command c = random_program(f, size, rng);
  return {c, denote(c, f)};
}

// Single-qubit quantum programs on a fixed wire.
inline Command qprogram(int q, int size, std::mt19937_64& rng) {
  static const char* kGates[] = {"H", "X", "Y", "Z", "S", "T"};
  std::uniform_int_distribution<int> pick(0, 5);
  if (size == 0) return cmd::gate(kGates[pick(rng)], {q});
  int left = std::uniform_int_distribution<int>(0, size - 1)(rng);
  int right = size - 1 - left;
  switch (pick(rng) % 3) {
    case 0: return cmd::seq(qprogram(q, left, rng), qprogram(q, right, rng));
    case 1: return cmd::meas(q, qprogram(q, left, rng), qprogram(q, right, rng));
    default: return cmd::loop(q, qprogram(q, size - 1, rng));
  }
}

inline std::string both(const Command& a, const Command& b) {
  return print(a) + " / " + print(b);
}

inline std::vector<Tally> run_all(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tally> out;

  {  // (E1 ; E2) \ l == (E1 \ l) ; E2 for l initial in E1
    Tally t{"seq-initial-removal"};
    while (t.total < instances) {
      auto a = sample(Flavor::kNonDet, rng), b = sample(Flavor::kNonDet, rng);
      EventStructure s = seq_compose(a.es, b.es);
      for (auto l : init_events(s)) {
        auto l1 = strip(a.es, s, l, "L");
        if (!l1) continue;
        t.record(equivalent(remove_initial(s, l),
                            seq_compose(remove_initial(a.es, *l1), b.es)),
                 both(a.c, b.c));
      }
    }
    out.push_back(t);
  }
  {  // (E1 + E2) \ l == Ei \ l
    Tally t{"choice-initial-removal"};
    while (t.total < instances) {
      auto a = sample(Flavor::kNonDet, rng), b = sample(Flavor::kNonDet, rng);
      EventStructure s = nd_compose(a.es, b.es);
      for (auto l : init_events(s)) {
        auto la = strip(a.es, s, l, "L");
        auto lb = strip(b.es, s, l, "R");
        EventStructure want = la ? remove_initial(a.es, *la) : remove_initial(b.es, *lb);
        t.record(equivalent(remove_initial(s, l), want), both(a.c, b.c));
      }
    }
    out.push_back(t);
  }
  {  // (E1 || E2) \ l == (E1 \ l) || E2 or E1 || (E2 \ l)
    Tally t{"par-initial-removal"};
    while (t.total < instances) {
      auto a = sample(Flavor::kNonDet, rng), b = sample(Flavor::kNonDet, rng);
      EventStructure s = par_compose(a.es, b.es);
      for (auto l : init_events(s)) {
        auto la = strip(a.es, s, l, "L");
        auto lb = strip(b.es, s, l, "R");
        EventStructure want = la ? par_compose(remove_initial(a.es, *la), b.es)
                                 : par_compose(a.es, remove_initial(b.es, *lb));
        t.record(equivalent(remove_initial(s, l), want), both(a.c, b.c));
      }
    }
    out.push_back(t);
  }
  {  // probabilistic seq removal
    Tally t{"prob-seq-initial-removal"};
    while (t.total < instances) {
      auto a = sample(Flavor::kProb, rng), b = sample(Flavor::kProb, rng);
      EventStructure s = seq_compose(a.es, b.es);
      for (auto l : init_events(s)) {
        auto l1 = strip(a.es, s, l, "L");
        if (!l1 || a.es.value(make_set(a.es, {*l1})) == 0) continue;
        t.record(equivalent(remove_initial(s, l),
                            seq_compose(remove_initial(a.es, *l1), b.es)),
                 both(a.c, b.c));
      }
    }
    out.push_back(t);
  }
  {  // probabilistic parallel removal
    Tally t{"prob-par-initial-removal"};
    while (t.total < instances) {
      auto a = sample(Flavor::kProb, rng), b = sample(Flavor::kProb, rng);
      EventStructure s = par_compose(a.es, b.es);
      for (auto l : init_events(s)) {
        auto la = strip(a.es, s, l, "L");
        auto lb = strip(b.es, s, l, "R");
        EventStructure want = la ? par_compose(remove_initial(a.es, *la), b.es)
                                 : par_compose(a.es, remove_initial(b.es, *lb));
        t.record(equivalent(remove_initial(s, l), want), both(a.c, b.c));
      }
    }
    out.push_back(t);
  }
  {  // meas(n, U1, U2) \ tau_i == U_i
    Tally t{"meas-initial-removal"};
    auto ctx = QuantumContext::for_qubits({1});
    while (t.total < instances) {
      Command c1 = qprogram(1, 3, rng), c2 = qprogram(1, 3, rng);
      EventStructure u1 = denote(c1, Flavor::kQuantum, &ctx);
      EventStructure u2 = denote(c2, Flavor::kQuantum, &ctx);
      EventStructure m = meas_compose(1, u1, u2, ctx);
      for (auto l : init_events(m)) {
        const bool zero = m.label(l).kind == Label::Kind::kTau0;
        t.record(equivalent(remove_initial(m, l), zero ? u1 : u2), both(c1, c2));
      }
    }
    out.push_back(t);
  }
  {
    Tally t{"par-symmetry"};
    while (t.total < instances) {
      auto a = sample(Flavor::kNonDet, rng), b = sample(Flavor::kNonDet, rng);
      t.record(equivalent(par_compose(a.es, b.es), par_compose(b.es, a.es)), both(a.c, b.c));
    }
    out.push_back(t);
  }
  {
    Tally t{"prob-par-symmetry"};
    while (t.total < instances) {
      auto a = sample(Flavor::kProb, rng), b = sample(Flavor::kProb, rng);
      t.record(equivalent(par_compose(a.es, b.es), par_compose(b.es, a.es)), both(a.c, b.c));
    }
    out.push_back(t);
  }
  {
    Tally t{"quantum-par-symmetry"};
    auto ctx = QuantumContext::for_qubits({1, 2});
    while (t.total < instances) {
      Command c1 = qprogram(1, 3, rng), c2 = qprogram(2, 3, rng);
      EventStructure u1 = denote(c1, Flavor::kQuantum, &ctx);
      EventStructure u2 = denote(c2, Flavor::kQuantum, &ctx);
      t.record(equivalent(par_compose(u1, u2), par_compose(u2, u1)), both(c1, c2));
    }
    out.push_back(t);
  }
  {  // (sum_i p_i P_i) ; P == sum_i p_i (P_i ; P)
    Tally t{"prob-seq-distributivity"};
    static const char* kWeights[] = {"1/2", "1/3", "2/3", "1/4", "3/4"};
    while (t.total < instances) {
      auto a = sample(Flavor::kProb, rng), b = sample(Flavor::kProb, rng);
      auto p = sample(Flavor::kProb, rng);
      Rational w = parse_rational(kWeights[rng() % 5]);
      EventStructure lhs = seq_compose(prob_compose({w, 1 - w}, {a.es, b.es}), p.es);
      EventStructure rhs =
          prob_compose({w, 1 - w}, {seq_compose(a.es, p.es), seq_compose(b.es, p.es)});
      t.record(equivalent(lhs, rhs), both(a.c, b.c) + " ; " + print(p.c));
    }
    out.push_back(t);
  }
  return out;
}

// A random down-closed part of `es`, which is below it.
inline EventStructure substructure(const EventStructure& es, std::mt19937_64& rng) {
  std::vector<std::size_t> order(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return es.below(a).count() < es.below(b).count();
  });
  EventSet keep = es.empty_set();
  for (auto e : order) {
    EventSet causes = es.below(e);
    causes.reset(e);
    if (causes.is_subset_of(keep) && rng() % 3 != 0) keep.set(e);
  }
  return restrict(es, keep);
}

inline std::vector<Tally> monotonicity(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tally> out;
  using Binary = std::function<EventStructure(const EventStructure&, const EventStructure&)>;
  auto both_sides = [&](const std::string& name, Flavor f, const Binary& op) {
    Tally t{name};
    while (t.total < instances) {
      auto a = sample(f, rng), b = sample(f, rng);
      EventStructure a1 = substructure(a.es, rng), b1 = substructure(b.es, rng);
      EventStructure big = op(a.es, b.es);
      t.record(order_sub(op(a1, b.es), big) && order_sub(op(a.es, b1), big) &&
                   order_sub(op(a1, b1), big),
               both(a.c, b.c));
    }
    out.push_back(t);
  };
  both_sides("seq-monotone", Flavor::kNonDet,
             [](const auto& x, const auto& y) { return seq_compose(x, y); });
  both_sides("nd-monotone", Flavor::kNonDet,
             [](const auto& x, const auto& y) { return nd_compose(x, y); });
  both_sides("par-monotone", Flavor::kNonDet,
             [](const auto& x, const auto& y) { return par_compose(x, y); });
  both_sides("prob-seq-monotone", Flavor::kProb,
             [](const auto& x, const auto& y) { return seq_compose(x, y); });
  both_sides("prob-choice-monotone", Flavor::kProb, [](const auto& x, const auto& y) {
    return prob_compose({Rational(1, 3), Rational(2, 3)}, {x, y});
  });
  both_sides("prob-par-monotone", Flavor::kProb,
             [](const auto& x, const auto& y) { return par_compose(x, y); });
  {
    Tally t{"meas-monotone"};
    auto ctx = QuantumContext::for_qubits({1});
    while (t.total < instances) {
      Command c1 = qprogram(1, 3, rng), c2 = qprogram(1, 3, rng);
      EventStructure u1 = denote(c1, Flavor::kQuantum, &ctx);
      EventStructure u2 = denote(c2, Flavor::kQuantum, &ctx);
      EventStructure big = meas_compose(1, u1, u2, ctx);
      t.record(order_sub(meas_compose(1, substructure(u1, rng), substructure(u2, rng), ctx), big),
               both(c1, c2));
    }
    out.push_back(t);
  }
  {
    Tally t{"quantum-par-monotone"};
    auto ctx = QuantumContext::for_qubits({1, 2});
    while (t.total < instances) {
      Command c1 = qprogram(1, 3, rng), c2 = qprogram(2, 3, rng);
      EventStructure u1 = denote(c1, Flavor::kQuantum, &ctx);
      EventStructure u2 = denote(c2, Flavor::kQuantum, &ctx);
      t.record(order_sub(par_compose(substructure(u1, rng), substructure(u2, rng)),
                         par_compose(u1, u2)),
               both(c1, c2));
    }
    out.push_back(t);
  }
  {  // right argument only, for the unrolling order
    Tally t{"seq-right-unroll-monotone"};
    while (t.total < instances) {
      Flavor f = t.total % 2 ? Flavor::kProb : Flavor::kNonDet;
      auto a = sample(f, rng), b = sample(f, rng);
      std::size_t k = rng() % 3;
      t.record(order_unroll(seq_compose(a.es, truncate(b.es, k)), seq_compose(a.es, b.es)),
               both(a.c, b.c));
    }
    out.push_back(t);
  }
  return out;
}

// --- Fixpoint chains -------------------------------------------------------

struct FixpointReport {
  std::string program;
  bool chain_ok = true;   // Gamma^k <| Gamma^(k+1)
  bool stable_ok = true;  // configurations of size <= k agree
  std::string detail;
};

inline bool same_small_configs(const EventStructure& a, const EventStructure& b,
                               std::size_t k, double tol) {
  // Compare the truncations, which carry exactly the configurations of
  // size <= k (with their values or operators).
  EventStructure ta = truncate(a, k), tb = truncate(b, k);
  return order_unroll(ta, tb, tol) && order_unroll(tb, ta, tol);
}

inline FixpointReport fixpoint_properties(const std::string& src, Flavor f, std::size_t kmax) {
  FixpointReport r;
  r.program = src;
  Command c = parse(src, f);
  std::optional<QuantumContext> ctx;
  if (f == Flavor::kQuantum) ctx = QuantumContext::for_program(c);
  auto chain = fixpoint_chain(c, f, {}, kmax + 1, ctx ? &*ctx : nullptr);
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (!order_unroll(chain[k], chain[k + 1])) {
      r.chain_ok = false;
      r.detail += "not below at k=" + std::to_string(k) + "; ";
    }
    if (!same_small_configs(chain[k], chain[k + 1], k, kDefaultTolerance)) {
      r.stable_ok = false;
      r.detail += "unstable at k=" + std::to_string(k) + "; ";
    }
  }
  return r;
}

}  // namespace lemmas
