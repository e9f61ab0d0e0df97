#include "evsem/equiv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

namespace evsem {

nlohmann::json EquivReport::to_json() const {
  using nlohmann::json;
  json den = json::array(), op = json::array(), probs = json::array();
  for (const auto& w : missing_in_denotation) den.push_back(word_string(w));
  for (const auto& w : missing_in_operational) op.push_back(word_string(w));
  for (const auto& m : probability_mismatches) {
    probs.push_back({{"word", word_string(m.word)},
                     {"operational", m.operational},
                     {"denotational", m.denotational}});
  }
  json j{{"program", program},
         {"depth", depth},
         {"verdict", pass() ? "pass" : "fail"},
         {"missing_in_denotation", den},
         {"missing_in_operational", op},
         {"probability_mismatches", probs}};
  if (!error.empty()) j["error"] = error;
  return j;
}

namespace {

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void compare_word_sets(const std::set<Word>& op, const std::set<Word>& den,
                       EquivReport& r) {
  std::set_difference(op.begin(), op.end(), den.begin(), den.end(),
                      std::back_inserter(r.missing_in_denotation));
  std::set_difference(den.begin(), den.end(), op.begin(), op.end(),
                      std::back_inserter(r.missing_in_operational));
}

std::string join_values(const std::set<Rational>& vs) {
  if (vs.empty()) return "-";
  std::string s;
  for (const auto& v : vs) s += (s.empty() ? "" : ",") + to_string(v);
  return s;
}

EquivReport start(const Command& c, Flavor f, std::size_t depth) {
  EquivReport r;
  r.program = print(c);
  r.flavor = f;
  r.depth = depth;
  return r;
}

}  // namespace

EquivReport check_nondet(const Command& c, std::size_t depth, std::size_t unroll) {
  EquivReport r = start(c, Flavor::kNonDet, depth);
  try {
    EventStructure es = interpret(c, Flavor::kNonDet, {}, std::max(unroll, depth),
                                  nullptr, depth);
    std::set<Word> den, op;
    for_each_chain(es, depth, [&](const Chain& ch, const EventSet&) {
      den.insert(chain_word(es, ch));
    });
    for (const auto& w : words(c, Flavor::kNonDet, depth)) op.insert(w.word);
    compare_word_sets(op, den, r);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

EquivReport check_prob(const Command& c, std::size_t depth, std::size_t unroll) {
  EquivReport r = start(c, Flavor::kProb, depth);
  try {
    // One level deeper than the words, so maximality below depth is genuine.
    EventStructure es = interpret(c, Flavor::kProb, {}, std::max(unroll, depth + 1),
                                  nullptr, depth + 1);
    std::set<Word> den, op;
    std::map<Word, std::set<Rational>> den_term, op_term;
    for_each_chain(es, depth, [&](const Chain& ch, const EventSet& x) {
      Word w = chain_word(es, ch);
      den.insert(w);
      if (enabled(es, x).empty()) den_term[w].insert(es.value(x));
    });
    for (const auto& ww : prob_words(c, depth)) {
      op.insert(ww.word);
      if (ww.terminal) op_term[ww.word].insert(ww.probability);
    }
    compare_word_sets(op, den, r);
    for (const auto& [w, ps] : op_term) {
      const auto& dv = den_term[w];
      for (const auto& p : ps) {
        if (!dv.count(p)) {
          r.probability_mismatches.push_back({w, to_string(p), join_values(dv)});
        }
      }
    }
    for (const auto& [w, vs] : den_term) {
      const auto& ov = op_term[w];
      for (const auto& v : vs) {
        if (!ov.count(v)) {
          r.probability_mismatches.push_back({w, join_values(ov), to_string(v)});
        }
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

EquivReport check_quantum(const Command& c, std::size_t depth, const Matrix& rho,
                          const QuantumContext& ctx, std::size_t unroll) {
  EquivReport r = start(c, Flavor::kQuantum, depth);
  try {
    EventStructure es = interpret(c, Flavor::kQuantum, {}, std::max(unroll, depth),
                                  &ctx, depth);
    QuantumValuation v = valuation_from_state(es, rho, ctx.tol);
    std::set<Word> den, op;
    std::set<std::pair<Word, std::string>> reported;
    for_each_chain(es, depth, [&](const Chain& ch, const EventSet& x) {
      Word w = chain_word(es, ch);
      den.insert(w);
      double tr = apply_word(w, rho, ctx).trace().real();
      double vx = v.v.at(x);
      if (std::abs(tr - vx) > ctx.tol && reported.insert({w, set_string(es, x)}).second) {
        r.probability_mismatches.push_back({w, fmt12(tr), fmt12(vx)});
      }
    });
    for (const auto& w : words(c, Flavor::kQuantum, depth)) op.insert(w.word);
    compare_word_sets(op, den, r);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

bool equivalent_or_note(const EventStructure& a, const EventStructure& b, double tol) {
  try {
    return equivalent(a, b, tol);
  } catch (const Error&) {
    return false;
  }
}

// Branch classes of an initial tau event: its immediate successors grouped
// so that members of one class do not conflict.
std::vector<std::vector<std::size_t>> branch_classes(const EventStructure& es,
                                                     std::size_t t) {
  std::vector<std::size_t> succ;
  for (auto e : members(es.above(t))) {
    if (e != t && es.below(e).count() == 2) succ.push_back(e);
  }
  std::vector<std::vector<std::size_t>> classes;
  for (auto e : succ) {
    bool placed = false;
    for (auto& cls : classes) {
      if (!es.conflict(cls.front(), e)) {
        cls.push_back(e);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({e});
  }
  return classes;
}

}  // namespace

StepReport check_single_step(const Command& c, Flavor flavor, const QuantumContext* ctx,
                             std::size_t unroll) {
  StepReport rep;
  const bool loops = has_loops(c);
  const std::size_t u = std::max<std::size_t>(unroll, 2);
  // The probabilistic branches condition on their first events, which needs
  // one more level of valuations.
  const std::size_t outer = loops ? u + (flavor == Flavor::kProb ? 1 : 0) : kUnbounded;
  const std::size_t inner = loops ? u - 1 : kUnbounded;
  const double tol = ctx ? ctx->tol : kDefaultTolerance;
  EventStructure es = interpret(c, flavor, {}, u, ctx, outer);
  auto den = [&](const Command& t) { return interpret(t, flavor, {}, u, ctx, inner); };
  auto inits = init_events(es);
  rep.initial_events = inits.size();
  std::vector<char> init_matched(inits.size(), 0);

  auto fail = [&](const std::string& what) { rep.failures.push_back(what); };

  if (flavor != Flavor::kProb) {
    std::vector<EventStructure> removed;
    for (auto e : inits) removed.push_back(truncate(remove_initial(es, e), inner));
    for (const auto& t : step(c, flavor)) {
      ++rep.steps;
      EventStructure next = den(t.target);
      bool ok = false;
      for (std::size_t k = 0; k < inits.size(); ++k) {
        if (es.label(inits[k]) != t.label) continue;
        if (equivalent_or_note(next, removed[k], tol)) {
          ok = true;
          init_matched[k] = 1;
        }
      }
      if (!ok) fail("step " + t.label.str() + " -> " + print(t.target) + " has no matching event");
    }
  } else {
    for (const auto& d : step_prob(c)) {
      ++rep.steps;
      if (!d.front().label.is_tau()) {
        const Branch& b = d.front();
        EventStructure next = den(b.target);
        bool ok = false;
        for (std::size_t k = 0; k < inits.size(); ++k) {
          if (es.label(inits[k]) != b.label) continue;
          if (equivalent_or_note(next, truncate(remove_initial(es, inits[k]), inner), tol)) {
            ok = true;
            init_matched[k] = 1;
          }
        }
        if (!ok) fail("step " + b.label.str() + " -> " + print(b.target) + " has no matching event");
        continue;
      }
      std::vector<EventStructure> targets;
      for (const auto& b : d) targets.push_back(den(b.target));
      bool ok = false;
      for (std::size_t k = 0; k < inits.size(); ++k) {
        const std::size_t t = inits[k];
        if (!es.label(t).is_tau()) continue;
        auto classes = branch_classes(es, t);
        if (classes.size() != d.size()) continue;
        EventStructure rest = remove_initial(es, t);
        std::vector<Rational> weight;
        std::vector<EventStructure> branch;
        std::vector<std::size_t> window;
        for (const auto& cls : classes) {
          EventSet start = rest.empty_set();
          for (auto e : cls) start.set(*rest.find(es.id(e)));
          EventSet keep = rest.empty_set();
          for (std::size_t i = 0; i < rest.size(); ++i) {
            if (!rest.conflicts(i).intersects(start)) keep.set(i);
          }
          // Values of x | start are known only up to the cap of `rest`.
          std::size_t b = inner;
          if (rest.config_cap() != kUnbounded) {
            b = std::min(b, rest.config_cap() - std::min(rest.config_cap(), cls.size()));
          }
          Rational w = rest.value(start);
          weight.push_back(w);
          window.push_back(b);
          branch.push_back(truncate(
              restrict(rest, keep,
                       [&](const EventSet& x) { return Rational(rest.value(x | start) / w); },
                       b),
              b));
        }
        // Pair operational branches with classes.
        std::vector<char> used(classes.size(), 0);
        std::function<bool(std::size_t)> pair_up = [&](std::size_t i) -> bool {
          if (i == d.size()) return true;
          for (std::size_t j = 0; j < classes.size(); ++j) {
            if (used[j] || weight[j] != d[i].p) continue;
            if (!equivalent_or_note(truncate(targets[i], window[j]), branch[j], tol)) continue;
            used[j] = 1;
            if (pair_up(i + 1)) return true;
            used[j] = 0;
          }
          return false;
        };
        if (pair_up(0)) {
          ok = true;
          init_matched[k] = 1;
        }
      }
      if (!ok) {
        std::string what = "tau step {";
        for (const auto& b : d) what += " " + to_string(b.p) + ":" + print(b.target);
        fail(what + " } has no matching event");
      }
    }
  }
  for (std::size_t k = 0; k < inits.size(); ++k) {
    if (!init_matched[k]) fail("initial event " + es.id(inits[k]).str() + " has no matching step");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Program generation

namespace {

class Generator {
 public:
  Generator(Flavor f, std::mt19937_64& rng) : flavor_(f), rng_(rng) {}

  Command classical(int budget, bool allow_vars, bool allow_rec) {
    if (budget == 0) return leaf(allow_vars);
    std::vector<int> ops{0, 1, 2};  // seq, choice, par
    if (allow_rec && rec_depth_ < 2) ops.push_back(3);
    int op = ops[pick(ops.size())];
    int lb = static_cast<int>(pick(budget));
    int rb = budget - 1 - lb;
    switch (op) {
      case 0: {
        Command a = classical(lb, false, false);
        auto saved = guard_;
        std::fill(guard_.begin(), guard_.end(), true);
        Command b = classical(rb, allow_vars, allow_rec);
        restore_guards(saved);
        return cmd::seq(a, b);
      }
      case 1: {
        if (flavor_ == Flavor::kNonDet) {
          Command a = classical(lb, allow_vars, allow_rec);
          Command b = classical(rb, allow_vars, allow_rec);
          return cmd::nd(a, b);
        }
        static const char* kWeights[] = {"1/2", "1/3", "2/3", "1/4", "3/4"};
        Rational p = parse_rational(kWeights[pick(5)]);
        auto saved = guard_;
        std::fill(guard_.begin(), guard_.end(), true);
        Command a = classical(lb, allow_vars, allow_rec);
        Command b = classical(rb, allow_vars, allow_rec);
        restore_guards(saved);
        return cmd::prob(p, a, b);
      }
      case 2: {
        Command a = classical(lb, allow_vars, allow_rec);
        Command b = classical(rb, allow_vars, allow_rec);
        return cmd::par(a, b);
      }
      default: {
        std::string name = rec_depth_ == 0 ? "X" : "Y";
        vars_.push_back(name);
        guard_.push_back(false);
        uses_.push_back(0);
        ++rec_depth_;
        Command body = classical(budget - 1, true, allow_rec);
        --rec_depth_;
        vars_.pop_back();
        guard_.pop_back();
        uses_.pop_back();
        return cmd::rec(name, body);
      }
    }
  }

  Command quantum(int budget, std::vector<int> qs, int loop_depth) {
    if (budget == 0) return gate(qs);
    std::vector<int> ops{0, 2};  // seq, meas
    if (qs.size() >= 2) ops.push_back(1);
    if (loop_depth < 2) ops.push_back(3);
    int op = ops[pick(ops.size())];
    int lb = static_cast<int>(pick(budget));
    int rb = budget - 1 - lb;
    switch (op) {
      case 0:
        return cmd::seq(quantum(lb, qs, loop_depth), quantum(rb, qs, loop_depth));
      case 1: {
        std::shuffle(qs.begin(), qs.end(), rng_);
        std::size_t cut = 1 + pick(qs.size() - 1);
        std::vector<int> a(qs.begin(), qs.begin() + cut), b(qs.begin() + cut, qs.end());
        return cmd::par(quantum(lb, a, loop_depth), quantum(rb, b, loop_depth));
      }
      case 2: {
        int q = qs[pick(qs.size())];
        return cmd::meas(q, quantum(lb, qs, loop_depth), quantum(rb, qs, loop_depth));
      }
      default: {
        int q = qs[pick(qs.size())];
        return cmd::loop(q, quantum(budget - 1, qs, loop_depth + 1));
      }
    }
  }

 private:
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  void restore_guards(const std::vector<bool>& saved) {
    for (std::size_t i = 0; i < guard_.size() && i < saved.size(); ++i) guard_[i] = saved[i];
  }

  Command leaf(bool allow_vars) {
    std::vector<std::size_t> usable;
    if (allow_vars) {
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (guard_[i] && uses_[i] == 0) usable.push_back(i);
      }
    }
    if (!usable.empty() && pick(2) == 0) {
      std::size_t i = usable[pick(usable.size())];
      ++uses_[i];
      return cmd::var(vars_[i]);
    }
    static const char* kActs[] = {"a", "b", "c", "d"};
    if (pick(5) == 0) return cmd::skip();
    return cmd::act(kActs[pick(4)]);
  }

  Command gate(const std::vector<int>& qs) {
    if (pick(6) == 0) return cmd::skip();
    if (qs.size() >= 2 && pick(4) == 0) {
      static const char* k2[] = {"CNOT", "CZ", "SWAP"};
      std::vector<int> w = qs;
      std::shuffle(w.begin(), w.end(), rng_);
      return cmd::gate(k2[pick(3)], {w[0], w[1]});
    }
    static const char* k1[] = {"H", "X", "Y", "Z", "S", "T"};
    return cmd::gate(k1[pick(6)], {qs[pick(qs.size())]});
  }

  Flavor flavor_;
  std::mt19937_64& rng_;
  std::vector<std::string> vars_;
  std::vector<bool> guard_;
  std::vector<int> uses_;
  int rec_depth_ = 0;
};

}  // namespace

Command random_program(Flavor flavor, int size, std::mt19937_64& rng) {
  Generator g(flavor, rng);
  int budget = std::uniform_int_distribution<int>(0, std::max(size, 0))(rng);
  if (flavor == Flavor::kQuantum) {
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<int> qs;
    for (int q = 1; q <= n; ++q) qs.push_back(q);
    return g.quantum(budget, qs, 0);
  }
  return g.classical(budget, false, true);
}

Matrix random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = Complex(n(rng), n(rng));
  }
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

std::vector<FuzzCase> fuzz_cases(Flavor flavor, std::size_t count, int size,
                                 std::size_t depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FuzzCase> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    FuzzCase fc;
    fc.program = random_program(flavor, size, rng);
    check_well_formed(fc.program, flavor);
    switch (flavor) {
      case Flavor::kNonDet:
        fc.report = check_nondet(fc.program, depth);
        break;
      case Flavor::kProb:
        fc.report = check_prob(fc.program, depth);
        break;
      case Flavor::kQuantum: {
        auto ctx = QuantumContext::for_program(fc.program);
        fc.rho = random_density(ctx.dim(), rng);
        fc.report = check_quantum(fc.program, depth, fc.rho, ctx);
        break;
      }
    }
    out.push_back(std::move(fc));
  }
  return out;
}

std::vector<EquivReport> fuzz(Flavor flavor, std::size_t count, int size,
                              std::size_t depth, std::uint64_t seed) {
  std::vector<EquivReport> out;
  for (auto& fc : fuzz_cases(flavor, count, size, depth, seed)) {
    out.push_back(std::move(fc.report));
  }
  return out;
}

}  // namespace evsem
