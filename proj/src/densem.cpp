#include "evsem/densem.hpp"

#include <atomic>

namespace evsem {

namespace testing {

namespace {
std::atomic<Mutation> g_mutation{Mutation::kNone};
}  // namespace

void set_mutation(Mutation m) { g_mutation.store(m); }
Mutation mutation() { return g_mutation.load(); }

}  // namespace testing

namespace {

EventId with_prefix(const EventId& id, std::initializer_list<std::string> tags) {
  EventId out{std::vector<std::string>(tags)};
  out.path.insert(out.path.end(), id.path.begin(), id.path.end());
  return out;
}

void same_kind(const EventStructure& a, const EventStructure& b) {
  if (a.annotation_kind() != b.annotation_kind()) {
    throw Error(ErrorCode::kAnnotationMismatch,
                std::string(annotation_name(a.annotation_kind())) + " vs " +
                    annotation_name(b.annotation_kind()));
  }
  if (a.annotation_kind() == AnnotationKind::kOperators && a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator dimensions differ");
  }
}

// Where a composed event came from: operand index and position there.
struct Origin {
  int part;
  std::size_t index;
};

EventSet part_set(const EventSet& x, const std::vector<Origin>& origin, int part,
                  std::size_t part_size) {
  EventSet out(part_size);
  for (auto i : members(x)) {
    if (origin[i].part == part) out.set(origin[i].index);
  }
  return out;
}

std::vector<Origin> reorder(const std::vector<Origin>& draft_origin,
                            const std::vector<std::size_t>& order) {
  std::vector<Origin> out;
  out.reserve(order.size());
  for (auto d : order) out.push_back(draft_origin[d]);
  return out;
}

}  // namespace

AnnotationKind annotation_for(Flavor f) {
  switch (f) {
    case Flavor::kNonDet: return AnnotationKind::kNone;
    case Flavor::kProb: return AnnotationKind::kValuation;
    case Flavor::kQuantum: return AnnotationKind::kOperators;
  }
  return AnnotationKind::kNone;
}

EventStructure bottom(Flavor f, const QuantumContext* ctx) {
  if (f == Flavor::kQuantum) {
    if (!ctx) throw Error(ErrorCode::kInvalidInput, "quantum context required");
    EventStructure es = EventStructure::bottom(AnnotationKind::kOperators, ctx->dim());
    es.set_operators({}, ctx->dim());
    return es;
  }
  return EventStructure::bottom(annotation_for(f));
}

EventStructure atom(const Label& l, Flavor f, const QuantumContext* ctx) {
  Draft d;
  d.add({EventId{{l.str()}}, l});
  EventStructure es = EventStructure::finalize(std::move(d), annotation_for(f));
  if (f == Flavor::kProb) {
    Valuation v;
    v[es.empty_set()] = 1;
    v[make_set(es, {0})] = 1;
    es.set_valuation(std::move(v));
  } else if (f == Flavor::kQuantum) {
    if (!ctx) throw Error(ErrorCode::kInvalidInput, "quantum context required");
    es.set_operators({ctx->label_operator(l)}, ctx->dim());
  }
  return es;
}

EventStructure seq_compose(const EventStructure& e1, const EventStructure& e2) {
  same_kind(e1, e2);
  const auto maxes = maximal_configs(e1);
  // Copies deeper than the cap cannot occur in any configuration we keep.
  const std::size_t cap = std::min(e1.config_cap(), e2.config_cap());
  constexpr std::size_t kNone = kUnbounded;
  Draft d;
  std::vector<Origin> origin;  // part 1: e1; part 2: e2 copy
  for (std::size_t i = 0; i < e1.size(); ++i) {
    d.add({e1.id(i).prefixed("L"), e1.label(i)});
    origin.push_back({1, i});
  }
  const std::size_t n1 = e1.size();
  std::vector<std::vector<std::size_t>> at(maxes.size(),
                                           std::vector<std::size_t>(e2.size(), kNone));
  for (std::size_t k = 0; k < maxes.size(); ++k) {
    const std::string tag = "Copy#" + fingerprint(e1, maxes[k]);
    const std::size_t m = maxes[k].count();
    for (std::size_t j = 0; j < e2.size(); ++j) {
      if (cap != kUnbounded && m + e2.below(j).count() > cap) continue;
      at[k][j] = d.add({with_prefix(e2.id(j), {"R", tag}), e2.label(j)});
      origin.push_back({2, j});
    }
  }
  d.sync();
  for (std::size_t i = 0; i < n1; ++i) {
    for (auto j : members(e1.below(i))) d.add_le(j, i);
    for (auto j : members(e1.conflicts(i))) d.add_conflict(i, j);
  }
  const std::size_t total = d.events.size();
  std::vector<EventSet> block(maxes.size(), EventSet(total));
  for (std::size_t k = 0; k < maxes.size(); ++k) {
    for (auto c : at[k]) {
      if (c != kNone) block[k].set(c);
    }
  }
  EventSet copies(total);
  for (const auto& b : block) copies |= b;
  for (std::size_t k = 0; k < maxes.size(); ++k) {
    // Events of e1 that rule out the maximal configuration, and the copies
    // made for the other ones.
    EventSet against = copies - block[k];
    for (std::size_t i = 0; i < n1; ++i) {
      if (e1.conflicts(i).intersects(maxes[k])) against.set(i);
    }
    for (std::size_t j = 0; j < e2.size(); ++j) {
      const std::size_t cj = at[k][j];
      if (cj == kNone) continue;
      for (auto j2 : members(e2.below(j))) d.add_le(at[k][j2], cj);
      for (auto i : members(maxes[k])) d.add_le(i, cj);
      for (auto j2 : members(e2.conflicts(j))) {
        if (at[k][j2] != kNone) d.add_conflict(cj, at[k][j2]);
      }
      d.conflict[cj] |= against;
      for (std::size_t i = 0; i < n1; ++i) {
        if (against.test(i)) d.conflict[i].set(cj);
      }
    }
  }
  std::vector<std::size_t> order;
  EventStructure out = EventStructure::finalize(std::move(d), e1.annotation_kind(), &order);
  out.set_config_cap(std::min(e1.config_cap(), e2.config_cap()));
  auto org = reorder(origin, order);
  if (e1.annotation_kind() == AnnotationKind::kOperators) {
    std::vector<Matrix> ops;
    for (const auto& o : org) ops.push_back(o.part == 1 ? e1.op(o.index) : e2.op(o.index));
    out.set_operators(std::move(ops), e1.dim());
  } else if (e1.annotation_kind() == AnnotationKind::kValuation) {
    Valuation v;
    for (const auto& x : configurations(out)) {
      EventSet x1 = part_set(x, org, 1, e1.size());
      EventSet x2 = part_set(x, org, 2, e2.size());
      v[x] = x2.none() ? e1.value(x1) : Rational(e1.value(x1) * e2.value(x2));
    }
    out.set_valuation(std::move(v));
  }
  return out;
}

EventStructure par_compose(const EventStructure& e1, const EventStructure& e2,
                           double tol) {
  same_kind(e1, e2);
  if (e1.annotation_kind() == AnnotationKind::kOperators) {
    for (std::size_t i = 0; i < e1.size(); ++i) {
      for (std::size_t j = 0; j < e2.size(); ++j) {
        if (!commutes(e1.op(i), e2.op(j), tol)) {
          throw Error(ErrorCode::kNonCommutingParallel,
                      e1.id(i).str() + " vs " + e2.id(j).str());
        }
      }
    }
  }
  Draft d;
  std::vector<Origin> origin;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    d.add({e1.id(i).prefixed("L"), e1.label(i)});
    origin.push_back({1, i});
  }
  for (std::size_t j = 0; j < e2.size(); ++j) {
    d.add({e2.id(j).prefixed("R"), e2.label(j)});
    origin.push_back({2, j});
  }
  const std::size_t n1 = e1.size();
  for (std::size_t i = 0; i < n1; ++i) {
    for (auto j : members(e1.below(i))) d.add_le(j, i);
    for (auto j : members(e1.conflicts(i))) d.add_conflict(i, j);
  }
  for (std::size_t i = 0; i < e2.size(); ++i) {
    for (auto j : members(e2.below(i))) d.add_le(n1 + j, n1 + i);
    for (auto j : members(e2.conflicts(i))) d.add_conflict(n1 + i, n1 + j);
  }
  std::vector<std::size_t> order;
  EventStructure out = EventStructure::finalize(std::move(d), e1.annotation_kind(), &order);
  out.set_config_cap(std::min(e1.config_cap(), e2.config_cap()));
  auto org = reorder(origin, order);
  if (e1.annotation_kind() == AnnotationKind::kOperators) {
    std::vector<Matrix> ops;
    for (const auto& o : org) ops.push_back(o.part == 1 ? e1.op(o.index) : e2.op(o.index));
    out.set_operators(std::move(ops), e1.dim());
  } else if (e1.annotation_kind() == AnnotationKind::kValuation) {
    Valuation v;
    for (const auto& x : configurations(out)) {
      v[x] = e1.value(part_set(x, org, 1, e1.size())) *
             e2.value(part_set(x, org, 2, e2.size()));
    }
    out.set_valuation(std::move(v));
  }
  return out;
}

EventStructure nd_compose(const EventStructure& e1, const EventStructure& e2) {
  same_kind(e1, e2);
  if (e1.annotation_kind() != AnnotationKind::kNone) {
    throw Error(ErrorCode::kAnnotationMismatch,
                "non-deterministic choice needs plain event structures");
  }
  Draft d;
  for (std::size_t i = 0; i < e1.size(); ++i) d.add({e1.id(i).prefixed("L"), e1.label(i)});
  for (std::size_t j = 0; j < e2.size(); ++j) d.add({e2.id(j).prefixed("R"), e2.label(j)});
  const std::size_t n1 = e1.size();
  for (std::size_t i = 0; i < n1; ++i) {
    for (auto j : members(e1.below(i))) d.add_le(j, i);
    for (auto j : members(e1.conflicts(i))) d.add_conflict(i, j);
  }
  for (std::size_t i = 0; i < e2.size(); ++i) {
    for (auto j : members(e2.below(i))) d.add_le(n1 + j, n1 + i);
    for (auto j : members(e2.conflicts(i))) d.add_conflict(n1 + i, n1 + j);
  }
  if (testing::mutation() != testing::Mutation::kDropNdCrossConflict) {
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < e2.size(); ++j) d.add_conflict(i, n1 + j);
    }
  }
  EventStructure out = EventStructure::finalize(std::move(d), AnnotationKind::kNone);
  out.set_config_cap(std::min(e1.config_cap(), e2.config_cap()));
  return out;
}

EventStructure prob_compose(const std::vector<Rational>& weights,
                            const std::vector<EventStructure>& parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw Error(ErrorCode::kWeightsNotNormalized, "one weight per part is required");
  }
  Rational total = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw Error(ErrorCode::kWeightsNotNormalized, "weights must be positive");
    total += w;
  }
  if (total != 1) {
    throw Error(ErrorCode::kWeightsNotNormalized, "weights sum to " + to_string(total));
  }
  for (const auto& p : parts) {
    if (p.annotation_kind() != AnnotationKind::kValuation) {
      throw Error(ErrorCode::kAnnotationMismatch, "probabilistic choice needs valuations");
    }
  }
  const bool with_tau = testing::mutation() != testing::Mutation::kDropProbTau;
  Draft d;
  std::vector<Origin> origin;
  std::size_t tau = kUnbounded;
  if (with_tau) {
    tau = d.add({EventId{{"tau"}}, Label::tau()});
    origin.push_back({-1, 0});
  }
  std::vector<std::size_t> base(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string tag =
        parts.size() == 2 ? (k == 0 ? "L" : "R") : "I" + std::to_string(k);
    base[k] = d.events.size();
    for (std::size_t i = 0; i < parts[k].size(); ++i) {
      d.add({parts[k].id(i).prefixed(tag), parts[k].label(i)});
      origin.push_back({static_cast<int>(k), i});
    }
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& p = parts[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (with_tau) d.add_le(tau, base[k] + i);
      for (auto j : members(p.below(i))) d.add_le(base[k] + j, base[k] + i);
      for (auto j : members(p.conflicts(i))) d.add_conflict(base[k] + i, base[k] + j);
      for (std::size_t k2 = k + 1; k2 < parts.size(); ++k2) {
        for (std::size_t j = 0; j < parts[k2].size(); ++j) {
          d.add_conflict(base[k] + i, base[k2] + j);
        }
      }
    }
  }
  std::vector<std::size_t> order;
  EventStructure out =
      EventStructure::finalize(std::move(d), AnnotationKind::kValuation, &order);
  for (const auto& p : parts) out.set_config_cap(std::min(out.config_cap(), p.config_cap()));
  auto org = reorder(origin, order);
  Valuation v;
  for (const auto& x : configurations(out)) {
    int part = -1;
    for (auto i : members(x)) {
      if (org[i].part >= 0) {
        part = org[i].part;
        break;
      }
    }
    if (part < 0) {
      v[x] = 1;
      continue;
    }
    v[x] = weights[part] * parts[part].value(
                               part_set(x, org, part, parts[part].size()));
  }
  out.set_valuation(std::move(v));
  return out;
}

EventStructure meas_compose(int qubit, const EventStructure& u1,
                            const EventStructure& u2, const QuantumContext& ctx) {
  for (const auto* u : {&u1, &u2}) {
    if (u->annotation_kind() != AnnotationKind::kOperators) {
      throw Error(ErrorCode::kAnnotationMismatch, "measurement needs operator maps");
    }
    if (u->dim() != ctx.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "measurement branch dimension");
    }
  }
  Draft d;
  std::vector<Origin> origin;
  const Label l0 = Label::tau0(qubit), l1 = Label::tau1(qubit);
  std::size_t t0 = d.add({EventId{{l0.str()}}, l0});
  origin.push_back({0, 0});
  std::size_t t1 = d.add({EventId{{l1.str()}}, l1});
  origin.push_back({0, 1});
  std::size_t b1 = d.events.size();
  for (std::size_t i = 0; i < u1.size(); ++i) {
    d.add({u1.id(i).prefixed("L"), u1.label(i)});
    origin.push_back({1, i});
  }
  std::size_t b2 = d.events.size();
  for (std::size_t i = 0; i < u2.size(); ++i) {
    d.add({u2.id(i).prefixed("R"), u2.label(i)});
    origin.push_back({2, i});
  }
  for (std::size_t i = 0; i < u1.size(); ++i) {
    d.add_le(t0, b1 + i);
    for (auto j : members(u1.below(i))) d.add_le(b1 + j, b1 + i);
    for (auto j : members(u1.conflicts(i))) d.add_conflict(b1 + i, b1 + j);
  }
  for (std::size_t i = 0; i < u2.size(); ++i) {
    d.add_le(t1, b2 + i);
    for (auto j : members(u2.below(i))) d.add_le(b2 + j, b2 + i);
    for (auto j : members(u2.conflicts(i))) d.add_conflict(b2 + i, b2 + j);
  }
  std::vector<std::size_t> left{t0}, right{t1};
  for (std::size_t i = 0; i < u1.size(); ++i) left.push_back(b1 + i);
  for (std::size_t i = 0; i < u2.size(); ++i) right.push_back(b2 + i);
  for (auto a : left) {
    for (auto b : right) d.add_conflict(a, b);
  }
  std::vector<std::size_t> order;
  EventStructure out =
      EventStructure::finalize(std::move(d), AnnotationKind::kOperators, &order);
  out.set_config_cap(std::min(u1.config_cap(), u2.config_cap()));
  std::vector<Matrix> ops;
  for (auto dix : order) {
    const Origin& o = origin[dix];
    if (o.part == 0) {
      ops.push_back(ctx.projector(qubit, static_cast<int>(o.index)));
    } else {
      ops.push_back(o.part == 1 ? u1.op(o.index) : u2.op(o.index));
    }
  }
  out.set_operators(std::move(ops), ctx.dim());
  return out;
}

namespace {

void require(bool ok, const Command& c, Flavor f) {
  if (!ok) {
    throw Error(ErrorCode::kFlavorMismatch,
                "'" + print(c) + "' cannot be read in the " + flavor_name(f) + " flavor");
  }
}

}  // namespace

EventStructure truncate(const EventStructure& es, std::size_t depth) {
  EventSet keep = es.empty_set();
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (es.below(i).count() <= depth) keep.set(i);
  }
  if (keep.count() == es.size()) {
    if (depth >= es.config_cap()) return es;
    EventStructure out = es;
    out.set_config_cap(depth);
    return out;
  }
  return restrict(es, keep, nullptr, depth);
}

EventStructure interpret(const Command& c, Flavor flavor, const Environment& env,
                         std::size_t unroll, const QuantumContext* ctx,
                         std::size_t max_depth) {
  auto sub = [&](const Command& x) {
    return interpret(x, flavor, env, unroll, ctx, max_depth);
  };
  auto cut = [&](const EventStructure& es) { return truncate(es, max_depth); };
  const bool quantum = flavor == Flavor::kQuantum;
  switch (c->kind) {
    case NodeKind::kSkip:
      return cut(atom(Label::sk(), flavor, ctx));
    case NodeKind::kAct:
      require(!quantum, c, flavor);
      return cut(atom(Label::act(c->name), flavor, ctx));
    case NodeKind::kGate:
      require(quantum, c, flavor);
      return cut(atom(Label::gate(c->name, c->qubits), flavor, ctx));
    case NodeKind::kSeq:
      return cut(seq_compose(sub(c->left), sub(c->right)));
    case NodeKind::kNd:
      require(flavor == Flavor::kNonDet, c, flavor);
      return cut(nd_compose(sub(c->left), sub(c->right)));
    case NodeKind::kProb:
      require(flavor == Flavor::kProb, c, flavor);
      return cut(prob_compose({c->prob, 1 - c->prob}, {sub(c->left), sub(c->right)}));
    case NodeKind::kPar:
      return cut(par_compose(sub(c->left), sub(c->right), ctx ? ctx->tol : kDefaultTolerance));
    case NodeKind::kMeas:
      require(quantum, c, flavor);
      return cut(meas_compose(c->qubits[0], sub(c->left), sub(c->right), *ctx));
    case NodeKind::kWhile:
    case NodeKind::kRec:
      require(quantum == (c->kind == NodeKind::kWhile), c, flavor);
      return fixpoint_chain(c, flavor, env, unroll, ctx, max_depth).back();
    case NodeKind::kVar: {
      auto it = env.find(c->name);
      if (it == env.end()) throw Error(ErrorCode::kUnboundVariable, c->name);
      if (it->second.annotation_kind() != annotation_for(flavor)) {
        throw Error(ErrorCode::kFlavorMismatch, "environment entry " + c->name);
      }
      return it->second;
    }
    case NodeKind::kCheck:
      return bottom(flavor, ctx);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown command node");
}

std::vector<EventStructure> fixpoint_chain(const Command& loop, Flavor flavor,
                                           const Environment& env, std::size_t k,
                                           const QuantumContext* ctx,
                                           std::size_t max_depth) {
  std::vector<EventStructure> chain{bottom(flavor, ctx)};
  if (loop->kind == NodeKind::kWhile) {
    if (!ctx) throw Error(ErrorCode::kInvalidInput, "quantum context required");
    const EventStructure body = interpret(loop->left, flavor, env, k, ctx, max_depth);
    const EventStructure stop = bottom(flavor, ctx);
    for (std::size_t i = 0; i < k; ++i) {
      chain.push_back(truncate(
          meas_compose(loop->qubits[0], stop,
                       truncate(seq_compose(body, chain.back()), max_depth), *ctx),
          max_depth));
    }
    return chain;
  }
  if (loop->kind != NodeKind::kRec) {
    throw Error(ErrorCode::kInvalidInput, "fixpoint_chain needs mu or while");
  }
  for (std::size_t i = 0; i < k; ++i) {
    Environment inner = env;
    inner.insert_or_assign(loop->name, chain.back());
    chain.push_back(interpret(loop->left, flavor, inner, k, ctx, max_depth));
  }
  return chain;
}

}  // namespace evsem
