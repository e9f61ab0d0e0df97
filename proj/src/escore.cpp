#include "evsem/escore.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace evsem {

std::string EventId::str() const {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += path[i];
  }
  return s;
}

EventId EventId::erased() const {
  EventId out;
  for (const auto& tag : path) {
    if (!is_copy_tag(tag)) out.path.push_back(tag);
  }
  return out;
}

EventId EventId::prefixed(const std::string& tag) const {
  EventId out;
  out.path.reserve(path.size() + 1);
  out.path.push_back(tag);
  out.path.insert(out.path.end(), path.begin(), path.end());
  return out;
}

const char* annotation_name(AnnotationKind k) {
  switch (k) {
    case AnnotationKind::kNone: return "none";
    case AnnotationKind::kValuation: return "valuation";
    case AnnotationKind::kOperators: return "operators";
  }
  return "?";
}

std::size_t Draft::add(Event e) {
  events.push_back(std::move(e));
  return events.size() - 1;
}

void Draft::sync() {
  const std::size_t n = events.size();
  if (below.size() == n && (n == 0 || below.front().size() == n)) return;
  for (auto& b : below) b.resize(n);
  for (auto& c : conflict) c.resize(n);
  for (std::size_t i = below.size(); i < n; ++i) {
    below.emplace_back(n);
    below.back().set(i);
    conflict.emplace_back(n);
  }
}

void Draft::add_conflicts(std::size_t a, const EventSet& set) {
  sync();
  conflict[a] |= set;
  for (auto j = set.find_first(); j != EventSet::npos; j = set.find_next(j)) {
    conflict[j].set(a);
  }
}

EventStructure EventStructure::finalize(Draft draft, AnnotationKind kind,
                                        std::vector<std::size_t>* order) {
  draft.sync();
  const std::size_t n = draft.events.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return draft.events[a].id < draft.events[b].id;
  });
  for (std::size_t k = 1; k < n; ++k) {
    if (draft.events[idx[k - 1]].id == draft.events[idx[k]].id) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate event id " + draft.events[idx[k]].id.str());
    }
  }
  std::vector<std::size_t> pos(n);
  for (std::size_t k = 0; k < n; ++k) pos[idx[k]] = k;

  EventStructure es;
  es.kind_ = kind;
  if (std::is_sorted(idx.begin(), idx.end())) {
    es.events_ = std::move(draft.events);
    es.below_ = std::move(draft.below);
    es.conflict_ = std::move(draft.conflict);
    es.above_.assign(n, EventSet(n));
    for (std::size_t k = 0; k < n; ++k) {
      for (auto j = es.below_[k].find_first(); j != EventSet::npos;
           j = es.below_[k].find_next(j)) {
        es.above_[j].set(k);
      }
    }
    if (kind == AnnotationKind::kValuation) es.valuation_[EventSet(n)] = 1;
    if (order) *order = std::move(idx);
    return es;
  }
  es.events_.reserve(n);
  es.below_.assign(n, EventSet(n));
  es.above_.assign(n, EventSet(n));
  es.conflict_.assign(n, EventSet(n));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t d = idx[k];
    es.events_.push_back(std::move(draft.events[d]));
    for (auto j = draft.below[d].find_first(); j != EventSet::npos;
         j = draft.below[d].find_next(j)) {
      es.below_[k].set(pos[j]);
      es.above_[pos[j]].set(k);
    }
    for (auto j = draft.conflict[d].find_first(); j != EventSet::npos;
         j = draft.conflict[d].find_next(j)) {
      es.conflict_[k].set(pos[j]);
    }
  }
  if (kind == AnnotationKind::kValuation) {
    es.valuation_[EventSet(n)] = 1;
  }
  if (order) *order = std::move(idx);
  return es;
}

EventStructure EventStructure::bottom(AnnotationKind kind, int dim) {
  EventStructure es = finalize(Draft{}, kind);
  es.dim_ = dim;
  return es;
}

std::optional<std::size_t> EventStructure::find(const EventId& id) const {
  auto it = std::lower_bound(
      events_.begin(), events_.end(), id,
      [](const Event& e, const EventId& key) { return e.id < key; });
  if (it == events_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - events_.begin());
}

Rational EventStructure::value(const EventSet& x) const {
  auto it = valuation_.find(x);
  return it == valuation_.end() ? Rational(0) : it->second;
}

void EventStructure::set_valuation(Valuation v) {
  kind_ = AnnotationKind::kValuation;
  valuation_ = std::move(v);
}

void EventStructure::set_config_cap(std::size_t cap) {
  config_cap_ = cap;
  std::erase_if(valuation_, [cap](const auto& kv) { return kv.first.count() > cap; });
}

void EventStructure::set_operators(std::vector<Matrix> ops, int dim) {
  if (ops.size() != size()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator map size");
  }
  kind_ = AnnotationKind::kOperators;
  ops_ = std::move(ops);
  dim_ = dim;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> members(const EventSet& x) {
  std::vector<std::size_t> out;
  for (auto i = x.find_first(); i != EventSet::npos; i = x.find_next(i)) {
    out.push_back(i);
  }
  return out;
}

EventSet make_set(const EventStructure& es,
                  std::initializer_list<std::size_t> ev) {
  EventSet x = es.empty_set();
  for (auto e : ev) x.set(e);
  return x;
}

std::string set_string(const EventStructure& es, const EventSet& x) {
  std::string s = "{";
  bool first = true;
  for (auto i : members(x)) {
    if (!first) s += ",";
    first = false;
    s += es.id(i).str();
  }
  return s + "}";
}

std::vector<Violation> validate(const EventStructure& es) {
  std::vector<Violation> out;
  const std::size_t n = es.size();
  auto name = [&](std::size_t i) { return es.id(i).str(); };
  for (std::size_t i = 0; i < n; ++i) {
    if (!es.leq(i, i)) out.push_back({"reflexivity", name(i)});
    if (es.conflict(i, i)) out.push_back({"irreflexive conflict", name(i)});
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && es.leq(i, j) && es.leq(j, i)) {
        out.push_back({"antisymmetry", name(i) + "," + name(j)});
      }
      if (es.conflict(i, j) != es.conflict(j, i)) {
        out.push_back({"conflict symmetry", name(i) + "," + name(j)});
      }
      if (es.leq(j, i) && !es.below(j).is_subset_of(es.below(i))) {
        out.push_back({"transitivity", name(j) + "<=" + name(i)});
      }
      if (es.conflict(i, j)) {
        for (auto k : members(es.above(j))) {
          if (!es.conflict(i, k)) {
            out.push_back(
                {"heredity", "(" + name(i) + "," + name(j) + "," + name(k) + ")"});
          }
        }
      }
    }
  }
  if (es.annotation_kind() == AnnotationKind::kOperators &&
      es.operators().size() != n) {
    out.push_back({"operator map", "size mismatch"});
  }
  return out;
}

bool is_configuration(const EventStructure& es, const EventSet& x) {
  if (x.size() != es.size()) return false;
  for (auto i : members(x)) {
    if (!es.below(i).is_subset_of(x)) return false;
    if (es.conflicts(i).intersects(x)) return false;
  }
  return true;
}

std::vector<std::size_t> enabled(const EventStructure& es, const EventSet& x) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (x.test(i)) continue;
    if (es.conflicts(i).intersects(x)) continue;
    EventSet pre = es.below(i);
    pre.reset(i);
    if (pre.is_subset_of(x)) out.push_back(i);
  }
  return out;
}

std::vector<EventSet> configurations(const EventStructure& es,
                                     std::size_t max_size) {
  max_size = std::min(max_size, es.config_cap());
  std::vector<EventSet> out;
  std::set<EventSet> level{es.empty_set()};
  for (std::size_t size = 0; !level.empty(); ++size) {
    out.insert(out.end(), level.begin(), level.end());
    if (size >= max_size) break;
    std::set<EventSet> next;
    for (const auto& x : level) {
      for (auto e : enabled(es, x)) {
        EventSet y = x;
        y.set(e);
        next.insert(std::move(y));
      }
    }
    level = std::move(next);
  }
  return out;
}

std::vector<EventSet> maximal_configs(const EventStructure& es) {
  std::vector<EventSet> out;
  for (auto& x : configurations(es)) {
    if (enabled(es, x).empty()) out.push_back(std::move(x));
  }
  return out;
}

namespace {

void chains_within(const EventStructure& es, const EventSet& target,
                   EventSet& cur, Chain& chain, std::vector<Chain>& out) {
  if (cur == target) {
    if (!chain.empty()) out.push_back(chain);
    return;
  }
  for (auto e : enabled(es, cur)) {
    if (!target.test(e)) continue;
    cur.set(e);
    chain.push_back(e);
    chains_within(es, target, cur, chain, out);
    chain.pop_back();
    cur.reset(e);
  }
}

void chains_upto(const EventStructure& es, std::size_t max_len, EventSet& cur,
                 Chain& chain,
                 const std::function<void(const Chain&, const EventSet&)>& f) {
  if (chain.size() >= max_len) return;
  for (auto e : enabled(es, cur)) {
    cur.set(e);
    chain.push_back(e);
    f(chain, cur);
    chains_upto(es, max_len, cur, chain, f);
    chain.pop_back();
    cur.reset(e);
  }
}

}  // namespace

std::vector<Chain> covering_chains(const EventStructure& es, const EventSet& x) {
  if (!is_configuration(es, x)) {
    throw Error(ErrorCode::kNotAConfiguration, set_string(es, x));
  }
  std::vector<Chain> out;
  EventSet cur = es.empty_set();
  Chain chain;
  chains_within(es, x, cur, chain, out);
  return out;
}

Word chain_word(const EventStructure& es, const Chain& chain) {
  Word w;
  w.reserve(chain.size());
  for (auto e : chain) w.push_back(es.label(e));
  return w;
}

void for_each_chain(const EventStructure& es, std::size_t max_len,
                    const std::function<void(const Chain&, const EventSet&)>& f) {
  EventSet cur = es.empty_set();
  Chain chain;
  chains_upto(es, max_len, cur, chain, f);
}

std::vector<std::size_t> init_events(const EventStructure& es) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (es.below(i).count() == 1) out.push_back(i);
  }
  return out;
}

bool concurrent(const EventStructure& es, std::size_t a, std::size_t b) {
  return !es.leq(a, b) && !es.leq(b, a) && !es.conflict(a, b);
}

std::vector<std::pair<std::size_t, std::size_t>> immediate_causality(
    const EventStructure& es) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < es.size(); ++j) {
    for (auto i : members(es.below(j))) {
      if (i == j) continue;
      if ((es.below(j) & es.above(i)).count() == 2) out.emplace_back(i, j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> minimal_conflict(
    const EventStructure& es) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (auto j : members(es.conflicts(i))) {
      if (j <= i) continue;
      bool minimal = true;
      for (auto a : members(es.below(i))) {
        EventSet hits = es.conflicts(a) & es.below(j);
        if (a == i) hits.reset(j);
        if (hits.any()) {
          minimal = false;
          break;
        }
      }
      if (minimal) out.emplace_back(i, j);
    }
  }
  return out;
}

EventStructure restrict(const EventStructure& es, const EventSet& keep,
                        const std::function<Rational(const EventSet&)>& value_of,
                        std::size_t config_cap) {
  auto kept = members(keep);
  Draft d;
  for (auto e : kept) d.add(es.event(e));
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = 0; b < kept.size(); ++b) {
      if (a != b && es.leq(kept[a], kept[b])) d.add_le(a, b);
      if (es.conflict(kept[a], kept[b])) d.add_conflict(a, b);
    }
  }
  // Ids stay sorted, so finalize keeps the order of `kept`.
  EventStructure out = EventStructure::finalize(std::move(d), es.annotation_kind());
  out.set_config_cap(std::min(es.config_cap(), config_cap));
  if (es.annotation_kind() == AnnotationKind::kOperators) {
    std::vector<Matrix> ops;
    for (auto e : kept) ops.push_back(es.op(e));
    out.set_operators(std::move(ops), es.dim());
  } else if (es.annotation_kind() == AnnotationKind::kValuation) {
    Valuation v;
    for (const auto& x : configurations(out)) {
      EventSet orig = es.empty_set();
      for (auto i : members(x)) orig.set(kept[i]);
      v[x] = value_of ? value_of(orig) : es.value(orig);
    }
    out.set_valuation(std::move(v));
  } else if (es.annotation_kind() == AnnotationKind::kNone) {
    // nothing to carry over
  }
  if (es.annotation_kind() == AnnotationKind::kOperators && out.empty()) {
    out.set_operators({}, es.dim());
  }
  return out;
}

EventStructure remove_initial(const EventStructure& es, std::size_t a) {
  if (a >= es.size() || es.below(a).count() != 1) {
    throw Error(ErrorCode::kNotInitial,
                a < es.size() ? es.id(a).str() : std::string("out of range"));
  }
  EventSet keep = ~es.conflicts(a);
  keep.reset(a);
  const std::size_t cap = es.config_cap() == kUnbounded ? kUnbounded : es.config_cap() - 1;
  if (es.annotation_kind() != AnnotationKind::kValuation) {
    return restrict(es, keep, nullptr, cap);
  }
  EventSet single = make_set(es, {a});
  Rational base = es.value(single);
  if (base == 0) throw Error(ErrorCode::kZeroProbabilityRemoval, es.id(a).str());
  return restrict(
      es, keep,
      [&](const EventSet& x) {
        EventSet y = x;
        y.set(a);
        return Rational(es.value(y) / base);
      },
      cap);
}

EventStructure remove_initial(const EventStructure& es, const EventId& id) {
  auto i = es.find(id);
  if (!i) throw Error(ErrorCode::kNotInitial, "no event " + id.str());
  return remove_initial(es, *i);
}

// ---------------------------------------------------------------------------
// Embedding search shared by the two copy-erasing comparisons.

namespace {

using Accept = std::function<bool(const std::vector<std::size_t>&)>;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Colour refinement over labels, causal neighbourhood and minimal conflict.
std::vector<std::uint64_t> colours(const EventStructure& es) {
  const std::size_t n = es.size();
  std::vector<std::uint64_t> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t h = hash_string(es.label(i).str());
    h = mix(h, es.below(i).count());
    h = mix(h, es.above(i).count());
    h = mix(h, es.conflicts(i).count());
    if (es.annotation_kind() == AnnotationKind::kValuation) {
      h = mix(h, hash_string(to_string(es.value(es.below(i)))));
    }
    c[i] = h;
  }
  auto imm = immediate_causality(es);
  auto minc = minimal_conflict(es);
  std::vector<std::vector<std::size_t>> pred(n), succ(n), conf(n);
  for (auto [a, b] : imm) {
    pred[b].push_back(a);
    succ[a].push_back(b);
  }
  for (auto [a, b] : minc) {
    conf[a].push_back(b);
    conf[b].push_back(a);
  }
  for (int round = 0; round < 3; ++round) {
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t h = c[i];
      for (auto* group : {&pred[i], &succ[i], &conf[i]}) {
        std::vector<std::uint64_t> ns;
        for (auto j : *group) ns.push_back(c[j]);
        std::sort(ns.begin(), ns.end());
        h = mix(h, 0xfeed);
        for (auto v : ns) h = mix(h, v);
      }
      next[i] = h;
    }
    c = std::move(next);
  }
  return c;
}

bool search_embedding(const EventStructure& a, const EventStructure& b,
                      bool bijective, double tol, const Accept& accept) {
  const std::size_t n = a.size(), m = b.size();
  if (bijective ? n != m : n > m) return false;
  const bool ops = a.annotation_kind() == AnnotationKind::kOperators;
  std::vector<std::uint64_t> ca, cb;
  if (bijective) {
    ca = colours(a);
    cb = colours(b);
    auto sa = ca, sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }
  std::vector<std::vector<std::size_t>> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (a.label(i) != b.label(j)) continue;
      if (bijective && ca[i] != cb[j]) continue;
      if (bijective && a.below(i).count() != b.below(j).count()) continue;
      if (ops && max_abs_diff(a.op(i), b.op(j)) > tol) continue;
      cand[i].push_back(j);
    }
    if (cand[i].empty()) return false;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a.below(x).count() < a.below(y).count();
  });
  std::vector<std::size_t> f(n, kUnbounded);
  std::vector<char> used(m, 0);

  std::function<bool(std::size_t)> go = [&](std::size_t depth) -> bool {
    if (depth == n) return accept(f);
    std::size_t i = order[depth];
    for (auto j : cand[i]) {
      if (used[j]) continue;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d) {
        std::size_t k = order[d], fk = f[k];
        ok = a.leq(k, i) == b.leq(fk, j) && a.leq(i, k) == b.leq(j, fk) &&
             a.conflict(i, k) == b.conflict(j, fk);
      }
      if (!ok) continue;
      f[i] = j;
      used[j] = 1;
      if (go(depth + 1)) return true;
      used[j] = 0;
      f[i] = kUnbounded;
    }
    return false;
  };
  return go(0);
}

EventSet image(const EventStructure& b, const EventSet& x,
               const std::vector<std::size_t>& f) {
  EventSet y = b.empty_set();
  for (auto i : members(x)) y.set(f[i]);
  return y;
}

void require_same_kind(const EventStructure& a, const EventStructure& b) {
  if (a.annotation_kind() != b.annotation_kind()) {
    throw Error(ErrorCode::kAnnotationMismatch,
                std::string(annotation_name(a.annotation_kind())) + " vs " +
                    annotation_name(b.annotation_kind()));
  }
  if (a.annotation_kind() == AnnotationKind::kOperators && a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator dimensions differ");
  }
}

}  // namespace

bool order_sub(const EventStructure& a, const EventStructure& b, double tol) {
  require_same_kind(a, b);
  if (a.annotation_kind() != AnnotationKind::kValuation) {
    return search_embedding(a, b, false, tol, [](const auto&) { return true; });
  }
  auto confs = configurations(a);
  return search_embedding(a, b, false, tol, [&](const std::vector<std::size_t>& f) {
    for (const auto& x : confs) {
      EventSet y = image(b, x, f);
      for (auto j : members(y)) y |= b.below(j);
      if (!is_configuration(b, y)) continue;
      if (a.value(x) < b.value(y)) return false;
    }
    return true;
  });
}

bool equivalent(const EventStructure& a, const EventStructure& b, double tol) {
  require_same_kind(a, b);
  if (a.annotation_kind() != AnnotationKind::kValuation) {
    return search_embedding(a, b, true, tol, [](const auto&) { return true; });
  }
  auto confs = configurations(a);
  return search_embedding(a, b, true, tol, [&](const std::vector<std::size_t>& f) {
    for (const auto& x : confs) {
      if (a.value(x) != b.value(image(b, x, f))) return false;
    }
    return true;
  });
}

bool order_unroll(const EventStructure& a, const EventStructure& b, double tol) {
  require_same_kind(a, b);
  std::vector<std::size_t> f(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto j = b.find(a.id(i));
    if (!j || b.label(*j) != a.label(i)) return false;
    f[i] = *j;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a.leq(i, k) != b.leq(f[i], f[k])) return false;
      if (a.conflict(i, k) != b.conflict(f[i], f[k])) return false;
    }
  }
  if (a.annotation_kind() == AnnotationKind::kOperators) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (max_abs_diff(a.op(i), b.op(f[i])) > tol) return false;
    }
  }
  if (a.annotation_kind() == AnnotationKind::kValuation) {
    for (const auto& x : configurations(a)) {
      if (a.value(x) != b.value(image(b, x, f))) return false;
    }
  }
  return true;
}

EventStructure chain_lub(const std::vector<EventStructure>& chain, double tol) {
  if (chain.empty()) throw Error(ErrorCode::kNotAChain, "empty chain");
  for (std::size_t k = 1; k < chain.size(); ++k) {
    if (!order_unroll(chain[k - 1], chain[k], tol)) {
      throw Error(ErrorCode::kNotAChain,
                  "element " + std::to_string(k - 1) + " is not below its successor");
    }
  }
  std::map<EventId, Label> all;
  for (const auto& es : chain) {
    for (const auto& e : es.events()) all.emplace(e.id, e.label);
  }
  Draft d;
  std::map<EventId, std::size_t> at;
  for (const auto& [id, label] : all) at[id] = d.add({id, label});
  for (const auto& es : chain) {
    for (std::size_t i = 0; i < es.size(); ++i) {
      for (std::size_t j = 0; j < es.size(); ++j) {
        if (i != j && es.leq(i, j)) d.add_le(at[es.id(i)], at[es.id(j)]);
        if (es.conflict(i, j)) d.add_conflict(at[es.id(i)], at[es.id(j)]);
      }
    }
  }
  const auto kind = chain.front().annotation_kind();
  EventStructure out = EventStructure::finalize(std::move(d), kind);
  std::size_t cap = kUnbounded;
  for (const auto& es : chain) cap = std::min(cap, es.config_cap());
  out.set_config_cap(cap);
  auto owner = [&](const std::vector<std::size_t>& evs)
      -> std::pair<const EventStructure*, EventSet> {
    for (const auto& es : chain) {
      EventSet x = es.empty_set();
      bool inside = true;
      for (auto e : evs) {
        auto j = es.find(out.id(e));
        if (!j) {
          inside = false;
          break;
        }
        x.set(*j);
      }
      if (inside) return {&es, x};
    }
    return {nullptr, {}};
  };
  if (kind == AnnotationKind::kOperators) {
    std::vector<Matrix> ops;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto [es, x] = owner({i});
      ops.push_back(es->op(x.find_first()));
    }
    out.set_operators(std::move(ops), chain.front().dim());
  } else if (kind == AnnotationKind::kValuation) {
    Valuation v;
    for (const auto& x : configurations(out)) {
      auto [es, y] = owner(members(x));
      v[x] = es ? es->value(y) : Rational(0);
    }
    out.set_valuation(std::move(v));
  }
  return out;
}

std::string fingerprint(const EventStructure& es, const EventSet& x) {
  std::vector<std::string> ids;
  for (auto i : members(x)) ids.push_back(es.id(i).erased().str());
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : ids) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Export

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const EventStructure& es) {
  using nlohmann::json;
  json events = json::array(), le = json::array(), conflict = json::array(),
       valuation = json::array(), ops = json::array();
  for (const auto& e : es.events()) {
    events.push_back({{"id", e.id.str()}, {"label", e.label.str()}});
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (i != j && es.leq(i, j)) le.push_back({es.id(i).str(), es.id(j).str()});
      if (i < j && es.conflict(i, j)) {
        conflict.push_back({es.id(i).str(), es.id(j).str()});
      }
    }
  }
  if (es.annotation_kind() == AnnotationKind::kValuation) {
    for (const auto& x : configurations(es)) {
      json ids = json::array();
      for (auto i : members(x)) ids.push_back(es.id(i).str());
      valuation.push_back({ids, to_string(es.value(x))});
    }
  }
  if (es.annotation_kind() == AnnotationKind::kOperators) {
    for (std::size_t i = 0; i < es.size(); ++i) {
      ops.push_back({es.id(i).str(), matrix_to_json(es.op(i))});
    }
  }
  return json{{"events", events},
              {"le", le},
              {"conflict", conflict},
              {"valuation", valuation},
              {"ops", ops}};
}

std::string to_dot(const EventStructure& es) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "digraph es {\n  node [shape=plaintext];\n";
  for (std::size_t i = 0; i < es.size(); ++i) {
    os << "  e" << i << " [label=" << quote(es.label(i).str())
       << ", tooltip=" << quote(es.id(i).str()) << "];\n";
  }
  for (auto [a, b] : immediate_causality(es)) {
    os << "  e" << a << " -> e" << b << ";\n";
  }
  for (auto [a, b] : minimal_conflict(es)) {
    os << "  e" << a << " -> e" << b << " [style=dashed, dir=none];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace evsem
