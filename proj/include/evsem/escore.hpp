#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <json.hpp>

#include "evsem/common.hpp"
#include "evsem/lang.hpp"
#include "evsem/linalg.hpp"

namespace evsem {

// A set of events of one structure, indexed by event position.
using EventSet = boost::dynamic_bitset<>;

struct EventId {
  std::vector<std::string> path;

  std::string str() const;
  EventId erased() const;  // drops every Copy# tag
  EventId prefixed(const std::string& tag) const;

  auto operator<=>(const EventId&) const = default;
  bool operator==(const EventId&) const = default;
};

inline bool is_copy_tag(const std::string& tag) {
  return tag.rfind("Copy#", 0) == 0;
}

struct Event {
  EventId id;
  Label label;
};

enum class AnnotationKind { kNone, kValuation, kOperators };

const char* annotation_name(AnnotationKind k);

// Extensional configuration-valuation. Configurations missing from the
// table are valued 0.
using Valuation = std::map<EventSet, Rational>;

// Event structure under construction. Relations are indexed by position in
// `events`; `below[i]` holds every j <= i (including i itself) and `conflict`
// is symmetric. Relation rows are sized on first use, so add all events
// before relating them.
struct Draft {
  std::vector<Event> events;
  std::vector<EventSet> below;
  std::vector<EventSet> conflict;

  std::size_t add(Event e);
  void add_le(std::size_t lo, std::size_t hi) {
    sync();
    below[hi].set(lo);
  }
  void add_conflict(std::size_t a, std::size_t b) {
    sync();
    conflict[a].set(b);
    conflict[b].set(a);
  }
  // Conflict between `a` and every member of `set`, in both directions.
  void add_conflicts(std::size_t a, const EventSet& set);
  void sync();
};

class EventStructure {
 public:
  EventStructure() = default;

  // Sorts events by id. `order[k]` receives the draft index of final event k.
  static EventStructure finalize(Draft draft, AnnotationKind kind,
                                 std::vector<std::size_t>* order = nullptr);
  static EventStructure bottom(AnnotationKind kind, int dim = 1);

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const std::vector<Event>& events() const { return events_; }
  const Event& event(std::size_t i) const { return events_[i]; }
  const Label& label(std::size_t i) const { return events_[i].label; }
  const EventId& id(std::size_t i) const { return events_[i].id; }
  std::optional<std::size_t> find(const EventId& id) const;

  bool leq(std::size_t a, std::size_t b) const { return below_[b].test(a); }
  bool conflict(std::size_t a, std::size_t b) const {
    return conflict_[a].test(b);
  }
  const EventSet& below(std::size_t e) const { return below_[e]; }
  const EventSet& above(std::size_t e) const { return above_[e]; }
  const EventSet& conflicts(std::size_t e) const { return conflict_[e]; }
  EventSet empty_set() const { return EventSet(size()); }

  AnnotationKind annotation_kind() const { return kind_; }
  const Valuation& valuation() const { return valuation_; }
  Rational value(const EventSet& x) const;
  const std::vector<Matrix>& operators() const { return ops_; }
  const Matrix& op(std::size_t e) const { return ops_[e]; }
  int dim() const { return dim_; }

  void set_valuation(Valuation v);
  void set_operators(std::vector<Matrix> ops, int dim);

  // Configurations larger than the cap are neither enumerated nor valued.
  // Truncated structures use it to stay polynomial under parallel composition.
  std::size_t config_cap() const { return config_cap_; }
  void set_config_cap(std::size_t cap);

 private:
  std::vector<Event> events_;
  std::vector<EventSet> below_;
  std::vector<EventSet> above_;
  std::vector<EventSet> conflict_;
  AnnotationKind kind_ = AnnotationKind::kNone;
  Valuation valuation_;
  std::vector<Matrix> ops_;
  int dim_ = 1;
  std::size_t config_cap_ = std::numeric_limits<std::size_t>::max();
};

struct Violation {
  std::string rule;
  std::string witness;
};

std::vector<Violation> validate(const EventStructure& es);

EventSet make_set(const EventStructure& es, std::initializer_list<std::size_t> ev);
std::vector<std::size_t> members(const EventSet& x);
std::string set_string(const EventStructure& es, const EventSet& x);

bool is_configuration(const EventStructure& es, const EventSet& x);
std::vector<std::size_t> enabled(const EventStructure& es, const EventSet& x);

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

// Sorted by size, then by bitset order. Never larger than es.config_cap().
std::vector<EventSet> configurations(const EventStructure& es,
                                     std::size_t max_size = kUnbounded);
std::vector<EventSet> maximal_configs(const EventStructure& es);

using Chain = std::vector<std::size_t>;
std::vector<Chain> covering_chains(const EventStructure& es, const EventSet& x);
Word chain_word(const EventStructure& es, const Chain& chain);

// Visits every non-empty covering chain of length <= max_len starting at the
// empty configuration, together with the configuration it reaches.
void for_each_chain(const EventStructure& es, std::size_t max_len,
                    const std::function<void(const Chain&, const EventSet&)>& f);

std::vector<std::size_t> init_events(const EventStructure& es);
bool concurrent(const EventStructure& es, std::size_t a, std::size_t b);
std::vector<std::pair<std::size_t, std::size_t>> immediate_causality(
    const EventStructure& es);
// Each unordered pair once, smaller index first.
std::vector<std::pair<std::size_t, std::size_t>> minimal_conflict(
    const EventStructure& es);

// Sub-structure on `keep`. The valuation of a new configuration is
// `value_of(original configuration)`; when absent the old value is reused.
EventStructure restrict(
    const EventStructure& es, const EventSet& keep,
    const std::function<Rational(const EventSet&)>& value_of = nullptr,
    std::size_t config_cap = kUnbounded);

EventStructure remove_initial(const EventStructure& es, std::size_t e);
EventStructure remove_initial(const EventStructure& es, const EventId& id);

bool order_sub(const EventStructure& a, const EventStructure& b,
               double tol = kDefaultTolerance);
bool equivalent(const EventStructure& a, const EventStructure& b,
                double tol = kDefaultTolerance);
bool order_unroll(const EventStructure& a, const EventStructure& b,
                  double tol = kDefaultTolerance);
EventStructure chain_lub(const std::vector<EventStructure>& chain,
                         double tol = kDefaultTolerance);

std::string fingerprint(const EventStructure& es, const EventSet& x);

nlohmann::json to_json(const EventStructure& es);
nlohmann::json matrix_to_json(const Matrix& m);
std::string to_dot(const EventStructure& es);

}  // namespace evsem
