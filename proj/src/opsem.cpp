#include "evsem/opsem.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace evsem {

namespace {

Label leaf_label(const Command& c) {
  switch (c->kind) {
    case NodeKind::kSkip: return Label::sk();
    case NodeKind::kAct: return Label::act(c->name);
    default: return Label::gate(c->name, c->qubits);
  }
}

// Continuation helpers shared by both engines.
Command after_left_seq(const Command& t, const Command& right) {
  return is_check(t) ? right : cmd::seq(t, right);
}

Command after_left_par(const Command& t, const Command& right) {
  return is_check(t) ? right : cmd::par(t, right);
}

Command after_right_par(const Command& left, const Command& t) {
  return is_check(t) ? left : cmd::par(left, t);
}

Command unfold(const Command& t, const Command& rec) {
  return is_check(t) ? t : substitute(t, rec->name, rec);
}

void raw_step(const Command& c, std::vector<Transition>& out) {
  switch (c->kind) {
    case NodeKind::kSkip:
    case NodeKind::kAct:
    case NodeKind::kGate:
      out.push_back({leaf_label(c), cmd::check()});
      return;
    case NodeKind::kSeq: {
      std::vector<Transition> inner;
      raw_step(c->left, inner);
      for (auto& t : inner) out.push_back({t.label, after_left_seq(t.target, c->right)});
      return;
    }
    case NodeKind::kNd:
      raw_step(c->left, out);
      raw_step(c->right, out);
      return;
    case NodeKind::kPar: {
      std::vector<Transition> l, r;
      raw_step(c->left, l);
      raw_step(c->right, r);
      for (auto& t : l) out.push_back({t.label, after_left_par(t.target, c->right)});
      for (auto& t : r) out.push_back({t.label, after_right_par(c->left, t.target)});
      return;
    }
    case NodeKind::kMeas:
      out.push_back({Label::tau0(c->qubits[0]), c->left});
      out.push_back({Label::tau1(c->qubits[0]), c->right});
      return;
    case NodeKind::kWhile:
      out.push_back({Label::tau0(c->qubits[0]), cmd::check()});
      out.push_back({Label::tau1(c->qubits[0]), cmd::seq(c->left, c)});
      return;
    case NodeKind::kRec: {
      std::vector<Transition> inner;
      raw_step(c->left, inner);
      for (auto& t : inner) out.push_back({t.label, unfold(t.target, c)});
      return;
    }
    case NodeKind::kProb:
      throw Error(ErrorCode::kFlavorMismatch, "probabilistic choice needs step_prob");
    case NodeKind::kVar:
    case NodeKind::kCheck:
      return;
  }
}

void raw_step_prob(const Command& c, std::vector<Distribution>& out) {
  auto lift = [](const std::vector<Distribution>& in,
                 const std::function<Command(const Command&)>& f,
                 std::vector<Distribution>& dst) {
    for (const auto& d : in) {
      Distribution m;
      for (const auto& b : d) m.push_back({b.p, b.label, f(b.target)});
      dst.push_back(std::move(m));
    }
  };
  switch (c->kind) {
    case NodeKind::kSkip:
    case NodeKind::kAct:
      out.push_back({{1, leaf_label(c), cmd::check()}});
      return;
    case NodeKind::kProb:
      out.push_back({{c->prob, Label::tau(), c->left},
                     {1 - c->prob, Label::tau(), c->right}});
      return;
    case NodeKind::kSeq: {
      std::vector<Distribution> inner;
      raw_step_prob(c->left, inner);
      lift(inner, [&](const Command& t) { return after_left_seq(t, c->right); }, out);
      return;
    }
    case NodeKind::kPar: {
      std::vector<Distribution> l, r;
      raw_step_prob(c->left, l);
      raw_step_prob(c->right, r);
      lift(l, [&](const Command& t) { return after_left_par(t, c->right); }, out);
      lift(r, [&](const Command& t) { return after_right_par(c->left, t); }, out);
      return;
    }
    case NodeKind::kRec: {
      std::vector<Distribution> inner;
      raw_step_prob(c->left, inner);
      lift(inner, [&](const Command& t) { return unfold(t, c); }, out);
      return;
    }
    case NodeKind::kVar:
    case NodeKind::kCheck:
      return;
    default:
      throw Error(ErrorCode::kFlavorMismatch,
                  "'" + print(c) + "' is not a probabilistic command");
  }
}

}  // namespace

std::vector<Transition> step(const Command& c, Flavor flavor) {
  if (flavor == Flavor::kProb) {
    throw Error(ErrorCode::kFlavorMismatch, "use step_prob for probabilistic programs");
  }
  std::vector<Transition> raw;
  raw_step(c, raw);
  std::map<std::pair<Label, std::string>, Transition> uniq;
  for (auto& t : raw) uniq.emplace(std::make_pair(t.label, print(t.target)), t);
  std::vector<Transition> out;
  for (auto& [key, t] : uniq) out.push_back(std::move(t));
  return out;
}

std::vector<Distribution> step_prob(const Command& c) {
  std::vector<Distribution> out;
  raw_step_prob(c, out);
  return out;
}

std::vector<WordEntry> words(const Command& c, Flavor flavor, std::size_t depth) {
  std::set<WordEntry> found;
  Word w;
  std::function<void(const Command&)> go = [&](const Command& cur) {
    if (w.size() >= depth) return;
    for (const auto& t : step(cur, flavor)) {
      w.push_back(t.label);
      found.insert({w, is_check(t.target)});
      go(t.target);
      w.pop_back();
    }
  };
  go(c);
  return {found.begin(), found.end()};
}

std::vector<WeightedWord> prob_words(const Command& c, std::size_t depth) {
  using Key = std::tuple<Word, std::vector<int>, Rational, bool, std::string>;
  std::map<Key, WeightedWord> found;
  Word w;
  std::vector<int> trace;
  std::function<void(const Command&, const Rational&)> go =
      [&](const Command& cur, const Rational& p) {
        if (w.size() >= depth) return;
        for (const auto& d : step_prob(cur)) {
          for (std::size_t i = 0; i < d.size(); ++i) {
            const Branch& b = d[i];
            Rational q = p * b.p;
            w.push_back(b.label);
            trace.push_back(static_cast<int>(i));
            std::string residual = print(b.target);
            bool terminal = is_check(b.target);
            found.emplace(Key{w, trace, q, terminal, residual},
                          WeightedWord{w, q, terminal, residual, trace});
            go(b.target, q);
            trace.pop_back();
            w.pop_back();
          }
        }
      };
  go(c, Rational(1));
  std::vector<WeightedWord> out;
  for (auto& [k, v] : found) out.push_back(std::move(v));
  return out;
}

Matrix apply_word(const Word& w, const Matrix& rho, const QuantumContext& ctx) {
  if (rho.rows() != ctx.dim() || rho.cols() != ctx.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "state vs register dimension");
  }
  Matrix out = rho;
  for (const auto& l : w) {
    Matrix a = ctx.label_operator(l);
    out = a * out * a.adjoint();
  }
  return out;
}

}  // namespace evsem
