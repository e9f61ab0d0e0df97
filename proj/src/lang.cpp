#include "evsem/lang.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace evsem {

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::kNonDet: return "nondet";
    case Flavor::kProb: return "prob";
    case Flavor::kQuantum: return "quantum";
  }
  return "?";
}

Flavor parse_flavor(const std::string& name) {
  if (name == "nondet") return Flavor::kNonDet;
  if (name == "prob") return Flavor::kProb;
  if (name == "quantum") return Flavor::kQuantum;
  throw Error(ErrorCode::kInvalidInput, "unknown flavor '" + name + "'");
}

std::string Label::str() const {
  auto wires = [this] {
    std::string s = "(";
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(qubits[i]);
    }
    return s + ")";
  };
  switch (kind) {
    case Kind::kSk: return "sk";
    case Kind::kAct: return name;
    case Kind::kTau: return "tau";
    case Kind::kTau0: return "P0" + wires();
    case Kind::kTau1: return "P1" + wires();
    case Kind::kGate: return name + wires();
  }
  return "?";
}

std::string word_string(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += w[i].str();
  }
  return s;
}

const GateSignature& builtin_gate_signature() {
  static const GateSignature sig = {
      {"I", 1}, {"X", 1}, {"Y", 1}, {"Z", 1}, {"H", 1}, {"S", 1},
      {"T", 1}, {"CNOT", 2}, {"CZ", 2}, {"SWAP", 2}};
  return sig;
}

namespace cmd {

namespace {
Command make(CommandNode n) {
  return std::make_shared<const CommandNode>(std::move(n));
}
}  // namespace

Command skip() { return make({NodeKind::kSkip, "", {}, 0, nullptr, nullptr}); }
Command act(const std::string& name) {
  return make({NodeKind::kAct, name, {}, 0, nullptr, nullptr});
}
Command gate(const std::string& name, std::vector<int> qubits) {
  return make({NodeKind::kGate, name, std::move(qubits), 0, nullptr, nullptr});
}
Command seq(Command a, Command b) {
  return make({NodeKind::kSeq, "", {}, 0, std::move(a), std::move(b)});
}
Command nd(Command a, Command b) {
  return make({NodeKind::kNd, "", {}, 0, std::move(a), std::move(b)});
}
Command prob(const Rational& p, Command a, Command b) {
  return make({NodeKind::kProb, "", {}, p, std::move(a), std::move(b)});
}
Command par(Command a, Command b) {
  return make({NodeKind::kPar, "", {}, 0, std::move(a), std::move(b)});
}
Command meas(int qubit, Command a, Command b) {
  return make({NodeKind::kMeas, "", {qubit}, 0, std::move(a), std::move(b)});
}
Command loop(int qubit, Command body) {
  return make({NodeKind::kWhile, "", {qubit}, 0, std::move(body), nullptr});
}
Command rec(const std::string& var, Command body) {
  return make({NodeKind::kRec, var, {}, 0, std::move(body), nullptr});
}
Command var(const std::string& name) {
  return make({NodeKind::kVar, name, {}, 0, nullptr, nullptr});
}
Command check() { return make({NodeKind::kCheck, "", {}, 0, nullptr, nullptr}); }

}  // namespace cmd

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok {
  kIdent, kNat, kLParen, kRParen, kLBrace, kRBrace, kSemi, kPlus, kProbOp,
  kPar, kDot, kComma, kEnd
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    unsigned char ch = src[i];
    if (std::isspace(ch)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(ch) || ch == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) ||
              src[i] == '_')) {
        ++i;
      }
      out.push_back({Tok::kIdent, src.substr(start, i - start), start});
      continue;
    }
    if (std::isdigit(ch)) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
        ++i;
      out.push_back({Tok::kNat, src.substr(start, i - start), start});
      continue;
    }
    switch (ch) {
      case '(': out.push_back({Tok::kLParen, "(", start}); ++i; continue;
      case ')': out.push_back({Tok::kRParen, ")", start}); ++i; continue;
      case '{': out.push_back({Tok::kLBrace, "{", start}); ++i; continue;
      case '}': out.push_back({Tok::kRBrace, "}", start}); ++i; continue;
      case ';': out.push_back({Tok::kSemi, ";", start}); ++i; continue;
      case '.': out.push_back({Tok::kDot, ".", start}); ++i; continue;
      case ',': out.push_back({Tok::kComma, ",", start}); ++i; continue;
      case '|':
        if (i + 1 < src.size() && src[i + 1] == '|') {
          out.push_back({Tok::kPar, "||", start});
          i += 2;
          continue;
        }
        throw SyntaxError(start, "expected '||'");
      case '+': {
        if (i + 1 < src.size() && src[i + 1] == '[') {
          auto close = src.find(']', i + 2);
          if (close == std::string::npos) {
            throw SyntaxError(start, "unterminated '+['");
          }
          std::string body = src.substr(i + 2, close - i - 2);
          body.erase(std::remove_if(body.begin(), body.end(),
                                    [](unsigned char c) { return std::isspace(c); }),
                     body.end());
          out.push_back({Tok::kProbOp, body, start});
          i = close + 1;
          continue;
        }
        out.push_back({Tok::kPlus, "+", start});
        ++i;
        continue;
      }
      default:
        throw SyntaxError(start, std::string("unexpected character '") +
                                     static_cast<char>(ch) + "'");
    }
  }
  out.push_back({Tok::kEnd, "", src.size()});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "skip" || s == "meas" || s == "else" || s == "while" ||
         s == "mu";
}

class Parser {
 public:
  Parser(const std::string& src, const GateSignature& gates)
      : toks_(tokenize(src)), gates_(gates) {}

  Command program() {
    Command c = command();
    if (auto op = binary_operator()) c = binary(*op, c);
    if (peek().kind != Tok::kEnd) {
      throw SyntaxError(peek().pos, "unexpected '" + peek().text +
                                        "'; binary operators need parentheses");
    }
    return c;
  }

 private:
  const Token& peek() const { return toks_[at_]; }
  const Token& next() { return toks_[at_++]; }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw SyntaxError(peek().pos, std::string("expected ") + what);
    }
    return next();
  }

  int nat() {
    const Token& t = expect(Tok::kNat, "a qubit number");
    try {
      return std::stoi(t.text);
    } catch (const std::exception&) {
      throw SyntaxError(t.pos, "qubit number out of range");
    }
  }

  std::optional<Token> binary_operator() {
    switch (peek().kind) {
      case Tok::kSemi:
      case Tok::kPlus:
      case Tok::kProbOp:
      case Tok::kPar:
        return next();
      default:
        return std::nullopt;
    }
  }

  Command binary(const Token& op, Command lhs) {
    Command rhs = command();
    switch (op.kind) {
      case Tok::kSemi: return cmd::seq(lhs, rhs);
      case Tok::kPlus: return cmd::nd(lhs, rhs);
      case Tok::kPar: return cmd::par(lhs, rhs);
      case Tok::kProbOp: {
        Rational p;
        try {
          p = parse_rational(op.text);
        } catch (const Error&) {
          throw SyntaxError(op.pos, "bad probability '" + op.text + "'");
        }
        return cmd::prob(p, lhs, rhs);
      }
      default:
        throw SyntaxError(op.pos, "expected a binary operator");
    }
  }

  Command command() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kLParen: {
        next();
        Command c = command();
        if (auto op = binary_operator()) c = binary(*op, c);
        expect(Tok::kRParen, "')'");
        return c;
      }
      case Tok::kIdent:
        return word_command();
      default:
        throw SyntaxError(t.pos, t.kind == Tok::kEnd
                                     ? "unexpected end of input"
                                     : "unexpected '" + t.text + "'");
    }
  }

  Command word_command() {
    Token t = next();
    if (t.text == "skip") return cmd::skip();
    if (t.text == "meas") {
      int q = nat();
      expect(Tok::kLBrace, "'{'");
      Command a = command_in_braces();
      Token e = expect(Tok::kIdent, "'else'");
      if (e.text != "else") throw SyntaxError(e.pos, "expected 'else'");
      expect(Tok::kLBrace, "'{'");
      Command b = command_in_braces();
      return cmd::meas(q, a, b);
    }
    if (t.text == "while") {
      int q = nat();
      expect(Tok::kLBrace, "'{'");
      return cmd::loop(q, command_in_braces());
    }
    if (t.text == "mu") {
      Token v = expect(Tok::kIdent, "a variable name");
      if (is_keyword(v.text)) throw SyntaxError(v.pos, "keyword as variable");
      expect(Tok::kDot, "'.'");
      return cmd::rec(v.text, command());
    }
    if (t.text == "else") throw SyntaxError(t.pos, "unexpected 'else'");
    if (peek().kind == Tok::kLParen) {
      next();
      std::vector<int> qs{nat()};
      while (peek().kind == Tok::kComma) {
        next();
        qs.push_back(nat());
      }
      expect(Tok::kRParen, "')'");
      if (!gates_.count(t.text)) {
        throw Error(ErrorCode::kUnknownGate,
                    "'" + t.text + "' at offset " + std::to_string(t.pos));
      }
      return cmd::gate(t.text, std::move(qs));
    }
    if (std::isupper(static_cast<unsigned char>(t.text[0]))) {
      return cmd::var(t.text);
    }
    return cmd::act(t.text);
  }

  Command command_in_braces() {
    Command c = command();
    if (auto op = binary_operator()) c = binary(*op, c);
    expect(Tok::kRBrace, "'}'");
    return c;
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
  const GateSignature& gates_;
};

void collect_fvar(const Command& c, std::set<std::string>& bound,
                  std::set<std::string>& out) {
  if (!c) return;
  if (c->kind == NodeKind::kVar) {
    if (!bound.count(c->name)) out.insert(c->name);
    return;
  }
  if (c->kind == NodeKind::kRec) {
    bool fresh = bound.insert(c->name).second;
    collect_fvar(c->left, bound, out);
    if (fresh) bound.erase(c->name);
    return;
  }
  collect_fvar(c->left, bound, out);
  collect_fvar(c->right, bound, out);
}

void collect_bvar(const Command& c, std::set<std::string>& out) {
  if (!c) return;
  if (c->kind == NodeKind::kRec) out.insert(c->name);
  collect_bvar(c->left, out);
  collect_bvar(c->right, out);
}

void collect_qvar(const Command& c, std::set<int>& out) {
  if (!c) return;
  if (c->kind == NodeKind::kGate || c->kind == NodeKind::kMeas ||
      c->kind == NodeKind::kWhile) {
    out.insert(c->qubits.begin(), c->qubits.end());
  }
  collect_qvar(c->left, out);
  collect_qvar(c->right, out);
}

bool allowed(NodeKind k, Flavor f) {
  switch (k) {
    case NodeKind::kSkip:
    case NodeKind::kSeq:
    case NodeKind::kPar:
      return true;
    case NodeKind::kAct:
    case NodeKind::kRec:
    case NodeKind::kVar:
      return f != Flavor::kQuantum;
    case NodeKind::kNd:
      return f == Flavor::kNonDet;
    case NodeKind::kProb:
      return f == Flavor::kProb;
    case NodeKind::kGate:
    case NodeKind::kMeas:
    case NodeKind::kWhile:
      return f == Flavor::kQuantum;
    case NodeKind::kCheck:
      return false;
  }
  return false;
}

const char* node_name(NodeKind k) {
  switch (k) {
    case NodeKind::kSkip: return "skip";
    case NodeKind::kAct: return "action";
    case NodeKind::kGate: return "gate";
    case NodeKind::kSeq: return "';'";
    case NodeKind::kNd: return "'+'";
    case NodeKind::kProb: return "'+[p]'";
    case NodeKind::kPar: return "'||'";
    case NodeKind::kMeas: return "meas";
    case NodeKind::kWhile: return "while";
    case NodeKind::kRec: return "mu";
    case NodeKind::kVar: return "variable";
    case NodeKind::kCheck: return "check";
  }
  return "?";
}

void well_formed(const Command& c, Flavor flavor, const GateSignature& gates,
                 std::vector<std::string>& scope) {
  if (!allowed(c->kind, flavor)) {
    throw Error(ErrorCode::kFlavorViolation,
                std::string(node_name(c->kind)) + " is not allowed in " +
                    flavor_name(flavor) + " programs");
  }
  switch (c->kind) {
    case NodeKind::kVar:
      if (std::find(scope.begin(), scope.end(), c->name) == scope.end()) {
        throw Error(ErrorCode::kUnboundVariable, c->name);
      }
      return;
    case NodeKind::kGate: {
      auto it = gates.find(c->name);
      if (it == gates.end()) throw Error(ErrorCode::kUnknownGate, c->name);
      if (static_cast<int>(c->qubits.size()) != it->second) {
        throw Error(ErrorCode::kUnknownGate,
                    c->name + " expects " + std::to_string(it->second) +
                        " qubit(s)");
      }
      std::set<int> seen(c->qubits.begin(), c->qubits.end());
      if (seen.size() != c->qubits.size() || c->qubits.empty()) {
        throw Error(ErrorCode::kInvalidInput,
                    c->name + " applied to repeated qubits");
      }
      return;
    }
    case NodeKind::kProb:
      if (c->prob <= 0 || c->prob >= 1) {
        throw Error(ErrorCode::kInvalidInput,
                    "probability " + to_string(c->prob) +
                        " is outside (0,1)");
      }
      break;
    case NodeKind::kSeq:
      if (!fvar(c->left).empty() || !bvar(c->left).empty()) {
        throw Error(ErrorCode::kSeqLeftRecursion,
                    "left operand of ';' mentions a recursion variable: " +
                        print(c->left));
      }
      break;
    case NodeKind::kPar:
      if (flavor == Flavor::kQuantum) {
        auto qa = qvar(c->left), qb = qvar(c->right);
        for (int q : qa) {
          if (qb.count(q)) {
            throw Error(ErrorCode::kSharedQubitInPar,
                        "qubit " + std::to_string(q) + " used on both sides");
          }
        }
      }
      break;
    case NodeKind::kRec:
      scope.push_back(c->name);
      well_formed(c->left, flavor, gates, scope);
      scope.pop_back();
      return;
    default:
      break;
  }
  if (c->left) well_formed(c->left, flavor, gates, scope);
  if (c->right) well_formed(c->right, flavor, gates, scope);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

Command rebuild(const Command& c, Command left, Command right) {
  auto n = *c;
  n.left = std::move(left);
  n.right = std::move(right);
  return std::make_shared<const CommandNode>(std::move(n));
}

}  // namespace

Command parse(const std::string& source, Flavor flavor,
              const GateSignature& gates) {
  Parser p(source, gates);
  Command c = p.program();
  check_well_formed(c, flavor, gates);
  return c;
}

void check_well_formed(const Command& c, Flavor flavor,
                       const GateSignature& gates) {
  std::vector<std::string> scope;
  well_formed(c, flavor, gates, scope);
}

std::string print(const Command& c) {
  switch (c->kind) {
    case NodeKind::kSkip: return "skip";
    case NodeKind::kAct: return c->name;
    case NodeKind::kGate: return Label::gate(c->name, c->qubits).str();
    case NodeKind::kSeq:
      return "(" + print(c->left) + " ; " + print(c->right) + ")";
    case NodeKind::kNd:
      return "(" + print(c->left) + " + " + print(c->right) + ")";
    case NodeKind::kProb:
      return "(" + print(c->left) + " +[" + to_string(c->prob) + "] " +
             print(c->right) + ")";
    case NodeKind::kPar:
      return "(" + print(c->left) + " || " + print(c->right) + ")";
    case NodeKind::kMeas:
      return "meas " + std::to_string(c->qubits[0]) + " { " + print(c->left) +
             " } else { " + print(c->right) + " }";
    case NodeKind::kWhile:
      return "while " + std::to_string(c->qubits[0]) + " { " +
             print(c->left) + " }";
    case NodeKind::kRec: return "mu " + c->name + " . " + print(c->left);
    case NodeKind::kVar: return c->name;
    case NodeKind::kCheck: return "done";
  }
  return "?";
}

bool same_command(const Command& a, const Command& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name || a->qubits != b->qubits ||
      a->prob != b->prob) {
    return false;
  }
  return same_command(a->left, b->left) && same_command(a->right, b->right);
}

bool is_check(const Command& c) { return c->kind == NodeKind::kCheck; }

std::set<std::string> fvar(const Command& c) {
  std::set<std::string> bound, out;
  collect_fvar(c, bound, out);
  return out;
}

std::set<std::string> bvar(const Command& c) {
  std::set<std::string> out;
  collect_bvar(c, out);
  return out;
}

std::set<int> qvar(const Command& c) {
  std::set<int> out;
  collect_qvar(c, out);
  return out;
}

bool has_loops(const Command& c) {
  if (!c) return false;
  if (c->kind == NodeKind::kRec || c->kind == NodeKind::kWhile) return true;
  return has_loops(c->left) || has_loops(c->right);
}

int operator_count(const Command& c) {
  if (!c) return 0;
  int self = 0;
  switch (c->kind) {
    case NodeKind::kSeq:
    case NodeKind::kNd:
    case NodeKind::kProb:
    case NodeKind::kPar:
    case NodeKind::kMeas:
    case NodeKind::kWhile:
    case NodeKind::kRec:
      self = 1;
      break;
    default:
      break;
  }
  return self + operator_count(c->left) + operator_count(c->right);
}

Command substitute(const Command& c, const std::string& x, const Command& r) {
  switch (c->kind) {
    case NodeKind::kVar:
      return c->name == x ? r : c;
    case NodeKind::kSkip:
    case NodeKind::kAct:
    case NodeKind::kGate:
    case NodeKind::kCheck:
      return c;
    case NodeKind::kSeq:
      return rebuild(c, c->left, substitute(c->right, x, r));
    case NodeKind::kRec: {
      if (c->name == x) return c;
      auto body_free = fvar(c->left);
      if (!body_free.count(x)) return c;
      auto r_free = fvar(r);
      if (!r_free.count(c->name)) {
        return rebuild(c, substitute(c->left, x, r), nullptr);
      }
      std::set<std::string> avoid = r_free;
      avoid.insert(body_free.begin(), body_free.end());
      auto bound = bvar(c->left);
      avoid.insert(bound.begin(), bound.end());
      avoid.insert(x);
      std::string y = fresh_name(c->name, avoid);
      Command renamed = substitute(c->left, c->name, cmd::var(y));
      return cmd::rec(y, substitute(renamed, x, r));
    }
    default:
      return rebuild(c, c->left ? substitute(c->left, x, r) : nullptr,
                     c->right ? substitute(c->right, x, r) : nullptr);
  }
}

}  // namespace evsem
