#include "evsem/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace evsem {

GateTable GateTable::builtin() {
  const Complex i(0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  auto m2 = [](Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
  };
  GateTable t;
  t.gates["I"] = identity(2);
  t.gates["X"] = m2(0, 1, 1, 0);
  t.gates["Y"] = m2(0, -i, i, 0);
  t.gates["Z"] = m2(1, 0, 0, -1);
  t.gates["H"] = m2(r, r, r, -r);
  t.gates["S"] = m2(1, 0, 0, i);
  t.gates["T"] = m2(1, 0, 0, std::exp(i * (M_PI / 4)));
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  t.gates["CNOT"] = cnot;
  Matrix cz = identity(4);
  cz(3, 3) = -1;
  t.gates["CZ"] = cz;
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1;
  t.gates["SWAP"] = swap;
  return t;
}

GateSignature GateTable::signature() const {
  GateSignature sig;
  for (const auto& [name, m] : gates) {
    int arity = 0;
    while ((1 << arity) < m.rows()) ++arity;
    sig[name] = arity;
  }
  return sig;
}

const Matrix& GateTable::gate(const std::string& name) const {
  auto it = gates.find(name);
  if (it == gates.end()) throw Error(ErrorCode::kUnknownGate, name);
  return it->second;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::kInvalidInput, "matrix must be a non-empty array of rows");
  }
  const auto n = static_cast<int>(j.size());
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, "matrix must be square");
    }
    for (int c = 0; c < n; ++c) {
      const auto& cell = row[c];
      if (cell.is_number()) {
        m(r, c) = Complex(cell.get<double>(), 0);
      } else if (cell.is_array() && cell.size() == 2) {
        m(r, c) = Complex(cell[0].get<double>(), cell[1].get<double>());
      } else {
        throw Error(ErrorCode::kInvalidInput, "matrix entry must be [re, im]");
      }
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) {
        throw Error(ErrorCode::kInvalidInput, "non-finite matrix entry");
      }
    }
  }
  return m;
}

void load_gate_json(GateTable& table, const nlohmann::json& j, double tol) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "gate file must be an object");
  for (const auto& [key, val] : j.items()) {
    if (key.rfind("@meas:", 0) == 0) {
      int q = std::stoi(key.substr(6));
      Matrix m0 = matrix_from_json(val.at("m0"));
      Matrix m1 = matrix_from_json(val.at("m1"));
      if (m0.rows() != 2 || m1.rows() != 2) {
        throw Error(ErrorCode::kDimensionMismatch, key + " must be 2x2");
      }
      if (!is_unitary(m0 + m1, tol)) {
        throw Error(ErrorCode::kInvalidInput, key + ": M0 + M1 is not unitary");
      }
      table.measurements[q] = {m0, m1};
      continue;
    }
    int arity = val.at("arity").get<int>();
    Matrix m = matrix_from_json(val.at("matrix"));
    if (arity < 1 || m.rows() != (1 << arity)) {
      throw Error(ErrorCode::kDimensionMismatch, key + ": matrix size vs arity");
    }
    if (!is_unitary(m, tol)) {
      throw Error(ErrorCode::kInvalidInput, key + " is not unitary");
    }
    table.gates[key] = m;
  }
}

QuantumContext QuantumContext::for_qubits(std::set<int> qs, GateTable table,
                                          double tol) {
  QuantumContext ctx;
  ctx.qubits.assign(qs.begin(), qs.end());
  ctx.table = std::move(table);
  ctx.tol = tol;
  return ctx;
}

QuantumContext QuantumContext::for_program(const Command& c, GateTable table,
                                           double tol) {
  return for_qubits(qvar(c), std::move(table), tol);
}

int QuantumContext::wire(int qubit) const {
  auto it = std::lower_bound(qubits.begin(), qubits.end(), qubit);
  if (it == qubits.end() || *it != qubit) {
    throw Error(ErrorCode::kDimensionMismatch,
                "qubit " + std::to_string(qubit) + " is not in the register");
  }
  return static_cast<int>(it - qubits.begin());
}

Matrix QuantumContext::projector(int qubit, int outcome) const {
  Matrix local;
  auto it = table.measurements.find(qubit);
  if (it != table.measurements.end()) {
    local = outcome == 0 ? it->second.first : it->second.second;
  } else {
    local = Matrix::Zero(2, 2);
    local(outcome, outcome) = 1;
  }
  return embed(local, {wire(qubit)}, n_qubits());
}

Matrix QuantumContext::label_operator(const Label& l) const {
  switch (l.kind) {
    case Label::Kind::kSk:
      return identity(dim());
    case Label::Kind::kTau0:
      return projector(l.qubits.at(0), 0);
    case Label::Kind::kTau1:
      return projector(l.qubits.at(0), 1);
    case Label::Kind::kGate: {
      std::vector<int> wires;
      for (int q : l.qubits) wires.push_back(wire(q));
      return embed(table.gate(l.name), wires, n_qubits());
    }
    default:
      throw Error(ErrorCode::kFlavorMismatch,
                  "label " + l.str() + " has no quantum operator");
  }
}

Matrix parse_density(const std::string& spec, int n_qubits) {
  const int dim = 1 << n_qubits;
  if (spec.rfind("ket:", 0) == 0) {
    std::string bits = spec.substr(4);
    if (static_cast<int>(bits.size()) != n_qubits) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "state '" + spec + "' needs " + std::to_string(n_qubits) +
                      " symbol(s)");
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
    const double r = 1.0 / std::sqrt(2.0);
    for (char ch : bits) {
      Eigen::VectorXcd q(2);
      switch (ch) {
        case '0': q << 1, 0; break;
        case '1': q << 0, 1; break;
        case '+': q << r, r; break;
        case '-': q << r, -r; break;
        default:
          throw Error(ErrorCode::kInvalidInput,
                      std::string("bad ket symbol '") + ch + "'");
      }
      Eigen::VectorXcd next(psi.size() * 2);
      for (int i = 0; i < psi.size(); ++i) {
        next(2 * i) = psi(i) * q(0);
        next(2 * i + 1) = psi(i) * q(1);
      }
      psi = next;
    }
    return psi * psi.adjoint();
  }
  nlohmann::json j;
  try {
    if (!spec.empty() && spec.front() == '[') {
      j = nlohmann::json::parse(spec);
    } else {
      std::ifstream in(spec);
      if (!in) throw Error(ErrorCode::kInvalidInput, "cannot read state '" + spec + "'");
      j = nlohmann::json::parse(in);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("state JSON: ") + e.what());
  }
  Matrix m = matrix_from_json(j);
  if (m.rows() != dim) {
    throw Error(ErrorCode::kDimensionMismatch, "state dimension " +
                                                   std::to_string(m.rows()) + " != " +
                                                   std::to_string(dim));
  }
  return m;
}

bool is_density(const Matrix& rho, double tol) {
  if (rho.rows() != rho.cols()) return false;
  if (max_abs_diff(rho, rho.adjoint()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
  if (eig.eigenvalues().minCoeff() < -tol) return false;
  double tr = rho.trace().real();
  return tr >= -tol && tr <= 1 + tol;
}

namespace {

std::vector<std::vector<std::size_t>> conflict_classes(
    const EventStructure& es,
    const std::vector<std::pair<std::size_t, std::size_t>>& minc) {
  std::vector<std::vector<std::size_t>> classes(es.size());
  for (std::size_t e = 0; e < es.size(); ++e) classes[e].push_back(e);
  for (auto [a, b] : minc) {
    classes[a].push_back(b);
    classes[b].push_back(a);
  }
  for (auto& c : classes) std::sort(c.begin(), c.end());
  return classes;
}

// Operators of every configuration, computed by extending smaller ones. The
// disagreement records how far apart the different last-event
// decompositions of each configuration land.
struct OperatorTable {
  std::vector<EventSet> confs;
  std::map<EventSet, Matrix> ops;
  double disagreement = 0.0;
  std::string worst;
};

OperatorTable operator_table(const EventStructure& es) {
  OperatorTable t;
  t.confs = configurations(es);
  for (const auto& x : t.confs) {
    if (x.none()) {
      t.ops.emplace(x, identity(es.dim()));
      continue;
    }
    bool have = false;
    Matrix a;
    for (auto e : members(x)) {
      if ((es.above(e) & x).count() != 1) continue;  // e must be maximal in x
      EventSet rest = x;
      rest.reset(e);
      Matrix cand = es.op(e) * t.ops.at(rest);
      if (!have) {
        a = cand;
        have = true;
      } else {
        double d = max_abs_diff(a, cand);
        if (d > t.disagreement) {
          t.disagreement = d;
          t.worst = set_string(es, x);
        }
      }
    }
    t.ops.emplace(x, std::move(a));
  }
  return t;
}

// Families whose union exceeds value_cap have no recorded value; the
// configuration y is then skipped rather than judged.
template <typename Value, typename Lookup>
DropReport drop_impl(const EventStructure& es, std::size_t max_size,
                     const Lookup& value_of, double tol, std::size_t value_cap) {
  DropReport r;
  bool first = true;
  for (const auto& y : configurations(es, max_size)) {
    bool unknown = false;
    auto covers = enabled(es, y);
    // Sum over conflict-free families of covers; other unions are not
    // configurations and contribute 0.
    Value total = value_of(y);
    std::vector<std::size_t> chosen;
    EventSet cur = y;
    std::function<void(std::size_t)> go = [&](std::size_t from) {
      for (std::size_t k = from; k < covers.size(); ++k) {
        auto e = covers[k];
        if (es.conflicts(e).intersects(cur)) continue;
        if (cur.count() + 1 > value_cap) {
          unknown = true;
          continue;
        }
        cur.set(e);
        chosen.push_back(e);
        Value v = value_of(cur);
        if (chosen.size() % 2 == 1) {
          total -= v;
        } else {
          total += v;
        }
        go(k + 1);
        chosen.pop_back();
        cur.reset(e);
      }
    };
    go(0);
    if (unknown) continue;
    ++r.checked;
    double d;
    if constexpr (std::is_same_v<Value, Rational>) {
      d = total.get_d();
      if (total < 0) r.ok = false;
    } else {
      d = total;
      if (total < -tol) r.ok = false;
    }
    if (first || d < r.worst) {
      r.worst = d;
      r.witness = set_string(es, y);
      first = false;
    }
  }
  return r;
}

}  // namespace

std::vector<Violation> validate_ues(const EventStructure& es, double tol) {
  auto out = validate(es);
  if (es.annotation_kind() != AnnotationKind::kOperators) {
    out.push_back({"annotation", "structure carries no operator map"});
    return out;
  }
  const std::size_t n = es.size();
  auto name = [&](std::size_t i) { return es.id(i).str(); };
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& q = es.op(i);
    if (q.rows() != es.dim()) {
      out.push_back({"dimension", name(i)});
      continue;
    }
    if (!is_unitary(q, tol) && !is_projection(q, tol)) {
      out.push_back({"unitary or projection", name(i)});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (concurrent(es, i, j) && !commutes(es.op(i), es.op(j), tol)) {
        out.push_back({"commutation", name(i) + "," + name(j)});
      }
    }
  }
  auto minc = minimal_conflict(es);
  std::vector<EventSet> rel(n, es.empty_set());
  for (auto [a, b] : minc) {
    rel[a].set(b);
    rel[b].set(a);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (auto b : members(rel[a])) {
      for (auto c : members(rel[b])) {
        if (c != a && !rel[a].test(c)) {
          out.push_back({"minimal conflict transitivity",
                         name(a) + "~" + name(b) + "~" + name(c)});
        }
      }
    }
  }
  for (const auto& cls : conflict_classes(es, minc)) {
    if (cls.size() < 2) continue;
    Matrix sum = Matrix::Zero(es.dim(), es.dim());
    for (auto e : cls) sum += es.op(e);
    if (!is_unitary(sum, tol)) {
      std::string w;
      for (auto e : cls) w += (w.empty() ? "" : ",") + name(e);
      out.push_back({"class sum unitary", "[" + w + "]"});
    }
  }
  return out;
}

Matrix config_operator(const EventStructure& es, const EventSet& x, double tol) {
  auto chains = covering_chains(es, x);
  Matrix a = identity(es.dim());
  if (chains.empty()) return a;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    Matrix p = identity(es.dim());
    for (auto e : chains[k]) p = es.op(e) * p;
    if (k == 0) {
      a = p;
    } else if (max_abs_diff(a, p) > tol) {
      throw Error(ErrorCode::kChainDisagreement, set_string(es, x));
    }
  }
  return a;
}

double chain_disagreement(const EventStructure& es, const EventSet& x) {
  auto chains = covering_chains(es, x);
  double worst = 0.0;
  Matrix first;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    Matrix p = identity(es.dim());
    for (auto e : chains[k]) p = es.op(e) * p;
    if (k == 0) {
      first = p;
    } else {
      worst = std::max(worst, max_abs_diff(first, p));
    }
  }
  return worst;
}

QuantumValuation valuation_from_state(const EventStructure& es, const Matrix& rho,
                                      double tol) {
  if (es.annotation_kind() != AnnotationKind::kOperators) {
    throw Error(ErrorCode::kAnnotationMismatch, "expected an operator map");
  }
  if (rho.rows() != es.dim() || rho.cols() != es.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "state vs structure dimension");
  }
  if (std::abs(rho.trace().real() - 1.0) > tol) {
    throw Error(ErrorCode::kInvalidInput, "state must have trace 1");
  }
  auto table = operator_table(es);
  if (table.disagreement > tol) {
    throw Error(ErrorCode::kChainDisagreement, table.worst);
  }
  QuantumValuation out;
  for (const auto& x : table.confs) {
    const Matrix& a = table.ops.at(x);
    out.v[x] = (a.adjoint() * a * rho).trace().real();
  }
  // Unions of covers may lie past the configuration cap; their operators
  // come straight from a linear extension.
  auto lookup = [&](const EventSet& x) {
    auto it = out.v.find(x);
    if (it != out.v.end()) return it->second;
    auto evs = members(x);
    std::stable_sort(evs.begin(), evs.end(), [&](std::size_t a, std::size_t b) {
      return es.below(a).count() < es.below(b).count();
    });
    Matrix a = identity(es.dim());
    for (auto e : evs) a = es.op(e) * a;
    return (a.adjoint() * a * rho).trace().real();
  };
  auto report = drop_impl<double>(es, kUnbounded, lookup, tol, kUnbounded);
  if (!report.ok) {
    throw Error(ErrorCode::kDropConditionViolation,
                report.witness + " drop " + std::to_string(report.worst));
  }
  return out;
}

DropReport drop_check(const EventStructure& pes, std::size_t max_config_size) {
  if (pes.annotation_kind() != AnnotationKind::kValuation) {
    throw Error(ErrorCode::kAnnotationMismatch, "expected a valuation");
  }
  return drop_impl<Rational>(
      pes, max_config_size, [&](const EventSet& x) { return pes.value(x); }, 0.0,
      pes.config_cap());
}

DropReport drop_check(const EventStructure& es, const RealValuation& v,
                      std::size_t max_config_size, double tol) {
  return drop_impl<double>(
      es, max_config_size,
      [&](const EventSet& x) {
        auto it = v.find(x);
        return it == v.end() ? 0.0 : it->second;
      },
      tol, es.config_cap());
}

bool MergeReport::ok(double tol) const {
  if (degenerate) return true;
  return sizes_preserved && max_sum_error <= tol &&
         std::abs(drop_tilde - drop_hat) <= tol && drop_hat >= -tol;
}

MergeReport merge_oracle(const EventStructure& es, const EventSet& y,
                         const Matrix& rho, double tol) {
  if (!is_configuration(es, y)) {
    throw Error(ErrorCode::kNotAConfiguration, set_string(es, y));
  }
  auto tilde = enabled(es, y);
  for (auto e : tilde) {
    if (!is_projection(es.op(e), tol)) {
      throw Error(ErrorCode::kPreconditionNotProjective, es.id(e).str());
    }
  }
  MergeReport r;
  r.tilde_events = tilde.size();
  Matrix ay = config_operator(es, y, tol);
  double vy = (ay.adjoint() * ay * rho).trace().real();
  if (vy <= tol) {
    r.degenerate = true;
    return r;
  }
  Matrix rho_y = ay * rho * ay.adjoint() / vy;
  auto value = [&](const Matrix& a) { return (a.adjoint() * a * rho_y).trace().real(); };

  // Conflict classes of the trivially ordered structure.
  const std::size_t n = tilde.size();
  std::vector<int> cls(n, -1);
  int n_classes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cls[i] >= 0) continue;
    cls[i] = n_classes;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (es.conflict(tilde[i], tilde[j])) cls[j] = n_classes;
    }
    ++n_classes;
  }
  r.classes = n_classes;
  std::vector<Matrix> hat(n_classes, Matrix::Zero(es.dim(), es.dim()));
  for (std::size_t i = 0; i < n; ++i) hat[cls[i]] += es.op(tilde[i]);

  std::map<unsigned, double> summed;  // class mask -> sum of tilde values
  // Conflict-free subsets of the tilde events.
  std::vector<std::size_t> pick;
  std::function<void(std::size_t, unsigned)> go = [&](std::size_t from, unsigned mask) {
    Matrix a = identity(es.dim());
    for (auto i : pick) a = es.op(tilde[i]) * a;
    double v = value(a);
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != pick.size()) {
      r.sizes_preserved = false;
    }
    summed[mask] += v;
    r.drop_tilde += (pick.size() % 2 ? -v : v);
    for (std::size_t k = from; k < n; ++k) {
      bool clash = false;
      for (auto i : pick) clash = clash || es.conflict(tilde[i], tilde[k]);
      if (clash) continue;
      pick.push_back(k);
      go(k + 1, mask | (1u << cls[k]));
      pick.pop_back();
    }
  };
  go(0, 0);
  for (unsigned mask = 0; mask < (1u << n_classes); ++mask) {
    Matrix a = identity(es.dim());
    for (int c = 0; c < n_classes; ++c) {
      if (mask & (1u << c)) a = hat[c] * a;
    }
    double v = value(a);
    r.drop_hat += (__builtin_popcount(mask) % 2 ? -v : v);
    r.max_sum_error = std::max(r.max_sum_error, std::abs(v - summed[mask]));
  }
  return r;
}

}  // namespace evsem
