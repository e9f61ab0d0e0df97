#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evsem/escore.hpp"
#include "evsem/lang.hpp"
#include "evsem/linalg.hpp"

namespace evsem {

// Gate name -> matrix over 2^arity dimensions, plus optional per-qubit
// measurement pairs (M0, M1) replacing the computational-basis projectors.
struct GateTable {
  std::map<std::string, Matrix> gates;
  std::map<int, std::pair<Matrix, Matrix>> measurements;

  static GateTable builtin();
  GateSignature signature() const;
  const Matrix& gate(const std::string& name) const;
};

Matrix matrix_from_json(const nlohmann::json& j);
// Merges a JSON gate file into `table`. Keys "@meas:<q>" carry
// {"m0": matrix, "m1": matrix}; every other key is {"arity", "matrix"}.
void load_gate_json(GateTable& table, const nlohmann::json& j,
                    double tol = kDefaultTolerance);

// Ambient register of a quantum program: the sorted qubit names, wire i
// holding the i-th smallest.
struct QuantumContext {
  std::vector<int> qubits;
  GateTable table = GateTable::builtin();
  double tol = kDefaultTolerance;

  static QuantumContext for_qubits(std::set<int> qs, GateTable table = GateTable::builtin(),
                                   double tol = kDefaultTolerance);
  static QuantumContext for_program(const Command& c,
                                    GateTable table = GateTable::builtin(),
                                    double tol = kDefaultTolerance);

  int n_qubits() const { return static_cast<int>(qubits.size()); }
  int dim() const { return 1 << n_qubits(); }
  int wire(int qubit) const;
  Matrix projector(int qubit, int outcome) const;
  Matrix label_operator(const Label& l) const;
};

// "ket:01+-" (one symbol per wire, left to right), or a JSON matrix.
Matrix parse_density(const std::string& spec, int n_qubits);
bool is_density(const Matrix& rho, double tol = kDefaultTolerance);

std::vector<Violation> validate_ues(const EventStructure& es,
                                    double tol = kDefaultTolerance);

// A_x = Q(e_n) ... Q(e_1) along a covering chain; every chain must agree.
Matrix config_operator(const EventStructure& es, const EventSet& x,
                       double tol = kDefaultTolerance);
// Largest entrywise distance between the products of two chains of x.
double chain_disagreement(const EventStructure& es, const EventSet& x);

using RealValuation = std::map<EventSet, double>;

struct QuantumValuation {
  RealValuation v;
};

// v(x) = Tr(A_x^dagger A_x rho) on every configuration; throws
// DropConditionViolation when the drop condition fails.
QuantumValuation valuation_from_state(const EventStructure& es, const Matrix& rho,
                                      double tol = kDefaultTolerance);

struct DropReport {
  bool ok = true;
  double worst = 0.0;      // smallest drop value found
  std::string witness;     // configuration with the smallest drop value
  std::size_t checked = 0;
};

// Exact check over the rational valuation of a probabilistic structure.
DropReport drop_check(const EventStructure& pes, std::size_t max_config_size = kUnbounded);
// Floating-point check for valuations computed from a state.
DropReport drop_check(const EventStructure& es, const RealValuation& v,
                      std::size_t max_config_size = kUnbounded,
                      double tol = kDefaultTolerance);

struct MergeReport {
  bool degenerate = false;        // v(y) = 0, nothing to compare
  bool sizes_preserved = true;    // |proj(x)| = |x|
  double max_sum_error = 0.0;     // |v_hat(x) - sum v_tilde|
  double drop_tilde = 0.0;        // drop of the tilde structure at the empty set
  double drop_hat = 0.0;          // drop of the hat structure at the empty set
  std::size_t classes = 0;
  std::size_t tilde_events = 0;
  bool ok(double tol = kDefaultTolerance) const;
};

MergeReport merge_oracle(const EventStructure& es, const EventSet& y,
                         const Matrix& rho, double tol = kDefaultTolerance);

}  // namespace evsem
