#include "evsem/linalg.hpp"

#include "evsem/common.hpp"

namespace evsem {

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix product");
  }
  return a * b;
}

Matrix adjoint(const Matrix& m) { return m.adjoint(); }

Complex trace(const Matrix& m) { return m.trace(); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix comparison");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs_diff(m.adjoint() * m, identity(m.rows())) <= tol;
}

bool is_projection(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs_diff(m * m, m) <= tol && max_abs_diff(m.adjoint(), m) <= tol;
}

bool commutes(const Matrix& a, const Matrix& b, double tol) {
  return max_abs_diff(a * b, b * a) <= tol;
}

Matrix embed(const Matrix& gate, const std::vector<int>& wires, int n_qubits) {
  const int k = static_cast<int>(wires.size());
  if (gate.rows() != (1 << k) || gate.cols() != (1 << k)) {
    throw Error(ErrorCode::kDimensionMismatch, "gate size vs wire count");
  }
  for (int w : wires) {
    if (w < 0 || w >= n_qubits) {
      throw Error(ErrorCode::kDimensionMismatch, "wire outside register");
    }
  }
  const int dim = 1 << n_qubits;
  std::vector<int> shift(k);
  int mask = 0;
  for (int i = 0; i < k; ++i) {
    shift[i] = n_qubits - 1 - wires[i];
    mask |= 1 << shift[i];
  }
  auto local = [&](int index) {
    int l = 0;
    for (int i = 0; i < k; ++i) l = (l << 1) | ((index >> shift[i]) & 1);
    return l;
  };
  Matrix out = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & ~mask) != (c & ~mask)) continue;
      out(r, c) = gate(local(r), local(c));
    }
  }
  return out;
}

}  // namespace evsem
