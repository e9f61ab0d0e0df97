#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace evsem {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTolerance = 1e-9;

Matrix identity(int dim);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix adjoint(const Matrix& m);
Complex trace(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

bool is_unitary(const Matrix& m, double tol = kDefaultTolerance);
bool is_projection(const Matrix& m, double tol = kDefaultTolerance);
bool commutes(const Matrix& a, const Matrix& b, double tol = kDefaultTolerance);

// Places a k-qubit gate on the given wires of an n-qubit register. Wire 0 is
// the most significant bit; the gate's first wire is its most significant
// local bit.
Matrix embed(const Matrix& gate, const std::vector<int>& wires, int n_qubits);

}  // namespace evsem
