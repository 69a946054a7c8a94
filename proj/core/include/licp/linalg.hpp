#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace licp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric eigendecomposition with eigenvalues sorted descending; column i
// of `vectors` belongs to `values[i]`.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

SymEigen sym_eigen(const Matrix& a);

// Largest eigenvalue of a symmetric matrix.
double lambda_max(const Matrix& a);

// Flips v so that its entry of largest magnitude is positive (ties go to the
// lowest index). Returns the applied sign.
double canonical_sign(Eigen::Ref<Vector> v);

// Orthonormal basis of the orthogonal complement of `anchor` (which need not
// be normalized), built by Gram-Schmidt over e_0, e_1, ... in index order.
// Result is n x (n-1).
Matrix complement_basis(const Vector& anchor);

Matrix symmetrize(const Matrix& a);

}  // namespace licp
