#include "licp/linalg.hpp"

#include "licp/error.hpp"

#include <cmath>

namespace licp {

SymEigen sym_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) {
    fail(Errc::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  SymEigen out{Vector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

double lambda_max(const Matrix& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(Errc::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return solver.eigenvalues()(a.rows() - 1);
}

double canonical_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best_abs + 1e-12) {
      best_abs = m;
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) {
    v = -v;
    return -1.0;
  }
  return 1.0;
}

Matrix complement_basis(const Vector& anchor) {
  const Eigen::Index n = anchor.size();
  const double norm = anchor.norm();
  if (n == 0 || norm == 0.0) {
    fail(Errc::InvalidArgument, "complement_basis: anchor must be nonzero");
  }
  Matrix basis(n, n - 1);
  Eigen::Index filled = 0;
  const Vector a = anchor / norm;
  for (Eigen::Index i = 0; i < n && filled < n - 1; ++i) {
    Vector e = Vector::Unit(n, i);
    // Two passes of modified Gram-Schmidt keep the basis orthonormal to
    // working precision.
    for (int pass = 0; pass < 2; ++pass) {
      e -= a.dot(e) * a;
      for (Eigen::Index j = 0; j < filled; ++j) e -= basis.col(j).dot(e) * basis.col(j);
    }
    const double len = e.norm();
    if (len < 1e-8) continue;
    basis.col(filled++) = e / len;
  }
  if (filled != n - 1) {
    fail(Errc::NumericalFailure, "complement_basis: could not complete the basis");
  }
  return basis;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace licp
