#include "licp/local_geom.hpp"

#include "licp/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace licp {
namespace {

constexpr double kReconstructTol = 1e-9;
constexpr double kTopSigmaTol = 1e-9;

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) fail(Errc::ConvergenceFailure, std::string(what) + " produced non-finite values");
}

double reconstruction_error(const Matrix& b, const SvdResult& s) {
  Matrix rebuilt = Matrix::Zero(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < s.left.cols(); ++i) {
    rebuilt += s.singular_values(i) * s.left.col(i) * s.right.col(i).transpose();
  }
  return (b - rebuilt).norm();
}

void finish(const Matrix& b, SvdResult& s) {
  for (Eigen::Index i = 0; i < s.right.cols(); ++i) {
    const double sign = canonical_sign(s.right.col(i));
    if (i < s.left.cols()) s.left.col(i) *= sign;
  }
  check_finite(s.right, "svd");
  check_finite(s.left, "svd");
  const double err = reconstruction_error(b, s);
  if (!(err <= kReconstructTol * std::max(1.0, b.norm()))) {
    fail(Errc::ConvergenceFailure,
         "singular value decomposition failed to reconstruct the matrix (error " +
             std::to_string(err) + ")");
  }
}

Eigen::JacobiSVD<Matrix> jacobi(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!solver.singularValues().allFinite()) {
    fail(Errc::ConvergenceFailure, "Jacobi SVD did not converge");
  }
  return solver;
}

// Noise floor below which a residual is indistinguishable from zero.
bool negligible(double residual, double reference) {
  return std::abs(residual) <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(reference);
}

template <typename Row, typename Value>
DecayCheck decay_check(const std::vector<Row>& rows, Value value) {
  DecayCheck check;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev_eps = rows[i - 1].eps;
    if (std::abs(rows[i].eps - 0.5 * prev_eps) > 1e-12 * std::abs(prev_eps) || prev_eps == 0.0) {
      continue;
    }
    const auto [prev, prev_ref] = value(rows[i - 1]);
    const auto [next, next_ref] = value(rows[i]);
    double ratio = 0.0;
    if (negligible(prev, prev_ref)) {
      ratio = negligible(next, next_ref) ? 0.0 : std::numeric_limits<double>::infinity();
    } else if (!negligible(next, next_ref)) {
      ratio = std::abs(next) / std::abs(prev);
    }
    check.ratios.push_back(ratio);
    if (!(ratio <= kDecayRatio)) check.passed = false;
  }
  return check;
}

void require_zero_sum(const ProbDist& p, const Vector& j) {
  if (static_cast<std::size_t>(j.size()) != p.size()) {
    fail(Errc::DimensionMismatch, "direction and distribution sizes differ");
  }
  if (std::abs(j.sum()) > 1e-12 * std::max(1.0, j.lpNorm<1>())) {
    fail(Errc::InvalidArgument, "perturbation direction must sum to zero");
  }
}

}  // namespace

Dtm Dtm::build(const Channel& w, const ProbDist& px) {
  if (w.input_size() != px.size()) {
    fail(Errc::DimensionMismatch, "channel has " + std::to_string(w.input_size()) +
                                      " inputs but the input distribution has " +
                                      std::to_string(px.size()) + " symbols");
  }
  const Vector py_raw = w.matrix() * px.probs();
  for (Eigen::Index y = 0; y < py_raw.size(); ++y) {
    if (!(py_raw(y) > 0.0)) {
      fail(Errc::SingularOutput, "output symbol " + std::to_string(y) + " has zero probability");
    }
  }
  ProbDist py = ProbDist::validate(py_raw);
  Matrix b = py.probs().array().rsqrt().matrix().asDiagonal() * w.matrix() *
             px.sqrt().asDiagonal();
  return Dtm(w, px, std::move(py), std::move(b));
}

Dtm build_dtm(const Channel& w, const ProbDist& px) { return Dtm::build(w, px); }

SvdResult svd(const Matrix& b) {
  check_finite(b, "svd input");
  const auto solver = jacobi(b);
  const Eigen::Index nx = b.cols();
  const Eigen::Index r = std::min(b.rows(), b.cols());
  SvdResult out{Vector::Zero(nx), solver.matrixV(), solver.matrixU().leftCols(r)};
  out.singular_values.head(r) = solver.singularValues();
  finish(b, out);
  return out;
}

SvdResult svd(const Dtm& d) {
  // The top pair (sqrt(P_X), sqrt(P_Y)) is exact; the rest of the spectrum
  // comes from B restricted to the complements of both, so the pair stays
  // at index 0 even when another singular value ties with it.
  const Matrix& b = d.matrix();
  const Vector v0 = d.input_dist().sqrt();
  const Vector u0 = d.output_dist().sqrt();
  if ((b * v0 - u0).norm() > kTopSigmaTol) {
    fail(Errc::NumericalFailure, "B sqrt(P_X) != sqrt(P_Y); the DTM is inconsistent");
  }
  const Eigen::Index nx = b.cols();
  const Eigen::Index ny = b.rows();
  const Eigen::Index r = std::min(nx, ny);

  SvdResult out{Vector::Zero(nx), Matrix(nx, nx), Matrix(ny, r)};
  out.singular_values(0) = 1.0;
  out.right.col(0) = v0;
  out.left.col(0) = u0;
  if (nx > 1 && ny > 1) {
    const Matrix qx = complement_basis(v0);
    const Matrix qy = complement_basis(u0);
    const auto solver = jacobi(Matrix(qy.transpose() * b * qx));
    const Eigen::Index rt = solver.singularValues().size();
    out.singular_values.segment(1, rt) = solver.singularValues();
    out.right.rightCols(nx - 1) = qx * solver.matrixV();
    out.left.rightCols(r - 1) = qy * solver.matrixU().leftCols(rt);
    if (out.singular_values(1) > 1.0 + kTopSigmaTol) {
      fail(Errc::NumericalFailure,
           "tangent singular value " + std::to_string(out.singular_values(1)) + " exceeds 1");
    }
  } else if (nx > 1) {
    out.right.rightCols(nx - 1) = complement_basis(v0);
  }
  finish(b, out);
  return out;
}

LocalCapacity local_capacity(const Dtm& d) {
  if (d.input_dist().size() < 2) {
    fail(Errc::InvalidArgument, "local capacity needs an input alphabet of size >= 2");
  }
  const SvdResult s = svd(d);
  double sigma = s.singular_values(1);
  const bool useless = sigma < kUselessSigma;
  if (useless) sigma = 0.0;
  std::size_t multiplicity = 0;
  for (Eigen::Index i = 1; i < s.singular_values.size(); ++i) {
    const double v = s.singular_values(i) < kUselessSigma ? 0.0 : s.singular_values(i);
    if (std::abs(v - sigma) <= kMultiplicityTol) ++multiplicity;
  }
  return LocalCapacity{sigma, ScaledPerturbation::make(d.input_dist(), s.right.col(1)),
                       multiplicity, useless};
}

QuadraticApproxTable verify_quadratic_approx(const ProbDist& p, const Vector& j,
                                             std::span<const double> eps_list) {
  require_zero_sum(p, j);
  const double norm2 = weighted_inner_product(j, j, p);
  QuadraticApproxTable table;
  for (const double eps : eps_list) {
    const Perturbation pert = Perturbation::make(p, j, eps);
    ApproxRow row;
    row.eps = eps;
    row.exact_kl = kl_divergence(pert.perturbed(), p);
    row.half_eps2_norm = 0.5 * eps * eps * norm2;
    row.residual = row.exact_kl - row.half_eps2_norm;
    table.rows.push_back(row);
  }
  table.decay = decay_check(table.rows, [](const ApproxRow& r) {
    return std::pair{r.residual, r.exact_kl};
  });
  return table;
}

SymmetryTable verify_divergence_symmetry(const ProbDist& p, const Vector& j,
                                         std::span<const double> eps_list) {
  require_zero_sum(p, j);
  SymmetryTable table;
  for (const double eps : eps_list) {
    const ProbDist q = Perturbation::make(p, j, eps).perturbed();
    table.rows.push_back({eps, std::abs(kl_divergence(p, q) - kl_divergence(q, p))});
  }
  table.decay = decay_check(table.rows, [&](const SymmetryRow& r) {
    // Reference scale for the noise floor: the divergence itself, ~eps^2.
    return std::pair{r.gap, r.eps * r.eps};
  });
  return table;
}

double strong_dpi_ratio(const Dtm& d, const ScaledPerturbation& l) {
  const Vector& v = l.vec();
  if (static_cast<std::size_t>(v.size()) != d.input_dist().size()) {
    fail(Errc::DimensionMismatch, "perturbation does not match the DTM input size");
  }
  const double n2 = v.squaredNorm();
  if (!(n2 > 1e-300)) fail(Errc::ZeroPerturbation, "perturbation has zero norm");
  if (std::abs(v.dot(d.input_dist().sqrt())) > 1e-10 * std::sqrt(n2)) {
    fail(Errc::InvalidArgument, "perturbation is not orthogonal to sqrt(P_X) of this DTM");
  }
  return (d.matrix() * v).squaredNorm() / n2;
}

}  // namespace licp
