#pragma once

// Divergence transition matrices, their singular structure, and numerical
// certificates for the local (quadratic) behaviour of KL divergence.

#include "licp/linalg.hpp"
#include "licp/prob.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace licp {

/// Singular structure of a |Y| x |X| matrix.
///
/// `singular_values` has one entry per input symbol (length |X|), sorted
/// descending and zero-padded when |Y| < |X|, so `right` is always a full
/// orthonormal basis of the input space. `left` holds the min(|X|, |Y|) output
/// vectors paired with the leading values. Each right vector is signed so its
/// largest-magnitude entry is positive; the paired left vector follows it.
struct SvdResult {
  Vector singular_values;
  Matrix right;
  Matrix left;

  std::size_t input_dim() const { return static_cast<std::size_t>(right.rows()); }
};

/// B = diag(1/sqrt(P_Y)) W diag(sqrt(P_X)).
class Dtm {
 public:
  static Dtm build(const Channel& w, const ProbDist& px);

  const Matrix& matrix() const noexcept { return b_; }
  const Channel& channel() const noexcept { return w_; }
  const ProbDist& input_dist() const noexcept { return px_; }
  const ProbDist& output_dist() const noexcept { return py_; }

 private:
  Dtm(Channel w, ProbDist px, ProbDist py, Matrix b)
      : w_(std::move(w)), px_(std::move(px)), py_(std::move(py)), b_(std::move(b)) {}
  Channel w_;
  ProbDist px_;
  ProbDist py_;
  Matrix b_;
};

Dtm build_dtm(const Channel& w, const ProbDist& px);

SvdResult svd(const Matrix& b);
SvdResult svd(const Dtm& d);

inline constexpr double kUselessSigma = 1e-12;
inline constexpr double kMultiplicityTol = 1e-9;

struct LocalCapacity {
  double sigma = 0.0;          // second largest singular value
  ScaledPerturbation v2;       // its right singular vector
  std::size_t multiplicity = 1;
  bool locally_useless = false;  // sigma below kUselessSigma

  double efficiency() const { return sigma * sigma; }
};

LocalCapacity local_capacity(const Dtm& d);

struct ApproxRow {
  double eps = 0.0;
  double exact_kl = 0.0;        // D(P + eps J || P)
  double half_eps2_norm = 0.0;  // eps^2 ||L||^2 / 2
  double residual = 0.0;        // exact_kl - half_eps2_norm
};

struct SymmetryRow {
  double eps = 0.0;
  double gap = 0.0;  // |D(P||Q) - D(Q||P)|
};

inline constexpr double kDecayRatio = 0.3;

/// Ratios |r(eps/2)| / |r(eps)| between consecutive halvings of the sweep.
struct DecayCheck {
  std::vector<double> ratios;
  bool passed = true;
};

struct QuadraticApproxTable {
  std::vector<ApproxRow> rows;
  DecayCheck decay;
};

struct SymmetryTable {
  std::vector<SymmetryRow> rows;
  DecayCheck decay;
};

QuadraticApproxTable verify_quadratic_approx(const ProbDist& p, const Vector& j,
                                             std::span<const double> eps_list);

SymmetryTable verify_divergence_symmetry(const ProbDist& p, const Vector& j,
                                         std::span<const double> eps_list);

/// ||B l||^2 / ||l||^2 for a valid scaled perturbation l.
double strong_dpi_ratio(const Dtm& d, const ScaledPerturbation& l);

}  // namespace licp
