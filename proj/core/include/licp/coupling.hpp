#pragma once

// Linear information coupling problems.
//
// Everything here works with efficiencies: per-letter output information over
// per-letter input information at quadratic order. For a direction x in the
// tangent space of P_X (coordinates w.r.t. an orthonormal basis Q of the
// complement of sqrt(P_X)) the efficiency through channel i is x^T A_i x with
// A_i = Q^T B_i^T B_i Q.

#include "licp/error.hpp"
#include "licp/linalg.hpp"
#include "licp/local_geom.hpp"
#include "licp/prob.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace licp {

/// Gram form of a DTM on the tangent space of its input distribution.
struct QuadraticForm {
  Matrix matrix;  // m x m, symmetric PSD, eigenvalues in [0, 1]
  Matrix basis;   // |X| x m orthonormal tangent vectors
  ProbDist input_dist;
  std::optional<Dtm> source;

  /// A form given directly in the Gram-Schmidt tangent basis of px.
  static QuadraticForm from_matrix(const Matrix& a, const ProbDist& px);

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
  double value(const Vector& x) const { return x.dot(matrix * x); }

  /// An operator on the input space whose Gram matrix restricted to the
  /// tangent space is `matrix` and which maps sqrt(P_X) to a unit vector
  /// orthogonal to the image of the tangent space: the source DTM when there
  /// is one, otherwise the square v0 v0^T + Q A^{1/2} Q^T.
  Matrix operator_matrix() const;
};

QuadraticForm tangent_form(const Dtm& d);

/// Finite auxiliary variable U: weights P_U and scaled perturbations L_u in
/// the input space of `base`, at scale epsilon.
class CouplingEnsemble {
 public:
  static CouplingEnsemble make(ProbDist weights, std::vector<Vector> perturbations, ProbDist base,
                               double epsilon);

  const ProbDist& weights() const noexcept { return weights_; }
  const std::vector<Vector>& perturbations() const noexcept { return perturbations_; }
  const ProbDist& base() const noexcept { return base_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t size() const noexcept { return perturbations_.size(); }

  /// eps^2/2 * sum_u w_u ||L_u||^2, the quadratic-order I(U;X).
  double quadratic_input_information() const;
  /// P_{X|U=u} = base + eps * sqrt(base) .* L_u.
  std::vector<ProbDist> conditionals() const;

 private:
  CouplingEnsemble(ProbDist weights, std::vector<Vector> perturbations, ProbDist base,
                   double epsilon)
      : weights_(std::move(weights)), perturbations_(std::move(perturbations)),
        base_(std::move(base)), epsilon_(epsilon) {}
  ProbDist weights_;
  std::vector<Vector> perturbations_;
  ProbDist base_;
  double epsilon_;
};

struct MaxMinSolution {
  double value = 0.0;
  /// A unit tangent direction (rank-1) or an ensemble.
  std::variant<Vector, CouplingEnsemble> optimizer;
  Vector dual_weights;
  double dual_value = 0.0;
  double gap = 0.0;
  /// Efficiency of the optimizer through each input form, in input order.
  std::vector<double> channel_values;
};

struct SolverOptions {
  std::size_t starts = 16;
  std::size_t max_iters = 400;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// Angular grid points for m = 2 (m = 3 uses roughly the same count on the
  /// hemisphere).
  std::size_t grid = 100'000;
  /// Upper bound on ensemble atoms; 0 means no bound beyond 2m.
  std::size_t cardinality = 0;
  bool uniform_weights = true;
  double epsilon = 1e-3;
};

struct DualResult {
  double dual_value = 0.0;
  Vector lambda;
};

MaxMinSolution solve_p2p(const Dtm& d, double epsilon = 1e-3);

/// max over unit x of min_i x^T A_i x; a certified lower bound with the dual
/// upper bound attached.
MaxMinSolution maxmin_rank1(const std::vector<QuadraticForm>& forms, const SolverOptions& opts = {});

/// min over the simplex of lambda_max(sum_i lambda_i A_i).
DualResult maxmin_dual(const std::vector<QuadraticForm>& forms, const SolverOptions& opts = {});

/// max over trace-1 PSD M of min_i tr(A_i M), realized as a +/- paired ensemble.
MaxMinSolution maxmin_ensemble(const std::vector<QuadraticForm>& forms,
                               const SolverOptions& opts = {});

/// Raised by solve_broadcast2 when the two-receiver duality gap exceeds tol.
/// Carries the full solution so the caller can report the instance.
class GapDetected : public Error {
 public:
  GapDetected(MaxMinSolution solution, const std::string& message)
      : Error(Errc::GapDetected, message), solution_(std::move(solution)) {}
  const MaxMinSolution& solution() const noexcept { return solution_; }

 private:
  MaxMinSolution solution_;
};

MaxMinSolution solve_broadcast2(const Dtm& d1, const Dtm& d2, const SolverOptions& opts = {});

struct KLetterResult {
  std::vector<double> per_channel_values;   // (1/n) sum_j d_j^T A_i d_j
  std::vector<double> brute_force_values;   // via lazy tensor application
  CouplingEnsemble ensemble;                // binary +/- L^(n)
};

/// n-letter perturbation L = sum_j v0 (x) .. (x) Q d_j (x) .. (x) v0 with d_j in
/// slot j, the first-order expansion of the product of per-slot perturbations.
KLetterResult k_letter_construction(const std::vector<QuadraticForm>& forms,
                                    const std::vector<Vector>& directions,
                                    double epsilon = 1e-3);

/// n unit vectors with (1/n) sum_j d_j d_j^T = m, for trace-1 PSD m with
/// rank <= n.
std::vector<Vector> frame_directions(const Matrix& m, std::size_t n);

/// Per-channel efficiency of an ensemble (1 or n letters). Quadratic mode:
/// sum_u w_u ||B L_u||^2 / sum_u w_u ||L_u||^2. Exact mode: I(U;Y^n)/I(U;X^n)
/// from the true conditionals at the ensemble's epsilon.
std::vector<double> efficiency(const CouplingEnsemble& e, const std::vector<Dtm>& dtms, bool exact);

/// Quadratic-mode efficiency through the operators of bare forms.
std::vector<double> efficiency(const CouplingEnsemble& e, const std::vector<QuadraticForm>& forms);

}  // namespace licp
