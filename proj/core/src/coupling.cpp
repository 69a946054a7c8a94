#include "licp/coupling.hpp"

#include "licp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace licp {
namespace {

constexpr double kDedupTol = 1e-12;
constexpr double kWeakDualityTol = 1e-9;
constexpr double kActiveTol = 1e-7;

// Forms after removing exact duplicates; `owner[i]` maps input form i to its
// representative in `mats`.
struct Prepared {
  std::vector<Matrix> mats;
  std::vector<std::size_t> owner;
  std::vector<std::size_t> first;
  Eigen::Index dim = 0;
};

Prepared prepare(const std::vector<QuadraticForm>& forms) {
  if (forms.empty()) fail(Errc::EmptyInput, "at least one quadratic form is required");
  Prepared p;
  p.dim = forms.front().matrix.rows();
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const Matrix& a = forms[i].matrix;
    if (a.rows() != p.dim || a.cols() != p.dim) {
      fail(Errc::DimensionMismatch, "form " + std::to_string(i) + " has dimension " +
                                        std::to_string(a.rows()) + ", expected " +
                                        std::to_string(p.dim));
    }
    std::size_t found = p.mats.size();
    for (std::size_t j = 0; j < p.mats.size(); ++j) {
      if ((p.mats[j] - a).cwiseAbs().maxCoeff() <= kDedupTol) {
        found = j;
        break;
      }
    }
    if (found == p.mats.size()) {
      p.mats.push_back(a);
      p.first.push_back(i);
    }
    p.owner.push_back(found);
  }
  if (p.dim == 0) fail(Errc::DimensionMismatch, "forms have dimension 0");
  return p;
}

void require_shared_space(const std::vector<QuadraticForm>& forms) {
  const QuadraticForm& ref = forms.front();
  for (std::size_t i = 1; i < forms.size(); ++i) {
    if (forms[i].input_dist.size() != ref.input_dist.size() ||
        (forms[i].input_dist.probs() - ref.input_dist.probs()).cwiseAbs().maxCoeff() > 1e-12 ||
        (forms[i].basis - ref.basis).cwiseAbs().maxCoeff() > 1e-12) {
      fail(Errc::BasisMismatch, "form " + std::to_string(i) +
                                    " lives on a different input distribution or tangent basis");
    }
  }
}

double min_value(const std::vector<Matrix>& mats, const Vector& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix& a : mats) best = std::min(best, x.dot(a * x));
  return best;
}

Matrix combine(const std::vector<Matrix>& mats, const Vector& lambda) {
  Matrix out = Matrix::Zero(mats.front().rows(), mats.front().cols());
  for (std::size_t i = 0; i < mats.size(); ++i) out += lambda(static_cast<Eigen::Index>(i)) * mats[i];
  return out;
}

Vector expand(const Prepared& p, const Vector& reduced) {
  Vector full = Vector::Zero(static_cast<Eigen::Index>(p.owner.size()));
  for (std::size_t j = 0; j < p.first.size(); ++j) {
    full(static_cast<Eigen::Index>(p.first[j])) = reduced(static_cast<Eigen::Index>(j));
  }
  return full;
}

// ---------------------------------------------------------------------------
// Rank-1 primal search.

struct Candidate {
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
};

void keep_better(Candidate& best, const Vector& x, double value) {
  if (value > best.value) {
    best.x = x;
    best.value = value;
  }
}

// Riemannian ascent on the sphere of the soft-min
//   f_tau(x) = -tau log sum_i exp(-x^T A_i x / tau),
// with tau driven towards zero. Returns the best true min value seen.
Candidate polish(const std::vector<Matrix>& mats, Vector x, std::size_t max_iters) {
  x.normalize();
  Candidate best;
  keep_better(best, x, min_value(mats, x));
  const std::size_t k = mats.size();
  std::vector<double> q(k);
  std::vector<Vector> ax(k);

  auto soft_min = [&](const Vector& v, double tau, Vector* grad) {
    double qmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      ax[i] = mats[i] * v;
      q[i] = v.dot(ax[i]);
      qmin = std::min(qmin, q[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += std::exp(-(q[i] - qmin) / tau);
    if (grad) {
      grad->setZero(v.size());
      for (std::size_t i = 0; i < k; ++i) *grad += (2.0 * std::exp(-(q[i] - qmin) / tau) / z) * ax[i];
    }
    return qmin - tau * std::log(z);
  };

  const std::size_t per_stage = std::max<std::size_t>(20, max_iters / 8);
  for (double tau = 1e-2; tau >= 1e-10; tau *= 0.1) {
    Vector grad;
    double f = soft_min(x, tau, &grad);
    for (std::size_t it = 0; it < per_stage; ++it) {
      const Vector rg = grad - grad.dot(x) * x;
      const double g2 = rg.squaredNorm();
      if (g2 < 1e-28) break;
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const Vector trial = (x + step * rg).normalized();
        const double ft = soft_min(trial, tau, nullptr);
        if (ft >= f + 1e-4 * step * g2) {
          x = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
      f = soft_min(x, tau, &grad);
      keep_better(best, x, min_value(mats, x));
    }
  }
  return best;
}

Candidate golden_refine_2d(const std::vector<Matrix>& mats, double lo, double hi) {
  auto f = [&](double a) { return min_value(mats, Vector{{std::cos(a), std::sin(a)}}); };
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  return Candidate{Vector{{std::cos(mid), std::sin(mid)}}, f(mid)};
}

Candidate grid_search_2d(const std::vector<Matrix>& mats, std::size_t points) {
  points = std::max<std::size_t>(points, 16);
  const double pi = std::numbers::pi;
  Candidate best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double a = pi * static_cast<double>(i) / static_cast<double>(points);
    const Vector x{{std::cos(a), std::sin(a)}};
    const double v = min_value(mats, x);
    if (v > best.value) {
      best = Candidate{x, v};
      best_i = i;
    }
  }
  const double h = pi / static_cast<double>(points);
  const double a0 = pi * static_cast<double>(best_i) / static_cast<double>(points);
  const Candidate refined = golden_refine_2d(mats, a0 - h, a0 + h);
  keep_better(best, refined.x, refined.value);
  return best;
}

std::vector<Candidate> grid_search_3d(const std::vector<Matrix>& mats, std::size_t points,
                                      std::size_t keep) {
  const double pi = std::numbers::pi;
  const auto n_pol = std::max<std::size_t>(8, static_cast<std::size_t>(std::sqrt(points / 2.0)));
  const std::size_t n_az = 2 * n_pol;
  std::vector<Candidate> top;
  auto consider = [&](const Vector& x) {
    const double v = min_value(mats, x);
    if (top.size() < keep || v > top.back().value) {
      top.push_back(Candidate{x, v});
      std::stable_sort(top.begin(), top.end(),
                       [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
      if (top.size() > keep) top.pop_back();
    }
  };
  consider(Vector{{0.0, 0.0, 1.0}});
  for (std::size_t i = 1; i <= n_pol; ++i) {
    const double polar = 0.5 * pi * static_cast<double>(i) / static_cast<double>(n_pol);
    for (std::size_t j = 0; j < n_az; ++j) {
      const double az = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n_az);
      consider(Vector{{std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az),
                       std::cos(polar)}});
    }
  }
  return top;
}

Candidate rank1_search(const std::vector<Matrix>& mats, const SolverOptions& opts,
                       const Vector* lambda);

// Candidates from the top eigenspace of sum_i lambda_i A_i, where every
// optimal rank-1 direction lies when there is no duality gap.
Candidate from_dual(const std::vector<Matrix>& mats, const Vector& lambda,
                    const SolverOptions& opts) {
  const SymEigen eig = sym_eigen(combine(mats, lambda));
  const double top = eig.values(0);
  const double cut = 1e-6 * std::max(1.0, std::abs(top));
  Eigen::Index r = 1;
  while (r < eig.values.size() && top - eig.values(r) <= cut) ++r;
  Candidate best;
  for (Eigen::Index i = 0; i < r; ++i) keep_better(best, eig.vectors.col(i), min_value(mats, eig.vectors.col(i)));
  if (r > 1 && r < eig.values.size()) {
    const Matrix v = eig.vectors.leftCols(r);
    std::vector<Matrix> sub;
    sub.reserve(mats.size());
    for (const Matrix& a : mats) sub.push_back(symmetrize(v.transpose() * a * v));
    const Candidate inner = rank1_search(sub, opts, nullptr);
    const Vector x = (v * inner.x).normalized();
    keep_better(best, x, min_value(mats, x));
  }
  return best;
}

Candidate rank1_search(const std::vector<Matrix>& mats, const SolverOptions& opts,
                       const Vector* lambda) {
  const Eigen::Index m = mats.front().rows();
  Candidate best;
  if (m == 1) {
    keep_better(best, Vector::Ones(1), min_value(mats, Vector::Ones(1)));
    return best;
  }

  std::vector<Vector> starts;
  Matrix avg = Matrix::Zero(m, m);
  for (const Matrix& a : mats) {
    starts.push_back(sym_eigen(a).vectors.col(0));
    avg += a;
  }
  starts.push_back(sym_eigen(avg).vectors.col(0));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t s = 0; s < opts.starts; ++s) {
    Vector x(m);
    for (Eigen::Index i = 0; i < m; ++i) x(i) = normal(rng);
    if (x.norm() > 0.0) starts.push_back(x.normalized());
  }
  if (m == 2) {
    const Candidate g = grid_search_2d(mats, opts.grid);
    keep_better(best, g.x, g.value);
    starts.push_back(g.x);
  } else if (m == 3) {
    for (const Candidate& g : grid_search_3d(mats, opts.grid, 4)) {
      keep_better(best, g.x, g.value);
      starts.push_back(g.x);
    }
  }
  if (lambda != nullptr) {
    const Candidate d = from_dual(mats, *lambda, opts);
    keep_better(best, d.x, d.value);
    starts.push_back(d.x);
  }
  // Sequential scan keeps ties resolved towards the lowest start index.
  for (const Vector& s : starts) {
    keep_better(best, s, min_value(mats, s));
    const Candidate c = polish(mats, s, opts.max_iters);
    keep_better(best, c.x, c.value);
  }
  canonical_sign(best.x);
  return best;
}

// ---------------------------------------------------------------------------
// Dual problem.

DualResult dual_two(const std::vector<Matrix>& mats) {
  auto g = [&](double t) { return lambda_max(t * mats[0] + (1.0 - t) * mats[1]); };
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (gc <= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  double best_t = 0.5 * (a + b);
  double best = g(best_t);
  for (const double t : {0.0, 1.0}) {
    const double v = g(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return DualResult{best, Vector{{best_t, 1.0 - best_t}}};
}

struct BarrierResult {
  Vector lambda;
  Matrix primal;  // trace-1 PSD
  double dual_value = 0.0;
};

// Log-barrier path following for
//   min t  s.t.  t I - sum_i lambda_i A_i >= 0,  lambda in the simplex.
// On the central path X = (t I - M)^{-1} / s is a trace-1 PSD matrix with
// min_i tr(A_i X) within (m + k)/s of the optimum, so one run yields both the
// dual certificate and a primal ensemble.
BarrierResult barrier_solve(const std::vector<Matrix>& mats) {
  const auto k = static_cast<Eigen::Index>(mats.size());
  const Eigen::Index m = mats.front().rows();
  const Matrix eye = Matrix::Identity(m, m);

  Vector lambda = Vector::Constant(k, 1.0 / static_cast<double>(k));
  double t = lambda_max(combine(mats, lambda)) + 1.0;

  auto evaluate = [&](const Vector& lam, double tt, double s, double& phi,
                      Eigen::LLT<Matrix>* out) -> bool {
    if ((lam.array() <= 0.0).any()) return false;
    Eigen::LLT<Matrix> llt(tt * eye - combine(mats, lam));
    if (llt.info() != Eigen::Success) return false;
    const Matrix& l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(l(i, i) > 0.0)) return false;
      logdet += 2.0 * std::log(l(i, i));
    }
    phi = s * tt - logdet - lam.array().log().sum();
    if (out) *out = llt;
    return std::isfinite(phi);
  };

  const double target_gap = 1e-11;
  const double budget = static_cast<double>(m + k);
  for (double s = 1.0;; s *= 10.0) {
    for (int it = 0; it < 200; ++it) {
      double phi = 0.0;
      Eigen::LLT<Matrix> llt;
      if (!evaluate(lambda, t, s, phi, &llt)) {
        fail(Errc::NumericalFailure, "barrier iterate left the feasible region");
      }
      const Matrix r = llt.solve(eye);
      std::vector<Matrix> ra(static_cast<std::size_t>(k));
      for (Eigen::Index i = 0; i < k; ++i) ra[static_cast<std::size_t>(i)] = r * mats[static_cast<std::size_t>(i)];

      Vector grad(k + 1);
      Matrix hess(k + 1, k + 1);
      for (Eigen::Index i = 0; i < k; ++i) {
        const Matrix& rai = ra[static_cast<std::size_t>(i)];
        grad(i) = rai.trace() - 1.0 / lambda(i);
        for (Eigen::Index j = 0; j <= i; ++j) {
          const double h = (rai * ra[static_cast<std::size_t>(j)]).trace();
          hess(i, j) = h;
          hess(j, i) = h;
        }
        hess(i, i) += 1.0 / (lambda(i) * lambda(i));
        const double ht = -(rai * r).trace();
        hess(i, k) = ht;
        hess(k, i) = ht;
      }
      grad(k) = s - r.trace();
      hess(k, k) = (r * r).trace();

      // Newton step restricted to sum(lambda) = const via a null-space basis.
      Matrix basis = Matrix::Zero(k + 1, k);
      for (Eigen::Index i = 0; i + 1 < k; ++i) {
        basis(i, i) = 1.0;
        basis(k - 1, i) = -1.0;
      }
      basis(k, k - 1) = 1.0;
      const Matrix reduced = basis.transpose() * hess * basis;
      const Vector step = basis * reduced.ldlt().solve(-(basis.transpose() * grad));
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement)) fail(Errc::NumericalFailure, "barrier Newton step is not finite");
      if (decrement < 1e-12) break;

      double beta = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 80; ++ls, beta *= 0.5) {
        Vector lam_new = lambda + beta * step.head(k);
        const double t_new = t + beta * step(k);
        double phi_new = 0.0;
        if (evaluate(lam_new, t_new, s, phi_new, nullptr) &&
            phi_new <= phi - 0.25 * beta * decrement) {
          lambda = lam_new;
          t = t_new;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    // Rescaling (lambda, t) together keeps t I - M(lambda) positive definite.
    const double total = lambda.sum();
    lambda /= total;
    t /= total;
    if (budget / s < target_gap) {
      double phi = 0.0;
      Eigen::LLT<Matrix> llt;
      if (!evaluate(lambda, t, s, phi, &llt)) {
        fail(Errc::NumericalFailure, "barrier iterate left the feasible region");
      }
      Matrix x = symmetrize(llt.solve(eye));
      x /= x.trace();
      return BarrierResult{lambda, x, lambda_max(combine(mats, lambda))};
    }
  }
}

DualResult dual_reduced(const std::vector<Matrix>& mats) {
  if (mats.size() == 1) return DualResult{lambda_max(mats[0]), Vector::Ones(1)};
  if (mats.size() == 2) return dual_two(mats);
  const BarrierResult b = barrier_solve(mats);
  return DualResult{b.dual_value, b.lambda};
}

std::vector<double> per_form_values(const std::vector<QuadraticForm>& forms, const Vector& x) {
  std::vector<double> out;
  out.reserve(forms.size());
  for (const QuadraticForm& f : forms) out.push_back(f.value(x));
  return out;
}

std::vector<double> per_form_traces(const std::vector<QuadraticForm>& forms, const Matrix& x) {
  std::vector<double> out;
  out.reserve(forms.size());
  for (const QuadraticForm& f : forms) out.push_back((f.matrix * x).trace());
  return out;
}

std::size_t letters_for(std::size_t dim, std::size_t alphabet) {
  std::size_t n = 1;
  std::size_t size = alphabet;
  while (size < dim) {
    size *= alphabet;
    ++n;
  }
  if (size != dim) {
    fail(Errc::DimensionMismatch, "ensemble dimension " + std::to_string(dim) +
                                      " is not a power of the alphabet size " +
                                      std::to_string(alphabet));
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

QuadraticForm QuadraticForm::from_matrix(const Matrix& a, const ProbDist& px) {
  const auto m = static_cast<Eigen::Index>(px.size()) - 1;
  if (a.rows() != m || a.cols() != m) {
    fail(Errc::DimensionMismatch, "form must be (|X|-1) x (|X|-1)");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    fail(Errc::InvalidArgument, "form is not symmetric");
  }
  const SymEigen eig = sym_eigen(a);
  if (eig.values(m - 1) < -1e-9 || eig.values(0) > 1.0 + 1e-9) {
    fail(Errc::InvalidArgument, "form eigenvalues must lie in [0, 1]");
  }
  return QuadraticForm{symmetrize(a), complement_basis(px.sqrt()), px, std::nullopt};
}

Matrix QuadraticForm::operator_matrix() const {
  if (source) return source->matrix();
  const SymEigen eig = sym_eigen(matrix);
  const Vector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  const Matrix half = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  const Vector v0 = input_dist.sqrt();
  return v0 * v0.transpose() + basis * half * basis.transpose();
}

QuadraticForm tangent_form(const Dtm& d) {
  const Matrix q = complement_basis(d.input_dist().sqrt());
  const Matrix bq = d.matrix() * q;
  return QuadraticForm{symmetrize(bq.transpose() * bq), q, d.input_dist(), d};
}

CouplingEnsemble CouplingEnsemble::make(ProbDist weights, std::vector<Vector> perturbations,
                                        ProbDist base, double epsilon) {
  if (weights.size() != perturbations.size()) {
    fail(Errc::DimensionMismatch, "one weight per perturbation is required");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    fail(Errc::InvalidEpsilon, "epsilon must be a finite nonnegative number");
  }
  const Vector root = base.sqrt();
  Vector mean = Vector::Zero(root.size());
  double scale = 1.0;
  for (std::size_t u = 0; u < perturbations.size(); ++u) {
    const Vector& l = perturbations[u];
    if (l.size() != root.size()) {
      fail(Errc::DimensionMismatch, "perturbation " + std::to_string(u) + " has the wrong size");
    }
    if (std::abs(l.dot(root)) > 1e-10 * std::max(1.0, l.norm())) {
      fail(Errc::InvalidArgument,
           "perturbation " + std::to_string(u) + " is not orthogonal to sqrt(P_X)");
    }
    const Vector q = base.probs() + epsilon * root.cwiseProduct(l);
    if ((q.array() <= 0.0).any()) {
      fail(Errc::InvalidEpsilon, "epsilon " + std::to_string(epsilon) + " pushes conditional " +
                                     std::to_string(u) + " off the simplex");
    }
    mean += weights[u] * l;
    scale = std::max(scale, l.norm());
  }
  if (mean.norm() > 1e-10 * scale) {
    fail(Errc::InvalidArgument, "weighted perturbations do not average to zero; the marginal "
                                "P_X would not be preserved");
  }
  return CouplingEnsemble(std::move(weights), std::move(perturbations), std::move(base), epsilon);
}

double CouplingEnsemble::quadratic_input_information() const {
  double acc = 0.0;
  for (std::size_t u = 0; u < size(); ++u) acc += weights_[u] * perturbations_[u].squaredNorm();
  return 0.5 * epsilon_ * epsilon_ * acc;
}

std::vector<ProbDist> CouplingEnsemble::conditionals() const {
  const Vector root = base_.sqrt();
  std::vector<ProbDist> out;
  out.reserve(size());
  for (const Vector& l : perturbations_) {
    out.push_back(ProbDist::validate(Vector(base_.probs() + epsilon_ * root.cwiseProduct(l))));
  }
  return out;
}

MaxMinSolution solve_p2p(const Dtm& d, double epsilon) {
  const LocalCapacity cap = local_capacity(d);
  const Vector& v2 = cap.v2.vec();
  const double value = cap.efficiency();
  CouplingEnsemble ens = CouplingEnsemble::make(ProbDist::uniform(2), {v2, Vector(-v2)},
                                                d.input_dist(), epsilon);
  return MaxMinSolution{value, std::move(ens), Vector::Ones(1), value, 0.0, {value}};
}

DualResult maxmin_dual(const std::vector<QuadraticForm>& forms, const SolverOptions& opts) {
  (void)opts;
  const Prepared p = prepare(forms);
  DualResult r = dual_reduced(p.mats);
  r.lambda = expand(p, r.lambda);
  return r;
}

MaxMinSolution maxmin_rank1(const std::vector<QuadraticForm>& forms, const SolverOptions& opts) {
  const Prepared p = prepare(forms);
  const DualResult dual = dual_reduced(p.mats);
  const Candidate best = rank1_search(p.mats, opts, &dual.lambda);
  const double value = std::max(0.0, best.value);
  if (value > dual.dual_value + kWeakDualityTol) {
    fail(Errc::NumericalFailure, "rank-1 value " + std::to_string(value) + " exceeds the dual bound " + std::to_string(dual.dual_value));
  }
  return MaxMinSolution{value,         best.x,
                        expand(p, dual.lambda),
                        dual.dual_value, dual.dual_value - value,
                        per_form_values(forms, best.x)};
}

MaxMinSolution maxmin_ensemble(const std::vector<QuadraticForm>& forms, const SolverOptions& opts) {
  const Prepared p = prepare(forms);
  require_shared_space(forms);
  const QuadraticForm& ref = forms.front();

  Matrix x;
  DualResult dual = dual_reduced(p.mats);
  if (p.mats.size() == 1) {
    const Vector v = sym_eigen(p.mats[0]).vectors.col(0);
    x = v * v.transpose();
  } else {
    const BarrierResult b = barrier_solve(p.mats);
    x = b.primal;
    if (b.dual_value < dual.dual_value) dual = DualResult{b.dual_value, b.lambda};
  }

  double value = std::numeric_limits<double>::infinity();
  for (const Matrix& a : p.mats) value = std::min(value, (a * x).trace());
  if (dual.dual_value - value > std::max(opts.tol, 1e-9)) {
    std::ostringstream msg;
    msg << "ensemble value " << value << " falls short of the dual bound " << dual.dual_value
        << "; active traces:";
    for (std::size_t i = 0; i < p.mats.size(); ++i) {
      if (dual.lambda(static_cast<Eigen::Index>(i)) > kActiveTol) msg << ' ' << (p.mats[i] * x).trace();
    }
    fail(Errc::FeasibilityFailure, msg.str());
  }

  // Atoms: +/- the eigenvectors of X, optionally truncated to the cardinality
  // bound.
  const SymEigen eig = sym_eigen(x);
  Eigen::Index r = 0;
  while (r < eig.values.size() && eig.values(r) > 1e-12) ++r;
  if (opts.cardinality > 0) {
    const auto cap_pairs = static_cast<Eigen::Index>(std::max<std::size_t>(1, opts.cardinality / 2));
    r = std::min(r, cap_pairs);
  }
  r = std::max<Eigen::Index>(r, 1);
  Vector mu = eig.values.head(r).cwiseMax(0.0);
  mu /= mu.sum();
  Matrix truncated = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < r; ++j) truncated += mu(j) * eig.vectors.col(j) * eig.vectors.col(j).transpose();
  value = std::numeric_limits<double>::infinity();
  for (const Matrix& a : p.mats) value = std::min(value, (a * truncated).trace());

  std::vector<Vector> atoms;
  std::vector<double> weights;
  for (Eigen::Index j = 0; j < r; ++j) {
    Vector dir = eig.vectors.col(j);
    canonical_sign(dir);
    Vector l = ref.basis * dir;
    double w = 0.5 * mu(j);
    if (opts.uniform_weights) {
      l *= std::sqrt(static_cast<double>(r) * mu(j));
      w = 0.5 / static_cast<double>(r);
    }
    atoms.push_back(l);
    atoms.push_back(-l);
    weights.push_back(w);
    weights.push_back(w);
  }
  CouplingEnsemble ens =
      CouplingEnsemble::make(ProbDist::validate(std::span<const double>(weights)), std::move(atoms),
                             ref.input_dist, opts.epsilon);
  value = std::max(0.0, value);
  return MaxMinSolution{value,         std::move(ens),
                        expand(p, dual.lambda),
                        dual.dual_value, dual.dual_value - value,
                        per_form_traces(forms, truncated)};
}

MaxMinSolution solve_broadcast2(const Dtm& d1, const Dtm& d2, const SolverOptions& opts) {
  if (d1.input_dist().size() != d2.input_dist().size()) {
    fail(Errc::DimensionMismatch, "the two channels have different input alphabets");
  }
  if ((d1.input_dist().probs() - d2.input_dist().probs()).cwiseAbs().maxCoeff() > 1e-12) {
    fail(Errc::BasisMismatch, "the two DTMs are built on different input distributions");
  }
  MaxMinSolution sol = maxmin_rank1({tangent_form(d1), tangent_form(d2)}, opts);
  if (sol.gap > opts.tol) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "two-receiver duality gap " << sol.gap << " exceeds tolerance " << opts.tol
        << " (rank-1 " << sol.value << ", dual " << sol.dual_value << ")";
    throw GapDetected(std::move(sol), msg.str());
  }
  return sol;
}

std::vector<Vector> frame_directions(const Matrix& m, std::size_t n) {
  if (n == 0) fail(Errc::InvalidArgument, "frame needs at least one direction");
  const SymEigen eig = sym_eigen(m);
  if (std::abs(m.trace() - 1.0) > 1e-9 || eig.values(eig.values.size() - 1) < -1e-9) {
    fail(Errc::InvalidArgument, "frame target must be trace-1 PSD");
  }
  Eigen::Index rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > 1e-12) ++rank;
  if (static_cast<std::size_t>(rank) > n) {
    fail(Errc::InvalidArgument, "need at least rank = " + std::to_string(rank) + " directions");
  }
  const auto cols = static_cast<Eigen::Index>(n);
  const double scale = static_cast<double>(n);
  Matrix d = Matrix::Zero(m.rows(), cols);
  for (Eigen::Index j = 0; j < rank; ++j) {
    d.col(j) = std::sqrt(scale * std::max(0.0, eig.values(j))) * eig.vectors.col(j);
  }
  // Plane rotations of column pairs keep D D^T fixed; each one sets a column
  // norm to exactly 1 (one long and one short column per step).
  for (Eigen::Index step = 0; step < cols; ++step) {
    Eigen::Index hi = 0, lo = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (d.col(j).squaredNorm() > d.col(hi).squaredNorm()) hi = j;
      if (d.col(j).squaredNorm() < d.col(lo).squaredNorm()) lo = j;
    }
    const double a = d.col(hi).squaredNorm();
    const double c = d.col(lo).squaredNorm();
    if (a - 1.0 <= 1e-14 && 1.0 - c <= 1e-14) break;
    const double b = d.col(hi).dot(d.col(lo));
    // (c - 1) t^2 + 2 b t + (a - 1) = 0 with (c - 1)(a - 1) < 0.
    const double qa = c - 1.0, qb = 2.0 * b, qc = a - 1.0;
    const double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
    const double tan_t = std::abs(qa) < 1e-300 ? -qc / qb : (-qb + disc) / (2.0 * qa);
    const double cs = 1.0 / std::sqrt(1.0 + tan_t * tan_t);
    const double sn = tan_t * cs;
    const Vector u = d.col(hi), w = d.col(lo);
    d.col(hi) = cs * u + sn * w;
    d.col(lo) = -sn * u + cs * w;
  }
  std::vector<Vector> out;
  for (Eigen::Index j = 0; j < cols; ++j) {
    Vector v = d.col(j);
    const double len = v.norm();
    if (std::abs(len - 1.0) > 1e-9) fail(Errc::NumericalFailure, "frame rotation did not converge");
    out.push_back(v / len);
  }
  return out;
}

KLetterResult k_letter_construction(const std::vector<QuadraticForm>& forms,
                                    const std::vector<Vector>& directions, double epsilon) {
  const Prepared p = prepare(forms);
  require_shared_space(forms);
  if (directions.empty()) fail(Errc::InvalidArgument, "at least one letter is required");
  const QuadraticForm& ref = forms.front();
  const std::size_t n = directions.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (directions[j].size() != p.dim) {
      fail(Errc::DimensionMismatch, "direction " + std::to_string(j) + " has the wrong dimension");
    }
    if (std::abs(directions[j].norm() - 1.0) > 1e-9) {
      fail(Errc::InvalidArgument, "direction " + std::to_string(j) + " is not a unit vector");
    }
  }

  std::vector<double> algebraic;
  for (const QuadraticForm& f : forms) {
    double acc = 0.0;
    for (const Vector& dj : directions) acc += f.value(dj);
    algebraic.push_back(acc / static_cast<double>(n));
  }

  const Vector v0 = ref.input_dist.sqrt();
  const std::size_t total = checked_power(ref.input_dist.size(), n, kDefaultSizeCap);
  Vector l = Vector::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Vector> slots(n, v0);
    slots[j] = ref.basis * directions[j];
    l += tensor_product(slots);
  }
  const double l2 = l.squaredNorm();

  std::vector<double> brute;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const TensorOperator op(forms[i].operator_matrix(), n);
    const double v = op.apply(l).squaredNorm() / l2;
    if (std::abs(v - algebraic[i]) > 1e-9) {
      fail(Errc::NumericalFailure, "k-letter efficiency through channel " + std::to_string(i) +
                                       " disagrees with tensor application");
    }
    brute.push_back(v);
  }

  const Vector unit = l / std::sqrt(l2);
  CouplingEnsemble ens = CouplingEnsemble::make(ProbDist::uniform(2), {unit, Vector(-unit)},
                                                kron_power_dist(ref.input_dist, n), epsilon);
  return KLetterResult{std::move(algebraic), std::move(brute), std::move(ens)};
}

std::vector<double> efficiency(const CouplingEnsemble& e, const std::vector<Dtm>& dtms, bool exact) {
  if (dtms.empty()) fail(Errc::EmptyInput, "at least one DTM is required");
  const std::size_t dim = e.base().size();
  std::vector<double> out;
  for (const Dtm& d : dtms) {
    const std::size_t n = letters_for(dim, d.input_dist().size());
    const ProbDist marginal = kron_power_dist(d.input_dist(), n);
    if ((marginal.probs() - e.base().probs()).cwiseAbs().maxCoeff() > 1e-12) {
      fail(Errc::BasisMismatch, "ensemble base does not match the DTM input distribution");
    }
    if (!exact) {
      const TensorOperator op(d, n);
      double num = 0.0, den = 0.0;
      for (std::size_t u = 0; u < e.size(); ++u) {
        num += e.weights()[u] * op.apply(e.perturbations()[u]).squaredNorm();
        den += e.weights()[u] * e.perturbations()[u].squaredNorm();
      }
      if (!(den > 0.0)) fail(Errc::ZeroPerturbation, "ensemble perturbations are all zero");
      out.push_back(num / den);
      continue;
    }
    const std::vector<ProbDist> conds = e.conditionals();
    const std::vector<double> w(e.weights().probs().data(),
                                e.weights().probs().data() + e.weights().size());
    const double ix = exact_mutual_information(w, conds);
    if (!(ix > 0.0)) fail(Errc::ZeroPerturbation, "ensemble carries no input information");
    const TensorOperator channel(d.channel().matrix(), n);
    std::vector<ProbDist> outs;
    outs.reserve(conds.size());
    for (const ProbDist& c : conds) outs.push_back(ProbDist::validate(channel.apply(c.probs())));
    out.push_back(exact_mutual_information(w, outs) / ix);
  }
  return out;
}

std::vector<double> efficiency(const CouplingEnsemble& e, const std::vector<QuadraticForm>& forms) {
  if (forms.empty()) fail(Errc::EmptyInput, "at least one form is required");
  std::vector<double> out;
  for (const QuadraticForm& f : forms) {
    const std::size_t n = letters_for(e.base().size(), f.input_dist.size());
    const TensorOperator op(f.operator_matrix(), n);
    double num = 0.0, den = 0.0;
    for (std::size_t u = 0; u < e.size(); ++u) {
      num += e.weights()[u] * op.apply(e.perturbations()[u]).squaredNorm();
      den += e.weights()[u] * e.perturbations()[u].squaredNorm();
    }
    if (!(den > 0.0)) fail(Errc::ZeroPerturbation, "ensemble perturbations are all zero");
    out.push_back(num / den);
  }
  return out;
}

}  // namespace licp
