#include "licp/prob.hpp"

#include "licp/error.hpp"

#include <cmath>
#include <string>

namespace licp {
namespace {

// Sum of p * ln(p / q) for strictly positive vectors. log1p keeps the
// cancellation error small when q is a local perturbation of p.
double kl_raw(const Vector& p, const Vector& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc -= p(i) * std::log1p((q(i) - p(i)) / p(i));
  }
  return acc < 0.0 ? 0.0 : acc;
}

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    fail(Errc::DimensionMismatch, std::string(what) + ": sizes " + std::to_string(a) +
                                      " and " + std::to_string(b) + " differ");
  }
}

}  // namespace

ProbDist ProbDist::validate(std::span<const double> raw) {
  if (raw.empty()) fail(Errc::InvalidArgument, "distribution must be nonempty");
  Vector p(static_cast<Eigen::Index>(raw.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > 0.0) || !std::isfinite(raw[i])) {
      fail(Errc::NonPositiveEntry,
           "entry " + std::to_string(i) + " is " + std::to_string(raw[i]) +
               "; probabilities must be strictly positive");
    }
    p(static_cast<Eigen::Index>(i)) = raw[i];
    sum += raw[i];
  }
  if (std::abs(sum - 1.0) > kInputSumTol) {
    fail(Errc::NotNormalized, "entries sum to " + std::to_string(sum));
  }
  return ProbDist(std::move(p));
}

ProbDist ProbDist::validate(const Vector& raw) {
  return validate(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())));
}

ProbDist ProbDist::uniform(std::size_t n) {
  if (n == 0) fail(Errc::InvalidArgument, "uniform distribution needs n >= 1");
  return ProbDist(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Channel Channel::validate(const Matrix& w) {
  if (w.rows() == 0 || w.cols() == 0) fail(Errc::InvalidArgument, "channel matrix is empty");
  for (Eigen::Index x = 0; x < w.cols(); ++x) {
    double sum = 0.0;
    for (Eigen::Index y = 0; y < w.rows(); ++y) {
      const double v = w(y, x);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail(Errc::NonPositiveEntry, "W(" + std::to_string(y) + "|" + std::to_string(x) +
                                         ") = " + std::to_string(v) + " is negative");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kInputSumTol) {
      fail(Errc::NotNormalized,
           "column " + std::to_string(x) + " sums to " + std::to_string(sum));
    }
  }
  return Channel(w);
}

Channel Channel::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return Channel(Matrix::Identity(k, k));
}

Channel Channel::bsc(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(Errc::InvalidArgument, "crossover must lie in [0, 1]");
  Matrix w(2, 2);
  w << 1.0 - p, p, p, 1.0 - p;
  return Channel(std::move(w));
}

Perturbation Perturbation::make(ProbDist base, Vector direction, double epsilon) {
  require_same_size(static_cast<Eigen::Index>(base.size()), direction.size(), "perturbation");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    fail(Errc::InvalidEpsilon, "epsilon must be a finite nonnegative number");
  }
  const double scale = std::max(1.0, direction.lpNorm<1>());
  if (std::abs(direction.sum()) > 1e-12 * scale) {
    fail(Errc::InvalidArgument, "perturbation direction must sum to zero");
  }
  const Vector q = base.probs() + epsilon * direction;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (!(q(i) > 0.0)) {
      fail(Errc::InvalidEpsilon, "epsilon " + std::to_string(epsilon) +
                                     " moves symbol " + std::to_string(i) +
                                     " off the simplex interior");
    }
  }
  return Perturbation(std::move(base), std::move(direction), epsilon);
}

ProbDist Perturbation::perturbed() const {
  // Entries are positive by construction; the sum is 1 up to rounding of the
  // zero-sum direction, well inside the input tolerance.
  return ProbDist::validate(Vector(base_.probs() + epsilon_ * direction_));
}

ScaledPerturbation ScaledPerturbation::make(ProbDist base, Vector vec) {
  require_same_size(static_cast<Eigen::Index>(base.size()), vec.size(), "scaled perturbation");
  const double inner = vec.dot(base.sqrt());
  if (std::abs(inner) > 1e-10 * std::max(1.0, vec.norm())) {
    fail(Errc::InvalidArgument, "scaled perturbation is not orthogonal to sqrt(P)");
  }
  return ScaledPerturbation(std::move(base), std::move(vec));
}

ProbDist validate_dist(std::span<const double> raw) { return ProbDist::validate(raw); }

double kl_divergence(const ProbDist& p, const ProbDist& q) {
  require_same_size(p.probs().size(), q.probs().size(), "kl_divergence");
  return kl_raw(p.probs(), q.probs());
}

ProbDist push_forward(const Channel& w, const ProbDist& p) {
  require_same_size(w.matrix().cols(), p.probs().size(), "push_forward");
  const Vector out = w.matrix() * p.probs();
  for (Eigen::Index y = 0; y < out.size(); ++y) {
    if (!(out(y) > 0.0)) {
      fail(Errc::NonPositiveEntry,
           "output symbol " + std::to_string(y) + " has zero probability");
    }
  }
  return ProbDist::validate(out);
}

double exact_mutual_information(std::span<const double> weights,
                                const std::vector<ProbDist>& conditionals) {
  if (weights.size() != conditionals.size()) {
    fail(Errc::DimensionMismatch, "one weight per conditional is required");
  }
  const ProbDist w = ProbDist::validate(weights);
  const Eigen::Index n = conditionals.front().probs().size();
  Vector marginal = Vector::Zero(n);
  for (std::size_t u = 0; u < conditionals.size(); ++u) {
    require_same_size(n, conditionals[u].probs().size(), "exact_mutual_information");
    marginal += w[u] * conditionals[u].probs();
  }
  double info = 0.0;
  for (std::size_t u = 0; u < conditionals.size(); ++u) {
    info += w[u] * kl_raw(conditionals[u].probs(), marginal);
  }
  return info;
}

double weighted_inner_product(const Vector& j1, const Vector& j2, const ProbDist& p) {
  require_same_size(j1.size(), j2.size(), "weighted_inner_product");
  require_same_size(j1.size(), p.probs().size(), "weighted_inner_product");
  return (j1.array() * j2.array() / p.probs().array()).sum();
}

Vector scale(const Vector& j, const ProbDist& base) {
  require_same_size(j.size(), base.probs().size(), "scale");
  return (j.array() / base.probs().array().sqrt()).matrix();
}

Vector unscale(const Vector& l, const ProbDist& base) {
  require_same_size(l.size(), base.probs().size(), "unscale");
  return (l.array() * base.probs().array().sqrt()).matrix();
}

ScaledPerturbation scale(const Perturbation& p) {
  return ScaledPerturbation::make(p.base(), scale(p.direction(), p.base()));
}

Vector unscale(const ScaledPerturbation& l) { return unscale(l.vec(), l.base()); }

}  // namespace licp
