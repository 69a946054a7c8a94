#pragma once

// Probability objects on finite alphabets and the exact information
// quantities built on them. All quantities are in nats.

#include "licp/linalg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace licp {

inline constexpr double kInputSumTol = 1e-9;

/// Strictly positive probability vector. Construction validates and never
/// renormalizes.
class ProbDist {
 public:
  static ProbDist validate(std::span<const double> raw);
  static ProbDist validate(const Vector& raw);
  static ProbDist uniform(std::size_t n);

  const Vector& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

  /// Entrywise square root; the top right singular vector of every DTM built
  /// on this distribution.
  Vector sqrt() const { return probs_.array().sqrt().matrix(); }

 private:
  explicit ProbDist(Vector p) : probs_(std::move(p)) {}
  Vector probs_;
};

/// Column-stochastic |Y| x |X| matrix; column x holds W(.|x).
class Channel {
 public:
  static Channel validate(const Matrix& w);
  static Channel identity(std::size_t n);
  /// Binary symmetric channel with crossover p.
  static Channel bsc(double p);

  const Matrix& matrix() const noexcept { return w_; }
  std::size_t input_size() const noexcept { return static_cast<std::size_t>(w_.cols()); }
  std::size_t output_size() const noexcept { return static_cast<std::size_t>(w_.rows()); }

 private:
  explicit Channel(Matrix w) : w_(std::move(w)) {}
  Matrix w_;
};

/// Q = P + eps * J with sum(J) = 0 and Q strictly positive.
class Perturbation {
 public:
  static Perturbation make(ProbDist base, Vector direction, double epsilon);

  const ProbDist& base() const noexcept { return base_; }
  const Vector& direction() const noexcept { return direction_; }
  double epsilon() const noexcept { return epsilon_; }
  /// The perturbed distribution P + eps * J.
  ProbDist perturbed() const;

 private:
  Perturbation(ProbDist base, Vector direction, double epsilon)
      : base_(std::move(base)), direction_(std::move(direction)), epsilon_(epsilon) {}
  ProbDist base_;
  Vector direction_;
  double epsilon_;
};

/// L = J / sqrt(P), orthogonal to sqrt(P).
class ScaledPerturbation {
 public:
  static ScaledPerturbation make(ProbDist base, Vector vec);

  const ProbDist& base() const noexcept { return base_; }
  const Vector& vec() const noexcept { return vec_; }

 private:
  ScaledPerturbation(ProbDist base, Vector vec) : base_(std::move(base)), vec_(std::move(vec)) {}
  ProbDist base_;
  Vector vec_;
};

ProbDist validate_dist(std::span<const double> raw);

double kl_divergence(const ProbDist& p, const ProbDist& q);

ProbDist push_forward(const Channel& w, const ProbDist& p);

/// I(U;X) = sum_u w(u) D(P_{X|U=u} || P_X) with P_X the weighted mixture.
double exact_mutual_information(std::span<const double> weights,
                                const std::vector<ProbDist>& conditionals);

/// <J1, J2>_P = sum_x J1(x) J2(x) / P(x).
double weighted_inner_product(const Vector& j1, const Vector& j2, const ProbDist& p);

ScaledPerturbation scale(const Perturbation& p);
Vector scale(const Vector& j, const ProbDist& base);
Vector unscale(const ScaledPerturbation& l);
Vector unscale(const Vector& l, const ProbDist& base);

}  // namespace licp
