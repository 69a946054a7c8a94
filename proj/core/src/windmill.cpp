#include "licp/windmill.hpp"

#include "licp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace licp {

Vector unit_direction(double angle) { return Vector{{std::cos(angle), std::sin(angle)}}; }

WindmillInstance make_windmill(std::size_t k) {
  if (k < 2) fail(Errc::InvalidK, "windmill needs k >= 2 receivers, got " + std::to_string(k));
  const ProbDist px = ProbDist::uniform(3);
  WindmillInstance w;
  w.k = k;
  w.degenerate = k == 2;
  for (std::size_t i = 0; i < k; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
    const Vector phi = unit_direction(angle);
    w.angles.push_back(angle);
    w.forms.push_back(QuadraticForm::from_matrix(phi * phi.transpose(), px));
  }
  return w;
}

MaxMinSolution single_letter_value(const WindmillInstance& w, const SolverOptions& opts) {
  return maxmin_rank1(w.forms, opts);
}

std::vector<double> multiletter_value(const WindmillInstance& w, double theta) {
  if (w.k < 3) fail(Errc::InvalidK, "the multi-letter schedule needs k >= 3");
  std::vector<Vector> directions;
  for (std::size_t j = 0; j < w.k; ++j) directions.push_back(unit_direction(theta + w.angles[j]));
  return k_letter_construction(w.forms, directions).per_channel_values;
}

CouplingEnsemble cardinality_solution(const WindmillInstance& w, double theta, double epsilon) {
  if (w.k < 3) fail(Errc::InvalidK, "the cardinality-2k ensemble needs k >= 3");
  const QuadraticForm& ref = w.forms.front();
  std::vector<Vector> atoms;
  for (std::size_t j = 0; j < w.k; ++j) {
    const Vector l = ref.basis * unit_direction(theta + w.angles[j]);
    atoms.push_back(l);
    atoms.push_back(-l);
  }
  return CouplingEnsemble::make(ProbDist::uniform(2 * w.k), std::move(atoms), ref.input_dist,
                                epsilon);
}

SynthesizedChannel synthesize_channel(const ProbDist& px, const Vector& l, double gain) {
  if (static_cast<std::size_t>(l.size()) != px.size()) {
    fail(Errc::DimensionMismatch, "direction does not match the input alphabet");
  }
  if (std::abs(l.norm() - 1.0) > 1e-9 || std::abs(l.dot(px.sqrt())) > 1e-10) {
    fail(Errc::InvalidArgument, "direction must be a unit vector orthogonal to sqrt(P_X)");
  }
  // W(0|x) = q0 + g sqrt(q0 q1) t_x with t = l / sqrt(P_X); the largest
  // feasible g is 1/sqrt(t_max |t_min|), reached at q0 = |t_min| / (t_max + |t_min|).
  const Vector t = (l.array() / px.probs().array().sqrt()).matrix();
  const double t_max = t.maxCoeff();
  const double t_min = -t.minCoeff();
  const double q0 = t_min / (t_max + t_min);
  const double q1 = 1.0 - q0;
  const double g = std::min(gain, 1.0 / std::sqrt(t_max * t_min));
  const double c = std::sqrt(q0 * q1);
  Matrix w(2, l.size());
  for (Eigen::Index x = 0; x < l.size(); ++x) {
    const double p0 = std::clamp(q0 + g * c * t(x), 0.0, 1.0);
    w(0, x) = p0;
    w(1, x) = 1.0 - p0;
  }
  return SynthesizedChannel{Channel::validate(w), g};
}

std::vector<SynthesizedChannel> windmill_channels(const WindmillInstance& w) {
  const QuadraticForm& ref = w.forms.front();
  double gain = 1.0;
  for (const double a : w.angles) {
    gain = std::min(gain, synthesize_channel(ref.input_dist, ref.basis * unit_direction(a), 1.0).gain);
  }
  std::vector<SynthesizedChannel> out;
  for (const double a : w.angles) {
    out.push_back(synthesize_channel(ref.input_dist, ref.basis * unit_direction(a), gain));
  }
  return out;
}

}  // namespace licp
