#pragma once

// The windmill family: k receivers whose DTMs act on a two-dimensional
// tangent space (ternary input) as a rotation by 2 pi (i-1)/k followed by
// projection onto the first axis. Efficiency of a unit direction phi_a is
// cos^2(a - theta_i).

#include "licp/coupling.hpp"

#include <cstddef>
#include <vector>

namespace licp {

struct WindmillInstance {
  std::size_t k = 0;
  std::vector<double> angles;
  std::vector<QuadraticForm> forms;
  /// k = 2 puts both receivers on the same line (angles 0 and pi).
  bool degenerate = false;
};

/// phi_a = (cos a, sin a).
Vector unit_direction(double angle);

WindmillInstance make_windmill(std::size_t k);

MaxMinSolution single_letter_value(const WindmillInstance& w, const SolverOptions& opts = {});

/// Per-channel efficiency of the k-letter rotation schedule starting at theta.
std::vector<double> multiletter_value(const WindmillInstance& w, double theta);

/// The 2k-atom ensemble +/- phi_{theta + 2 pi (j-1)/k}, uniform weights.
CouplingEnsemble cardinality_solution(const WindmillInstance& w, double theta = 0.0,
                                      double epsilon = 1e-3);

struct SynthesizedChannel {
  Channel channel;
  double gain = 0.0;  // singular value attached to the requested direction
};

/// Binary-output channel whose DTM is sqrt(P_Y) sqrt(P_X)^T + gain * u1 l^T for
/// the unit tangent vector l (full input coordinates). The gain is the
/// requested one capped at the largest value keeping W stochastic.
SynthesizedChannel synthesize_channel(const ProbDist& px, const Vector& l, double gain);

/// Channels realizing the windmill forms scaled by a common gain^2. For k = 3
/// the gain is exactly 1: the channels report whether X equals symbol i.
std::vector<SynthesizedChannel> windmill_channels(const WindmillInstance& w);

}  // namespace licp
