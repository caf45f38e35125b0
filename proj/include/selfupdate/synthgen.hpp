#pragma once

#include <cstdint>
#include <vector>

#include "selfupdate/core.hpp"

namespace selfupdate {

struct SynthParams {
  std::size_t k_users = 10;
  std::size_t dim = 8;
  double sigma = 1.0;
  double separation = 8.0;  // minimum distance between user means, in sigmas
  double tail_eps = 0.1;    // probability of drawing from another user's region
  std::size_t samples_per_user = 42;
  std::uint64_t seed = 0;
};

struct SynthDataset {
  std::vector<Sample> samples;       // user-major; ids 0..N-1, users 1..k
  std::vector<FeatureVector> means;  // means[i] belongs to user i + 1
  std::vector<bool> from_mode;       // aligned with samples
};

void validate(const SynthParams& params);

/// User means at pairwise distance >= separation * sigma. A regular simplex
/// in the first k-1 coordinates when dim >= k-1, seeded rejection sampling
/// in a cube otherwise.
std::vector<FeatureVector> place_means(const SynthParams& params);

/// Dominating-mode generator. Each sample of user i comes from
/// N(mean_i, sigma^2 I) with probability 1 - tail_eps, otherwise from
/// N(mean_j, (3 sigma)^2 I) for a uniformly chosen other user j.
///
/// Draw order per sample: one uniform for the mode decision, one index for
/// the other user when in the tail, then dim Box-Muller normals.
SynthDataset generate(const SynthParams& params);

}  // namespace selfupdate
