#include "selfupdate/synthgen.hpp"

#include <cmath>
#include <string>

#include "selfupdate/clustering.hpp"
#include "selfupdate/random.hpp"

namespace selfupdate {

namespace {

// Rejection sampling starts in a cube whose volume matches k balls of the
// separation diameter and widens it 5% after this many consecutive misses.
constexpr std::size_t kMissesBeforeGrowth = 1000;
constexpr std::size_t kMaxPlacementAttempts = 2'000'000;

std::vector<FeatureVector> simplex_means(const SynthParams& params) {
  const std::size_t k = params.k_users;
  const double a = (1.0 - std::sqrt(static_cast<double>(k))) / static_cast<double>(k - 1);
  std::vector<std::vector<double>> v(k, std::vector<double>(params.dim, 0.0));
  for (std::size_t i = 0; i + 1 < k; ++i) v[i][i] = 1.0;
  for (std::size_t d = 0; d + 1 < k; ++d) v[k - 1][d] = a;
  // Edge length is sqrt(2) before scaling; center on the origin.
  const double scale = params.separation * params.sigma / std::sqrt(2.0);
  std::vector<double> center(params.dim, 0.0);
  for (const auto& p : v)
    for (std::size_t d = 0; d < params.dim; ++d) center[d] += p[d] / static_cast<double>(k);
  std::vector<FeatureVector> out;
  for (auto& p : v) {
    for (std::size_t d = 0; d < params.dim; ++d) p[d] = (p[d] - center[d]) * scale;
    out.emplace_back(std::move(p));
  }
  return out;
}

void require_representable(const SynthParams& params) {
  const double extent = params.separation * params.sigma * static_cast<double>(params.k_users);
  if (!std::isfinite(extent * extent)) {
    throw Error(ErrorCode::infeasible,
                "cannot place means at separation " + std::to_string(params.separation) +
                    " sigma: coordinates overflow in dim " + std::to_string(params.dim));
  }
}

std::vector<FeatureVector> rejection_means(const SynthParams& params, Rng& rng) {
  const double min_d = params.separation * params.sigma;
  const double min_d2 = min_d * min_d;
  double side = min_d * std::pow(static_cast<double>(params.k_users),
                                 1.0 / static_cast<double>(params.dim));
  std::vector<FeatureVector> out;
  std::size_t attempts = 0;
  std::size_t misses = 0;
  while (out.size() < params.k_users) {
    if (attempts++ >= kMaxPlacementAttempts) {
      throw Error(ErrorCode::infeasible,
                  "cannot place " + std::to_string(params.k_users) + " means at separation " +
                      std::to_string(params.separation) + " sigma in dim " +
                      std::to_string(params.dim));
    }
    std::vector<double> c(params.dim);
    for (auto& x : c) x = (rng.uniform01() - 0.5) * side;
    FeatureVector candidate(std::move(c));
    bool ok = true;
    for (const auto& m : out) {
      if (squared_euclidean(candidate, m) < min_d2) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.push_back(std::move(candidate));
      misses = 0;
    } else if (++misses == kMissesBeforeGrowth) {
      side *= 1.05;
      misses = 0;
    }
  }
  return out;
}

}  // namespace

void validate(const SynthParams& params) {
  if (params.k_users < 2) throw Error(ErrorCode::invalid_argument, "synth needs k_users >= 2");
  if (params.dim < 1) throw Error(ErrorCode::invalid_argument, "synth needs dim >= 1");
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
    throw Error(ErrorCode::invalid_argument, "synth needs sigma > 0");
  }
  if (!(params.separation > 0.0) || !std::isfinite(params.separation)) {
    throw Error(ErrorCode::invalid_argument, "synth needs separation > 0");
  }
  if (!(params.tail_eps >= 0.0 && params.tail_eps < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "synth needs tail_eps in [0, 1)");
  }
  if (params.samples_per_user < 1) {
    throw Error(ErrorCode::invalid_argument, "synth needs samples_per_user >= 1");
  }
}

std::vector<FeatureVector> place_means(const SynthParams& params) {
  validate(params);
  require_representable(params);
  if (params.dim + 1 >= params.k_users) return simplex_means(params);
  Rng rng(params.seed);
  return rejection_means(params, rng);
}

SynthDataset generate(const SynthParams& params) {
  validate(params);
  require_representable(params);
  SynthDataset ds;
  Rng rng(params.seed);
  ds.means = params.dim + 1 >= params.k_users ? simplex_means(params)
                                              : rejection_means(params, rng);
  const std::size_t k = params.k_users;
  std::int64_t next_id = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < params.samples_per_user; ++s) {
      const bool in_mode = rng.uniform01() >= params.tail_eps;
      std::size_t center = i;
      double spread = params.sigma;
      if (!in_mode) {
        center = rng.uniform_index(k - 1);
        if (center >= i) ++center;
        spread = 3.0 * params.sigma;
      }
      const auto mean = ds.means[center].values();
      std::vector<double> x(params.dim);
      for (std::size_t d = 0; d < params.dim; ++d) x[d] = mean[d] + spread * rng.gaussian();
      ds.samples.push_back(Sample{next_id++, FeatureVector(std::move(x)),
                                  UserId{static_cast<std::int64_t>(i + 1)}, std::nullopt});
      ds.from_mode.push_back(in_mode);
    }
  }
  return ds;
}

}  // namespace selfupdate
