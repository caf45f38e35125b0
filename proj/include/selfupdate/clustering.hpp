#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "selfupdate/core.hpp"

namespace selfupdate {

struct KMeansInit {
  enum class Kind { user_means, seeded_random };
  Kind kind = Kind::user_means;
  std::uint64_t seed = 0;

  static KMeansInit user_means() { return {}; }
  static KMeansInit seeded_random(std::uint64_t seed) { return {Kind::seeded_random, seed}; }
};

struct KMeansParams {
  std::size_t k = 1;
  std::size_t max_iter = 100;
  double rel_tol = 1e-6;
  KMeansInit init;
};

struct Clustering {
  std::vector<std::size_t> assignment;  // point index -> cluster index
  std::vector<FeatureVector> centroids;
  double inertia = 0.0;
  // Inertia after the initial assignment and after every Lloyd iteration.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
  // True when the last iteration left every assignment unchanged.
  bool converged = false;
};

double squared_euclidean(const FeatureVector& a, const FeatureVector& b);

/// Lloyd's algorithm under squared euclidean distance.
///
/// With user_means init, `labels` must be aligned with `points` and contain
/// exactly k distinct users; centroid j starts at the mean of the points of
/// the j-th smallest user id, so cluster indices line up with users.
///
/// An empty cluster is reseeded at the point farthest from its assigned
/// centroid (taken from a cluster with more than one point). If that
/// distance is zero the centroid moves but the cluster stays empty.
Clustering kmeans(std::span<const FeatureVector> points, const KMeansParams& params,
                  std::span<const UserId> labels = {});

/// One Lloyd iteration (mean update, reassignment, empty-cluster repair)
/// applied to an existing clustering. A converged result is a fixed point.
Clustering kmeans_iterate(std::span<const FeatureVector> points, const Clustering& c);

/// Cluster holding the most points labeled `user`; ties go to the lowest index.
std::size_t dominant_cluster_for_user(const Clustering& c, std::span<const UserId> labels,
                                      UserId user);

}  // namespace selfupdate
