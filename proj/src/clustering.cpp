#include "selfupdate/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "selfupdate/random.hpp"

namespace selfupdate {

double squared_euclidean(const FeatureVector& a, const FeatureVector& b) {
  require_same_dim(a.dim(), b.dim(), "squared_euclidean");
  const auto x = a.values();
  const auto y = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

namespace {

std::size_t nearest_centroid(const FeatureVector& p, const std::vector<FeatureVector>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_euclidean(p, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

// Per-cluster means, summed in point order so the result is bit-stable.
// Empty clusters keep their previous centroid.
std::vector<FeatureVector> cluster_means(std::span<const FeatureVector> points,
                                         const std::vector<std::size_t>& assignment,
                                         const std::vector<FeatureVector>& previous) {
  const std::size_t k = previous.size();
  const std::size_t dim = points.front().dim();
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& acc = sums[assignment[i]];
    const auto v = points[i].values();
    for (std::size_t d = 0; d < dim; ++d) acc[d] += v[d];
    ++counts[assignment[i]];
  }
  std::vector<FeatureVector> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) {
      out.push_back(previous[j]);
      continue;
    }
    for (auto& x : sums[j]) x /= static_cast<double>(counts[j]);
    out.emplace_back(std::move(sums[j]));
  }
  return out;
}

void repair_empty(std::span<const FeatureVector> points, std::vector<std::size_t>& assignment,
                  std::vector<FeatureVector>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> counts(k, 0);
  for (auto a : assignment) ++counts[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[assignment[i]] < 2) continue;
      const double d = squared_euclidean(points[i], centroids[assignment[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) continue;
    centroids[c] = points[far];
    if (far_d > 0.0) {
      --counts[assignment[far]];
      assignment[far] = c;
      ++counts[c];
    }
  }
}

double inertia_of(std::span<const FeatureVector> points, const std::vector<std::size_t>& assignment,
                  const std::vector<FeatureVector>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_euclidean(points[i], centroids[assignment[i]]);
  }
  return total;
}

std::vector<std::size_t> assign_all(std::span<const FeatureVector> points,
                                    const std::vector<FeatureVector>& centroids) {
  std::vector<std::size_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = nearest_centroid(points[i], centroids);
  return out;
}

std::vector<FeatureVector> initial_centroids(std::span<const FeatureVector> points,
                                             const KMeansParams& params,
                                             std::span<const UserId> labels) {
  if (params.init.kind == KMeansInit::Kind::seeded_random) {
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(params.init.seed);
    std::vector<FeatureVector> out;
    for (std::size_t j = 0; j < params.k; ++j) {
      const auto pick = j + rng.uniform_index(idx.size() - j);
      std::swap(idx[j], idx[pick]);
      out.push_back(points[idx[j]]);
    }
    return out;
  }
  if (labels.size() != points.size()) {
    throw Error(ErrorCode::invalid_argument, "user_means init needs one label per point");
  }
  const std::set<UserId> users(labels.begin(), labels.end());
  if (users.size() != params.k) {
    throw Error(ErrorCode::invalid_argument,
                "user_means init needs k = " + std::to_string(params.k) +
                    " distinct labels, got " + std::to_string(users.size()));
  }
  std::vector<std::size_t> seed_assignment(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    seed_assignment[i] =
        static_cast<std::size_t>(std::distance(users.begin(), users.find(labels[i])));
  }
  // Every user has at least one point, so no cluster is empty here.
  std::vector<FeatureVector> placeholder(params.k, points.front());
  return cluster_means(points, seed_assignment, placeholder);
}

}  // namespace

Clustering kmeans_iterate(std::span<const FeatureVector> points, const Clustering& c) {
  Clustering next = c;
  next.centroids = cluster_means(points, c.assignment, c.centroids);
  next.assignment = assign_all(points, next.centroids);
  repair_empty(points, next.assignment, next.centroids);
  next.inertia = inertia_of(points, next.assignment, next.centroids);
  next.inertia_history.push_back(next.inertia);
  next.iterations = c.iterations + 1;
  next.converged = next.assignment == c.assignment;
  return next;
}

Clustering kmeans(std::span<const FeatureVector> points, const KMeansParams& params,
                  std::span<const UserId> labels) {
  if (points.empty()) throw Error(ErrorCode::empty_input, "kmeans needs at least one point");
  if (params.k == 0 || params.k > points.size()) {
    throw Error(ErrorCode::invalid_argument,
                "kmeans k = " + std::to_string(params.k) + " must be in [1, " +
                    std::to_string(points.size()) + "]");
  }
  if (params.max_iter == 0 || !(params.rel_tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "kmeans needs max_iter >= 1 and rel_tol > 0");
  }
  const std::size_t dim = points.front().dim();
  for (const auto& p : points) require_same_dim(dim, p.dim(), "kmeans point");

  Clustering c;
  c.centroids = initial_centroids(points, params, labels);
  c.assignment = assign_all(points, c.centroids);
  repair_empty(points, c.assignment, c.centroids);
  c.inertia = inertia_of(points, c.assignment, c.centroids);
  c.inertia_history.push_back(c.inertia);

  while (c.iterations < params.max_iter) {
    const double before = c.inertia;
    c = kmeans_iterate(points, c);
    if (c.converged) break;
    if (before <= 0.0 || (before - c.inertia) < params.rel_tol * before) break;
  }
  return c;
}

std::size_t dominant_cluster_for_user(const Clustering& c, std::span<const UserId> labels,
                                      UserId user) {
  if (labels.size() != c.assignment.size()) {
    throw Error(ErrorCode::invalid_argument, "labels must align with clustered points");
  }
  std::vector<std::size_t> counts(c.centroids.size(), 0);
  bool present = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != user) continue;
    present = true;
    ++counts[c.assignment[i]];
  }
  if (!present) {
    throw Error(ErrorCode::not_found,
                "user " + std::to_string(user.value) + " has no labeled point");
  }
  return static_cast<std::size_t>(
      std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
}

}  // namespace selfupdate
