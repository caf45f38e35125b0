#include "doctest.h"
#include "selfupdate/clustering.hpp"
#include "support.hpp"

using namespace selfupdate;
using namespace selfupdate::testing;

TEST_CASE("kmeans with k equal to the point count") {
  const std::vector<FeatureVector> pts{fv({0, 0}), fv({1, 0}), fv({5, 5})};
  KMeansParams params{3, 100, 1e-6, KMeansInit::seeded_random(7)};
  const auto c = kmeans(pts, params);
  CHECK(c.inertia == 0.0);
  std::set<std::size_t> used(c.assignment.begin(), c.assignment.end());
  CHECK(used.size() == 3);
}

TEST_CASE("kmeans two blobs from user means") {
  // One Lloyd step from the user means is already a fixed point.
  const std::vector<FeatureVector> pts{fv({0, 0}), fv({0.1, 0}), fv({10, 10}), fv({9.9, 10})};
  const std::vector<UserId> labels{UserId{1}, UserId{1}, UserId{2}, UserId{2}};
  const auto c = kmeans(pts, KMeansParams{2, 100, 1e-6, KMeansInit::user_means()}, labels);
  CHECK(c.converged);
  CHECK(c.centroids[0][0] == doctest::Approx(0.05));
  CHECK(c.centroids[0][1] == doctest::Approx(0.0));
  CHECK(c.centroids[1][0] == doctest::Approx(9.95));
  CHECK(c.centroids[1][1] == doctest::Approx(10.0));
  CHECK(c.assignment == std::vector<std::size_t>{0, 0, 1, 1});
  CHECK(c.inertia == doctest::Approx(0.01));
}

TEST_CASE("kmeans on identical points leaves one cluster empty after reseeding") {
  const std::vector<FeatureVector> pts(4, fv({2.0, 2.0}));
  const auto c = kmeans(pts, KMeansParams{2, 100, 1e-6, KMeansInit::seeded_random(1)});
  CHECK(c.inertia == 0.0);
  CHECK(c.centroids[1] == fv({2.0, 2.0}));
  CHECK(std::count(c.assignment.begin(), c.assignment.end(), 0u) == 4);
}

TEST_CASE("kmeans repairs an empty cluster at the farthest point") {
  // Seeded init can pick both copies of 0; the empty cluster then moves to 10.
  const std::vector<FeatureVector> dup{fv({0.0}), fv({0.0}), fv({10.0})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = kmeans(dup, KMeansParams{2, 100, 1e-6, KMeansInit::seeded_random(seed)});
    CHECK(c.inertia == doctest::Approx(0.0));
    CHECK(c.assignment[0] == c.assignment[1]);
    CHECK(c.assignment[0] != c.assignment[2]);
  }
}

TEST_CASE("kmeans argument checks") {
  const std::vector<FeatureVector> pts{fv({0.0}), fv({1.0})};
  CHECK_THROWS_AS(kmeans(pts, KMeansParams{3, 100, 1e-6, KMeansInit::seeded_random(0)}), Error);
  CHECK_THROWS_AS(kmeans({}, KMeansParams{1, 100, 1e-6, KMeansInit::seeded_random(0)}), Error);
  CHECK_THROWS_AS(kmeans(pts, KMeansParams{2, 100, 0.0, KMeansInit::seeded_random(0)}), Error);
  // user_means needs exactly k distinct labels aligned with the points.
  const std::vector<UserId> one_user{UserId{1}, UserId{1}};
  CHECK_THROWS_AS(kmeans(pts, KMeansParams{2, 100, 1e-6, KMeansInit::user_means()}, one_user), Error);
  CHECK_THROWS_AS(kmeans(pts, KMeansParams{2, 100, 1e-6, KMeansInit::user_means()}), Error);
  const std::vector<FeatureVector> ragged{fv({0.0}), fv({1.0, 2.0})};
  CHECK_THROWS_AS(kmeans(ragged, KMeansParams{1, 100, 1e-6, KMeansInit::seeded_random(0)}), Error);
}

TEST_CASE("dominant_cluster_for_user") {
  Clustering c;
  c.centroids = {fv({0.0}), fv({1.0})};
  const UserId a{1}, b{2};

  c.assignment = {0, 0, 0, 1};
  CHECK(dominant_cluster_for_user(c, std::vector<UserId>{a, a, a, b}, a) == 0);

  c.assignment = {1, 1, 0, 0};
  CHECK(dominant_cluster_for_user(c, std::vector<UserId>{a, a, a, b}, a) == 1);

  c.assignment = {0, 1, 1, 1};
  CHECK(dominant_cluster_for_user(c, std::vector<UserId>{a, a, b, b}, a) == 0);

  CHECK_THROWS_AS(dominant_cluster_for_user(c, std::vector<UserId>{a, a, a, a}, b), Error);
  CHECK_THROWS_AS(dominant_cluster_for_user(c, std::vector<UserId>{a}, a), Error);
}

TEST_CASE("property: inertia never increases and the result is a fixed point") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(40);
    const std::size_t dim = 1 + rng.uniform_index(6);
    const std::size_t k = 1 + rng.uniform_index(std::min<std::size_t>(n, 6));
    std::vector<FeatureVector> pts;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = random_vector(rng, dim, 3.0);
      v[0] += 8.0 * static_cast<double>(i % k);
      pts.emplace_back(std::move(v));
    }
    const auto c = kmeans(pts, KMeansParams{k, 100, 1e-6, KMeansInit::seeded_random(trial)});
    REQUIRE_FALSE(c.inertia_history.empty());
    for (std::size_t i = 1; i < c.inertia_history.size(); ++i) {
      CHECK(c.inertia_history[i] <= c.inertia_history[i - 1] * (1 + 1e-12) + 1e-12);
    }
    if (c.converged) {
      const auto again = kmeans_iterate(pts, c);
      CHECK(again.assignment == c.assignment);
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t d = 0; d < dim; ++d) CHECK(again.centroids[j][d] == doctest::Approx(c.centroids[j][d]));
      }
    }
  }
}

TEST_CASE("property: well separated users map to their own seeded cluster") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(5);
    std::vector<FeatureVector> pts;
    std::vector<UserId> labels;
    for (std::size_t u = 0; u < k; ++u) {
      for (int s = 0; s < 6; ++s) {
        auto v = random_vector(rng, 3, 0.1);
        v[u % 3] += 100.0 * static_cast<double>(u + 1);
        pts.emplace_back(std::move(v));
        labels.push_back(UserId{static_cast<std::int64_t>(u + 1)});
      }
    }
    const auto c = kmeans(pts, KMeansParams{k, 100, 1e-6, KMeansInit::user_means()}, labels);
    for (std::size_t u = 0; u < k; ++u) {
      CHECK(dominant_cluster_for_user(c, labels, UserId{static_cast<std::int64_t>(u + 1)}) == u);
    }
  }
}
