#include "doctest.h"
#include "selfupdate/selection.hpp"
#include "support.hpp"

using namespace selfupdate;
using namespace selfupdate::testing;

namespace {

std::vector<Template> line(std::initializer_list<double> xs) {
  std::vector<Template> out;
  std::int64_t id = 0;
  for (double x : xs) out.push_back(tmpl(id++, {x}));
  return out;
}

std::vector<Template> random_candidates(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<Template> out;
  // Ids are shuffled so the tie rule is exercised independently of position.
  std::vector<std::int64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int64_t>(i * 3 + 1);
  for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng.uniform_index(i)]);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    // Coarse grid values make exact ties common.
    for (auto& x : v) x = static_cast<double>(rng.uniform_index(4));
    if (rng.uniform01() < 0.5) v = random_vector(rng, dim);
    out.push_back(tmpl(ids[i], v));
  }
  return out;
}

}  // namespace

TEST_CASE("binomial") {
  CHECK(binomial(4, 3) == 4);
  CHECK(binomial(14, 7) == 3432);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(200, 100) == UINT64_MAX);
}

TEST_CASE("select_mdist on the 1-D line") {
  const auto c = line({0, 0.1, 0.2, 10});
  const auto s = select_subset(c, 3, SubsetObjective::min_sum_pairwise_sq);
  CHECK(ids_of(s.selected) == std::set<std::int64_t>{0, 1, 2});
  CHECK(s.objective == doctest::Approx(0.06));
  CHECK(s.exact);
  CHECK(ids_of(oracle_subset_select(c, 3, SubsetObjective::min_sum_pairwise_sq)) ==
        std::set<std::int64_t>{0, 1, 2});
}

TEST_CASE("select_dend on the 1-D line") {
  const auto c = line({0, 0.1, 0.2, 10});
  const auto s = select_subset(c, 3, SubsetObjective::max_sum_pairwise_sq);
  CHECK(ids_of(s.selected) == std::set<std::int64_t>{0, 1, 3});
  CHECK(s.objective == doctest::Approx(198.02));
  CHECK(ids_of(select_dend(line({0, 1, 2}), 2)) == std::set<std::int64_t>{0, 2});
}

TEST_CASE("subset selection boundaries") {
  const auto c = line({3, 1, 2});
  CHECK(select_mdist(c, 3) == c);
  CHECK(select_dend(c, 3) == c);
  CHECK(select_mdist(c, 10) == c);
  CHECK_THROWS_AS(select_mdist(c, 0), Error);
  CHECK_THROWS_AS(select_mdist({}, 2), Error);

  SUBCASE("identical candidates pick the lowest ids") {
    const auto same = line({5, 5, 5, 5});
    CHECK(ids_of(select_mdist(same, 2)) == std::set<std::int64_t>{0, 1});
    CHECK(ids_of(select_dend(same, 2)) == std::set<std::int64_t>{0, 1});
  }
  SUBCASE("p = 1 keeps the lowest id") {
    const std::vector<Template> c2{tmpl(7, {1.0}), tmpl(3, {9.0}), tmpl(5, {4.0})};
    CHECK(ids_of(select_mdist(c2, 1)) == std::set<std::int64_t>{3});
    CHECK(ids_of(oracle_subset_select(c2, 1, SubsetObjective::min_sum_pairwise_sq)) ==
          std::set<std::int64_t>{3});
  }
  SUBCASE("oracle refuses oversized enumerations") {
    std::vector<Template> big;
    for (int i = 0; i < 40; ++i) big.push_back(tmpl(i, {double(i)}));
    CHECK_THROWS_AS(oracle_subset_select(big, 20, SubsetObjective::min_sum_pairwise_sq), Error);
  }
}

TEST_CASE("property: exact selection matches the enumeration oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const std::size_t p = 1 + rng.uniform_index(7);
    const std::size_t dim = 1 + rng.uniform_index(4);
    const auto c = random_candidates(rng, n, dim);
    CHECK(select_mdist(c, p) == oracle_subset_select(c, p, SubsetObjective::min_sum_pairwise_sq));
    CHECK(select_dend(c, p) == oracle_subset_select(c, p, SubsetObjective::max_sum_pairwise_sq));
  }
}

TEST_CASE("property: output is a subset of size min(p, n) in candidate order") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(15);
    const std::size_t p = 1 + rng.uniform_index(8);
    const auto c = random_candidates(rng, n, 3);
    for (const auto& out : {select_mdist(c, p), select_dend(c, p)}) {
      CHECK(out.size() == std::min(p, n));
      std::size_t pos = 0;
      for (const auto& t : out) {
        while (pos < c.size() && !(c[pos] == t)) ++pos;
        CHECK(pos < c.size());
      }
    }
  }
}

TEST_CASE("greedy sanity against closest-to-medoid") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 60, p = 6;
    std::vector<Template> c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(tmpl(static_cast<std::int64_t>(i), random_vector(rng, 4)));
    REQUIRE(binomial(n, p) > kExactSubsetBudget);
    const auto greedy = select_subset(c, p, SubsetObjective::min_sum_pairwise_sq);
    CHECK_FALSE(greedy.exact);

    std::size_t medoid = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += squared_euclidean(c[i].vector(), c[j].vector());
      if (s < best) best = s, medoid = i;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return squared_euclidean(c[a].vector(), c[medoid].vector()) <
             squared_euclidean(c[b].vector(), c[medoid].vector());
    });
    std::vector<Template> near;
    for (std::size_t i = 0; i < p; ++i) near.push_back(c[order[i]]);
    CHECK(greedy.objective <= 2.0 * subset_objective(near));
    CHECK(greedy.objective == doctest::Approx(subset_objective(greedy.selected)));
  }
}

TEST_CASE("select_kmeans example") {
  // A = {(0,0), (0.1,0), (5,5)}, B = {(10,10), (9.9,10)}.
  std::vector<std::pair<UserId, Sample>> slice{
      {UserId{1}, sample(0, {0.0, 0.0}, 1)},   {UserId{1}, sample(1, {0.1, 0.0}, 1)},
      {UserId{1}, sample(2, {5.0, 5.0}, 1)},   {UserId{2}, sample(3, {10.0, 10.0}, 2)},
      {UserId{2}, sample(4, {9.9, 10.0}, 2)}};
  const auto g = gallery_enroll(slice, Capacity::unbounded());
  const auto out = select_kmeans(g, 2, KMeansParams{});
  CHECK(ids_of(out.at(UserId{1})) == std::set<std::int64_t>{0, 1});
  CHECK(ids_of(out.at(UserId{2})) == std::set<std::int64_t>{3, 4});
  CHECK(out.at(UserId{1}).front().id() == 0);

  SUBCASE("fewer than p candidates are all kept") {
    const auto all = select_kmeans(g, 5, KMeansParams{});
    CHECK(all.at(UserId{1}).size() == 3);
    CHECK(all.at(UserId{2}).size() == 2);
  }
}

TEST_CASE("property: select_kmeans ignores candidate order") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(4);
    std::vector<std::pair<UserId, Sample>> slice;
    std::int64_t id = 0;
    for (std::size_t u = 1; u <= k; ++u) {
      const std::size_t m = 1 + rng.uniform_index(9);
      for (std::size_t s = 0; s < m; ++s) {
        auto v = random_vector(rng, 3);
        v[0] += 4.0 * static_cast<double>(u);
        slice.emplace_back(UserId{static_cast<std::int64_t>(u)}, sample(id++, v, u));
      }
    }
    const std::size_t p = 1 + rng.uniform_index(5);
    const auto a = select_kmeans(gallery_enroll(slice, Capacity::unbounded()), p, KMeansParams{});
    auto shuffled = slice;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
    const auto b = select_kmeans(gallery_enroll(shuffled, Capacity::unbounded()), p, KMeansParams{});
    for (const auto& [user, ts] : a) {
      CHECK(ids_of(ts) == ids_of(b.at(user)));
      CHECK(ts.size() == std::min<std::size_t>(p, gallery_enroll(slice, Capacity::unbounded()).user(user).templates.size()));
    }
  }
}

TEST_CASE("select_templates dispatch and method names") {
  const auto g = gallery_1d({{1, 0.0}, {1, 0.1}, {1, 5.0}, {2, 9.0}});
  CHECK(select_templates(g, SelectionMethod::keep_all, 1, {}).at(UserId{1}).size() == 3);
  CHECK(ids_of(select_templates(g, SelectionMethod::mdist, 2, {}).at(UserId{1})) ==
        std::set<std::int64_t>{0, 1});
  CHECK(ids_of(select_templates(g, SelectionMethod::dend, 2, {}).at(UserId{1})) ==
        std::set<std::int64_t>{0, 2});
  for (auto m : {SelectionMethod::kmeans_select, SelectionMethod::mdist, SelectionMethod::dend,
                 SelectionMethod::keep_all}) {
    CHECK(parse_selection_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_selection_method("median"), Error);
}
