#include <sstream>

#include "doctest.h"
#include "selfupdate/harness.hpp"
#include "selfupdate/synthgen.hpp"
#include "support.hpp"

using namespace selfupdate;
using namespace selfupdate::testing;

TEST_CASE("random stream is reproducible") {
  Rng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(a.uniform_index(7) < 7u);
  }
}

TEST_CASE("tail-free well separated data is nearest-mean separable") {
  SynthParams p;
  p.tail_eps = 0.0;
  p.separation = 20;
  p.k_users = 12;
  p.dim = 5;  // below k - 1, so the rejection placement is used
  const auto ds = generate(p);
  REQUIRE(ds.samples.size() == 12 * 42);
  for (const auto& s : ds.samples) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < ds.means.size(); ++j) {
      if (squared_euclidean(s.vector, ds.means[j]) < squared_euclidean(s.vector, ds.means[best])) best = j;
    }
    CHECK(static_cast<std::int64_t>(best + 1) == s.true_user.value);
  }
}

TEST_CASE("two users with one sample each") {
  SynthParams p;
  p.k_users = 2;
  p.samples_per_user = 1;
  const auto ds = generate(p);
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.samples[0].true_user == UserId{1});
  CHECK(ds.samples[1].true_user == UserId{2});
  CHECK(ds.samples[0].id == 0);
  CHECK(ds.samples[1].id == 1);
}

TEST_CASE("generation is deterministic per seed") {
  SynthParams p;
  p.seed = 9;
  std::ostringstream a, b, c;
  write_dataset(generate(p).samples, a);
  write_dataset(generate(p).samples, b);
  p.seed = 10;
  write_dataset(generate(p).samples, c);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("property: mean placement and mode fraction") {
  Rng rng(1);
  for (int trial = 0; trial < 12; ++trial) {
    SynthParams p;
    p.k_users = 2 + rng.uniform_index(15);
    p.dim = 1 + rng.uniform_index(20);
    p.sigma = 0.5 + rng.uniform01();
    p.separation = 2 + 6 * rng.uniform01();
    p.tail_eps = 0.3 * rng.uniform01();
    p.samples_per_user = 200;
    p.seed = static_cast<std::uint64_t>(trial);
    const auto ds = generate(p);
    for (std::size_t i = 0; i < ds.means.size(); ++i) {
      for (std::size_t j = i + 1; j < ds.means.size(); ++j) {
        CHECK(std::sqrt(squared_euclidean(ds.means[i], ds.means[j])) >= p.separation * p.sigma * (1 - 1e-9));
      }
    }
    const double n = static_cast<double>(ds.samples.size());
    const double in_mode = static_cast<double>(std::count(ds.from_mode.begin(), ds.from_mode.end(), true));
    const double sd = std::sqrt(n * p.tail_eps * (1 - p.tail_eps));
    CHECK(std::abs(in_mode - n * (1 - p.tail_eps)) <= 3 * sd + 1e-9);
  }
}

TEST_CASE("invalid parameters") {
  SynthParams p;
  p.k_users = 1;
  CHECK_THROWS_AS(generate(p), Error);
  p = {};
  p.sigma = 0;
  CHECK_THROWS_AS(generate(p), Error);
  p = {};
  p.tail_eps = 1.0;
  CHECK_THROWS_AS(generate(p), Error);
  p = {};
  p.dim = 0;
  CHECK_THROWS_AS(generate(p), Error);
}

TEST_CASE("impossible separation is reported as infeasible") {
  SynthParams p;
  p.k_users = 50;
  p.dim = 2;
  p.sigma = 1e300;
  p.separation = 1e10;
  try {
    (void)generate(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible);
  }
}
