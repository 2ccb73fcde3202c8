#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfm/rng.hpp"
#include "../support/oracles.hpp"

TEST_CASE("same seed and stream reproduce, different streams diverge") {
  mfm::Rng a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("uniform lies in the open unit interval with mean one half") {
  mfm::Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("uniform_int covers the range evenly") {
  mfm::Rng rng(2);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(7)];
  const double p = 1.0 / 7.0, se = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) < 4.0 * se);
  CHECK_THROWS(rng.uniform_int(0));
}

TEST_CASE("normal and gamma variates follow their laws") {
  mfm::Rng rng(3);
  std::vector<double> z(50000), g(50000), g_small(50000);
  for (auto& v : z) v = rng.normal();
  for (auto& v : g) v = rng.gamma(2.5, 4.0);
  for (auto& v : g_small) v = rng.gamma(0.2, 0.5);
  CHECK(oracle::ks_distance(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) < 0.01);
  CHECK(oracle::ks_distance(g, [](double x) { return oracle::gamma_cdf(2.5, 4.0, x); }) < 0.01);
  CHECK(oracle::ks_distance(g_small, [](double x) { return oracle::gamma_cdf(0.2, 0.5, x); }) < 0.01);
  CHECK_THROWS(rng.gamma(0.0, 1.0));
}

TEST_CASE("laplace variates follow the Laplace law") {
  mfm::Rng rng(4);
  std::vector<double> x(50000);
  for (auto& v : x) v = rng.laplace(1.0, 2.0);
  auto cdf = [](double y) {
    const double u = (y - 1.0) / 2.0;
    return u < 0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
  };
  CHECK(oracle::ks_distance(x, cdf) < 0.01);
}

TEST_CASE("categorical_log draws proportionally and skips -inf") {
  mfm::Rng rng(5);
  const std::vector<double> w = {std::log(1.0), mfm::kNegInf, std::log(3.0)};
  int hits[3] = {0, 0, 0};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++hits[rng.categorical_log(w)];
  CHECK(hits[1] == 0);
  const double se = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(hits[0] - n * 0.25) < 4.0 * se);
  const std::vector<double> dead = {mfm::kNegInf, mfm::kNegInf};
  CHECK_THROWS_AS(rng.categorical_log(dead), std::domain_error);
}
