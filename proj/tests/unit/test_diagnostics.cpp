#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mfm/diagnostics.hpp"
#include "mfm/rng.hpp"
#include "../support/oracles.hpp"
#include "../support/partition_oracle.hpp"

namespace {

mfm::ModelConfig model_1d(mfm::ComponentCountPrior prior) {
  mfm::ModelConfig cfg;
  cfg.m = Eigen::ArrayXd::Zero(1);
  cfg.c = Eigen::ArrayXd::Constant(1, 0.2);
  cfg.alpha = 2.0;
  cfg.beta = 1.0;
  cfg.count_prior = std::move(prior);
  return cfg;
}

double normal_logpdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

}  // namespace

TEST_CASE("set partitions are enumerated once each in restricted-growth form") {
  const long bell[] = {1, 1, 2, 5, 15, 52, 203, 877};
  for (int n = 1; n <= 7; ++n) {
    std::set<std::vector<int>> seen;
    int count = 0;
    mfm::for_each_set_partition(n, [&](const std::vector<int>& rgs, int blocks) {
      ++count;
      seen.insert(rgs);
      CHECK(mfm::canonical_labels(rgs) == rgs);
      CHECK(*std::max_element(rgs.begin(), rgs.end()) + 1 == blocks);
    });
    CHECK(count == bell[n]);
    CHECK(seen.size() == static_cast<std::size_t>(bell[n]));
  }
}

TEST_CASE("canonical labels relabel by first appearance") {
  const std::vector<int> z = {5, 5, 2, 9, 2};
  CHECK(mfm::canonical_labels(z) == std::vector<int>{0, 0, 1, 2, 1});
}

TEST_CASE("exact posterior for one point is the prior") {
  mfm::DataMatrix data(1, 1);
  data << 0.3;
  const auto cfg = model_1d(mfm::Geometric{0.25});
  const auto ex = mfm::exact_posterior_k(data, cfg, 1.0);
  CHECK(ex.num_partitions() == 1);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(ex.posterior_k.size(), 30); ++i)
    CHECK(ex.posterior_k[i] == doctest::Approx(0.25 * std::pow(0.75, static_cast<double>(i))).epsilon(1e-10));
}

TEST_CASE("exact posterior for four points enumerates Bell(4) partitions") {
  mfm::DataMatrix data(4, 1);
  data << 0.0, 1.0, 2.0, 3.0;
  CHECK(mfm::exact_posterior_k(data, model_1d(mfm::Geometric{0.1}), 1.0).num_partitions() == 15);
}

TEST_CASE("enumeration agrees with an independent recursive enumeration") {
  mfm::DataMatrix data(5, 1);
  data << -2.1, -1.7, 0.2, 1.9, 2.4;
  for (const auto& prior : {mfm::ComponentCountPrior(mfm::Geometric{0.1}), mfm::ComponentCountPrior(mfm::UniformBounded{3})}) {
    CAPTURE(prior.describe());
    const auto cfg = model_1d(prior);
    const auto ex = mfm::exact_posterior_k(data, cfg, 1.0);
    const auto ref = oracle::partition_posterior(data, cfg, 1.0);
    REQUIRE(ex.num_partitions() == ref.prob.size());
    std::size_t idx = 0;
    mfm::for_each_set_partition(5, [&](const std::vector<int>& rgs, int) {
      CHECK(std::exp(ex.log_weights[idx++]) == doctest::Approx(ref.prob.at(rgs)).epsilon(1e-10).scale(1e-14));
    });
    for (std::size_t t = 0; t < ref.posterior_t.size(); ++t)
      CHECK(ex.posterior_t[static_cast<Eigen::Index>(t)] == doctest::Approx(ref.posterior_t[t]).epsilon(1e-10).scale(1e-14));
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(ex.posterior_k.size(), 40); ++k)
      CHECK(ex.posterior_k[k] == doctest::Approx(ref.posterior_k[static_cast<std::size_t>(k)]).epsilon(1e-9).scale(1e-14));
    CHECK(ex.posterior_k.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior over t is the marginal of the partition posterior and k >= min t") {
  mfm::DataMatrix data(4, 1);
  data << -3.0, -2.9, 3.0, 3.2;
  const auto ex = mfm::exact_posterior_k(data, model_1d(mfm::UniformBounded{2}), 1.0);
  Eigen::VectorXd t(4);
  t.setZero();
  std::size_t idx = 0;
  mfm::for_each_set_partition(4, [&](const std::vector<int>&, int blocks) {
    t[blocks - 1] += std::exp(ex.log_weights[idx++]);
  });
  CHECK((t.head(ex.posterior_t.size()) - ex.posterior_t).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ex.posterior_t.size() >= 2);
  CHECK(t.tail(2).isZero());
  CHECK(ex.posterior_k.tail(ex.posterior_k.size() - 2).isZero());
}

TEST_CASE("enumeration refuses large datasets") {
  const mfm::DataMatrix data = mfm::DataMatrix::Zero(11, 1);
  CHECK_THROWS_AS(mfm::exact_posterior_k(data, model_1d(mfm::Geometric{0.1}), 1.0), std::invalid_argument);
}

TEST_CASE("Monte Carlo KL estimates") {
  auto std_normal = [](mfm::Rng& rng) { return rng.normal(); };
  auto log_n01 = [](double x) { return normal_logpdf(x, 0.0, 1.0); };
  auto log_n11 = [](double x) { return normal_logpdf(x, 1.0, 1.0); };

  const auto same = mfm::mc_kl_estimate(std_normal, log_n01, log_n01, 1000, 1);
  CHECK(same.estimate == 0.0);
  CHECK(same.standard_error == 0.0);

  const auto shifted = mfm::mc_kl_estimate(std_normal, log_n01, log_n11, 100000, 2);
  CHECK(std::abs(shifted.estimate - 0.5) <= 3.0 * shifted.standard_error);

  auto laplace = [](mfm::Rng& rng) { return rng.laplace(0.0, 1.0); };
  auto log_laplace = [](double x) { return -std::log(2.0) - std::abs(x); };
  auto log_n02 = [](double x) { return normal_logpdf(x, 0.0, 2.0); };
  const auto est = mfm::mc_kl_estimate(laplace, log_laplace, log_n02, 100000, 3);
  const double ref = static_cast<double>(oracle::kl_quadrature(
      [](oracle::real x) { return -std::log(2.0L) - std::abs(x); },
      [](oracle::real x) { return -0.5L * std::log(4.0L * std::numbers::pi_v<oracle::real>) - x * x / 4.0L; }));
  CHECK(std::abs(est.estimate - ref) <= 3.0 * est.standard_error);
}

TEST_CASE("KL estimates between random Gaussian pairs are nonnegative") {
  mfm::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double m0 = rng.normal(0.0, 2.0), v0 = std::exp(rng.normal()), m1 = rng.normal(0.0, 2.0),
                 v1 = std::exp(rng.normal());
    const auto est = mfm::mc_kl_estimate([&](mfm::Rng& r) { return r.normal(m0, std::sqrt(v0)); },
                                         [&](double x) { return normal_logpdf(x, m0, v0); },
                                         [&](double x) { return normal_logpdf(x, m1, v1); }, 20000, 100 + i);
    const double exact = 0.5 * (v0 / v1 + (m1 - m0) * (m1 - m0) / v1 - 1.0 + std::log(v1 / v0));
    CHECK(est.estimate + 4.0 * est.standard_error >= 0.0);
    CHECK(std::abs(est.estimate - exact) <= 4.0 * est.standard_error + 1e-12);
  }
}

TEST_CASE("KL with f0 outside the support of f is reported") {
  auto draw = [](mfm::Rng& rng) { return rng.normal(); };
  auto log_f0 = [](double x) { return normal_logpdf(x, 0.0, 1.0); };
  auto log_f = [](double x) { return x > 0.0 ? -x : mfm::kNegInf; };
  CHECK_THROWS_AS(mfm::mc_kl_estimate(draw, log_f0, log_f, 1000, 5), mfm::SupportViolation);
}

TEST_CASE("integrated autocorrelation time") {
  mfm::Rng rng(6);
  std::vector<double> iid(100000);
  for (auto& v : iid) v = rng.normal();
  const auto tau = mfm::integrated_autocorrelation_time(iid);
  REQUIRE(tau.has_value());
  CHECK(*tau >= 0.8);
  CHECK(*tau <= 1.25);

  // AR(1) with coefficient 0.8 has time (1 + 0.8) / (1 - 0.8) = 9.
  std::vector<double> ar(200000);
  double x = 0.0;
  for (auto& v : ar) v = x = 0.8 * x + rng.normal();
  const auto tau_ar = mfm::integrated_autocorrelation_time(ar);
  REQUIRE(tau_ar.has_value());
  CHECK(*tau_ar == doctest::Approx(9.0).epsilon(0.1));

  const std::vector<double> constant(100, 3.0);
  CHECK_FALSE(mfm::integrated_autocorrelation_time(constant).has_value());
}

TEST_CASE("chain statistics") {
  mfm::ChainOutput out;
  out.trace_t = {2, 2, 2};
  CHECK(mfm::chain_stats(out).sm_acceptance_rate == 0.0);
  CHECK_FALSE(mfm::chain_stats(out).autocorrelation_time_t.has_value());
  out.sm_proposed = 10;
  out.sm_accepted = 3;
  CHECK(mfm::chain_stats(out).sm_acceptance_rate == doctest::Approx(0.3));
}

TEST_CASE("Rao-Blackwellized posterior over k averages p(k | t)") {
  const std::vector<long> trace = {1, 2, 2, 3};
  const auto prior = mfm::ComponentCountPrior::geometric(0.2);
  const Eigen::VectorXd rb = mfm::rao_blackwell_posterior_k(trace, prior, 1.0, 10);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(rb.size());
  for (long t : {1L, 2L, 3L}) {
    const Eigen::VectorXd p = mfm::posterior_k_given_partition(prior, 1.0, 10, t);
    const double w = t == 2 ? 0.5 : 0.25;
    expected.head(p.size()) += w * p;
  }
  CHECK((rb - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(rb.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total variation pads the shorter vector") {
  Eigen::VectorXd p(2), q(3);
  p << 0.5, 0.5;
  q << 0.5, 0.25, 0.25;
  CHECK(mfm::total_variation(p, q) == doctest::Approx(0.25));
  CHECK(mfm::total_variation(q, q) == 0.0);
}
