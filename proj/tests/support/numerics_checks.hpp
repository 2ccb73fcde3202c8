#pragma once

// Randomized agreement checks between library numerics and the oracles.
// Each returns the worst observed error so callers can apply their tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mfm/coefficients.hpp"
#include "mfm/marginal.hpp"
#include "mfm/rng.hpp"
#include "oracles.hpp"

namespace checks {

struct Worst {
  double error = 0.0;
  std::string where;

  void update(double e, const std::string& what) {
    if (!(e <= error)) {  // also catches NaN
      error = std::isnan(e) ? INFINITY : e;
      where = what;
    }
  }
};

/// Relative error |V_lib / V_oracle - 1| over random (prior, gamma, n, t).
inline Worst coefficient_table_vs_summation(int cases, std::uint64_t seed) {
  mfm::Rng rng(seed);
  Worst worst;
  for (int i = 0; i < cases; ++i) {
    const bool bounded = i % 3 == 2;
    const double gamma = 0.2 + 2.8 * rng.uniform();
    const long n = 1 + static_cast<long>(rng.uniform_int(200));
    oracle::CountPrior op;
    mfm::ComponentCountPrior prior = mfm::Geometric{0.5};
    if (bounded) {
      op.kmax = 1 + static_cast<long>(rng.uniform_int(12));
      prior = mfm::UniformBounded{static_cast<int>(op.kmax)};
    } else {
      const double r = 0.05 + 0.9 * rng.uniform();
      op.r = r;
      prior = mfm::Geometric{r};
    }
    const long t_max = std::min<long>(n, 12);
    const mfm::CoefficientTable table(prior, gamma, n, t_max);
    for (long t = 1; t <= t_max; ++t) {
      const double lib = table.log_v(t);
      const oracle::real ref = oracle::log_v(op, gamma, n, t);
      const std::string what = prior.describe() + " gamma=" + std::to_string(gamma) + " n=" + std::to_string(n) +
                               " t=" + std::to_string(t);
      if (ref == -oracle::kInf) {
        worst.update(lib == mfm::kNegInf ? 0.0 : INFINITY, what);
      } else {
        worst.update(static_cast<double>(std::abs(std::expm1(static_cast<oracle::real>(lib) - ref))), what);
      }
    }
  }
  return worst;
}

/// Relative error of the closed-form cluster marginal against nested quadrature.
inline Worst marginal_vs_quadrature(int cases, std::uint64_t seed) {
  mfm::Rng rng(seed);
  Worst worst;
  for (int i = 0; i < cases; ++i) {
    const long n = 1 + static_cast<long>(rng.uniform_int(12));
    const double m = rng.normal(0.0, 3.0);
    const double c = std::exp(rng.normal(-1.0, 1.5));
    const double alpha = 0.5 + 4.0 * rng.uniform();
    const double beta = std::exp(rng.normal(0.0, 1.0));
    const double loc = rng.normal(0.0, 5.0);
    const double sd = std::exp(rng.normal(0.0, 0.7));
    std::vector<oracle::real> xs;
    mfm::SuffStatsd s(1);
    Eigen::RowVectorXd x(1);
    for (long j = 0; j < n; ++j) {
      x[0] = rng.normal(loc, sd);
      xs.push_back(x[0]);
      s.add(x);
    }
    mfm::ModelConfig cfg;
    cfg.m = Eigen::ArrayXd::Constant(1, m);
    cfg.c = Eigen::ArrayXd::Constant(1, c);
    cfg.alpha = alpha;
    cfg.beta = beta;
    const double lib = mfm::cluster_log_marginal(s, cfg, beta);
    const oracle::real ref = oracle::log_marginal_1d(xs, m, c, alpha, beta);
    worst.update(static_cast<double>(std::abs(std::expm1(static_cast<oracle::real>(lib) - ref))),
                 "case " + std::to_string(i) + " n=" + std::to_string(n));
  }
  return worst;
}

/// |sum_k p(k | t, n) - 1| over random (prior, gamma, n, t).
inline Worst posterior_k_normalization(int cases, std::uint64_t seed) {
  mfm::Rng rng(seed);
  Worst worst;
  for (int i = 0; i < cases; ++i) {
    const double gamma = 0.1 + 4.9 * rng.uniform();
    const long n = 1 + static_cast<long>(rng.uniform_int(10000));
    mfm::ComponentCountPrior prior = mfm::Geometric{0.5};
    long support = n;
    if (rng.coin()) {
      const int kmax = 1 + static_cast<int>(rng.uniform_int(20));
      prior = mfm::UniformBounded{kmax};
      support = std::min<long>(n, kmax);
    } else {
      prior = mfm::Geometric{0.01 + 0.98 * rng.uniform()};
    }
    const long t = 1 + static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(std::min<long>(support, 30))));
    const Eigen::VectorXd p = mfm::posterior_k_given_partition(prior, gamma, n, t);
    worst.update(std::abs(p.sum() - 1.0), prior.describe() + " n=" + std::to_string(n) + " t=" + std::to_string(t));
  }
  return worst;
}

}  // namespace checks
