#include "mfm/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfm/numeric.hpp"

namespace mfm {
namespace {

// log of one series term: log p(k) + log k_(t) - log (gamma k)^(n).
double log_term(const ComponentCountPrior& prior, double gamma, long n, long t, long k) {
  const double lp = prior.log_mass(k);
  if (lp == kNegInf) return kNegInf;
  return lp + log_falling_factorial(k, t) - log_rising_factorial(gamma * static_cast<double>(k), n);
}

void check_args(double gamma, long n, long t) {
  if (!(gamma > 0.0)) throw std::invalid_argument("coefficient series: gamma must be positive");
  if (n < 1) throw std::invalid_argument("coefficient series: n must be positive");
  if (t < 1) throw std::invalid_argument("coefficient series: t must be positive");
}

}  // namespace

double log_v_series(const ComponentCountPrior& prior, double gamma, long n, long t, double tol,
                    std::int64_t max_terms) {
  check_args(gamma, n, t);
  if (!(tol > 0.0)) throw std::invalid_argument("coefficient series: tol must be positive");

  if (auto kmax = prior.support_max()) {
    double acc = kNegInf;
    for (long k = t; k <= *kmax; ++k) acc = log_add_exp(acc, log_term(prior, gamma, n, t, k));
    return acc;
  }

  const double log_tol = std::log(tol);
  double acc = kNegInf;
  double prev = kNegInf;
  for (std::int64_t i = 0; i < max_terms; ++i) {
    const long k = t + static_cast<long>(i);
    const double term = log_term(prior, gamma, n, t, k);
    acc = log_add_exp(acc, term);
    // Past the peak the terms shrink at least geometrically with ratio rho,
    // so the remaining tail is at most term * rho / (1 - rho).
    if (prev != kNegInf && term < prev) {
      const double log_rho = term - prev;
      const double log_tail = term + log_rho - std::log1p(-std::exp(log_rho));
      if (log_tail < acc + log_tol) return acc;
    }
    prev = term;
  }
  throw std::runtime_error("coefficient series did not reach tolerance within " + std::to_string(max_terms) +
                           " terms (n=" + std::to_string(n) + ", t=" + std::to_string(t) + ")");
}

CoefficientTable::CoefficientTable(ComponentCountPrior prior, double gamma, long n, long t_max, double tol)
    : prior_(std::move(prior)), gamma_(gamma), n_(n), tol_(tol) {
  check_args(gamma, n, 1);
  if (!(tol > 0.0)) throw std::invalid_argument("coefficient table: tol must be positive");
  if (t_max < 1 || t_max > n) throw std::invalid_argument("coefficient table: t_max must lie in [1, n]");
  extend(t_max);
}

double CoefficientTable::log_v(long t) const {
  if (t < 1) throw std::out_of_range("coefficient table: t must be positive");
  if (auto kmax = prior_.support_max(); kmax && t > *kmax) return kNegInf;
  if (t > t_max()) throw std::out_of_range("coefficient table: t=" + std::to_string(t) + " beyond t_max=" +
                                           std::to_string(t_max()));
  return log_v_[static_cast<std::size_t>(t - 1)];
}

void CoefficientTable::extend(long t_max) {
  t_max = std::min(t_max, n_);
  for (long t = this->t_max() + 1; t <= t_max; ++t) log_v_.push_back(log_v_series(prior_, gamma_, n_, t, tol_));
}

long default_t_max(const ComponentCountPrior& prior, long n) {
  if (auto kmax = prior.support_max()) return std::min(n, *kmax + 1);
  return std::min(n, 100L);
}

CoefficientTable build_coefficient_table(const ComponentCountPrior& prior, double gamma, long n, long t_max,
                                         double tol) {
  return CoefficientTable(prior, gamma, n, t_max, tol);
}

double log_v_ratio(const CoefficientTable& table, long t) {
  const double here = table.log_v(t);
  if (here == kNegInf) throw std::domain_error("log_v_ratio: t=" + std::to_string(t) + " is outside the prior support");
  const double next = table.log_v(t + 1);
  return next == kNegInf ? kNegInf : next - here;
}

Eigen::VectorXd posterior_k_given_partition(const ComponentCountPrior& prior, double gamma, long n, long t,
                                            double tol) {
  check_args(gamma, n, t);
  if (t > n) throw std::invalid_argument("posterior_k_given_partition: t exceeds n");
  const double log_norm = log_v_series(prior, gamma, n, t, tol);
  if (log_norm == kNegInf)
    throw std::domain_error("posterior_k_given_partition: t=" + std::to_string(t) + " has zero prior mass");

  std::vector<double> mass(static_cast<std::size_t>(t - 1), 0.0);
  double cumulative = 0.0;
  const auto kmax = prior.support_max();
  double previous = 0.0;
  for (long k = t;; ++k) {
    if (kmax && k > *kmax) break;
    const double p = std::exp(log_term(prior, gamma, n, t, k) - log_norm);
    mass.push_back(p);
    cumulative += p;
    if (cumulative >= 1.0 - tol) break;
    // Rounding in the normalizer can leave the cumulative sum just short of
    // 1 - tol; once terms shrink geometrically, stop when the tail is negligible.
    if (p == 0.0 && cumulative > 0.0) break;  // underflow past the peak
    if (k > t && p < previous) {
      const double ratio = p / previous;
      if (p * ratio / (1.0 - ratio) < tol * cumulative) break;
    }
    previous = p;
    if (static_cast<std::int64_t>(k - t) >= kSeriesMaxTerms)
      throw std::runtime_error("posterior_k_given_partition: mass did not accumulate within the term cap");
  }
  Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(mass.data(), static_cast<Eigen::Index>(mass.size()));
  return out / out.sum();
}

}  // namespace mfm
