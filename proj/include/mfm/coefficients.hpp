#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mfm/count_prior.hpp"

namespace mfm {

inline constexpr double kSeriesTol = 1e-12;
inline constexpr std::int64_t kSeriesMaxTerms = 10'000'000;

/// log V_n(t) = log sum_{k >= t} k_(t) / (gamma k)^(n) p(k), with k_(t) the
/// falling and (x)^(n) the rising factorial. Summed in log space; for
/// unbounded priors the series stops once the estimated remaining tail falls
/// below `tol` relative to the running sum. Throws std::runtime_error if the
/// cap on terms is hit first.
double log_v_series(const ComponentCountPrior& prior, double gamma, long n, long t, double tol = kSeriesTol,
                    std::int64_t max_terms = kSeriesMaxTerms);

/// Precomputed log V_n(t) for t = 1..t_max at a fixed sample size n.
///
/// For a bounded prior every t beyond the support maximum is -inf regardless
/// of t_max. Entries past t_max within the support are filled on demand by
/// `extend`, so a table owned by one chain can grow; a table shared between
/// threads must not be extended.
class CoefficientTable {
 public:
  CoefficientTable(ComponentCountPrior prior, double gamma, long n, long t_max, double tol = kSeriesTol);

  const ComponentCountPrior& prior() const { return prior_; }
  double gamma() const { return gamma_; }
  long n() const { return n_; }
  long t_max() const { return static_cast<long>(log_v_.size()); }
  double tol() const { return tol_; }

  /// log V_n(t). Throws std::out_of_range for t < 1, or t > t_max inside the prior support.
  double log_v(long t) const;

  /// Grows the table so that log_v(t) is available for all t <= t_max.
  void extend(long t_max);

 private:
  ComponentCountPrior prior_;
  double gamma_;
  long n_;
  double tol_;
  std::vector<double> log_v_;
};

/// min(n, 100) for unbounded priors, min(n, kmax + 1) for bounded ones.
long default_t_max(const ComponentCountPrior& prior, long n);

CoefficientTable build_coefficient_table(const ComponentCountPrior& prior, double gamma, long n, long t_max,
                                         double tol = kSeriesTol);

/// log V_n(t + 1) - log V_n(t): the new-cluster factor of the partition urn.
/// -inf when t + 1 lies outside the prior support. Throws std::domain_error
/// when log V_n(t) itself is -inf.
double log_v_ratio(const CoefficientTable& table, long t);

/// p(k | t clusters, n points), proportional to p(k) k_(t) / (gamma k)^(n).
/// Entry i holds k = i + 1; entries below t are zero. The vector stops where
/// cumulative mass passes 1 - tol and is renormalized over what was kept.
Eigen::VectorXd posterior_k_given_partition(const ComponentCountPrior& prior, double gamma, long n, long t,
                                            double tol = kSeriesTol);

}  // namespace mfm
