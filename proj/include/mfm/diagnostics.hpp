#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfm/count_prior.hpp"
#include "mfm/model_config.hpp"
#include "mfm/numeric.hpp"
#include "mfm/rng.hpp"
#include "mfm/sampler.hpp"

namespace mfm {

inline constexpr Eigen::Index kMaxEnumerationSize = 10;

/// Calls visit(rgs, blocks) for every set partition of {0, ..., n-1}, encoded
/// as a restricted-growth string (rgs[0] = 0, rgs[i] <= 1 + max(rgs[0..i-1])),
/// in lexicographic order. `blocks` is the number of distinct labels.
template <typename Visitor>
void for_each_set_partition(int n, Visitor&& visit) {
  if (n < 1) return;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);  // max of rgs[0..i]
  for (;;) {
    visit(static_cast<const std::vector<int>&>(rgs), prefix_max.back() + 1);
    int i = n - 1;
    while (i > 0 && rgs[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) return;
    ++rgs[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] =
        std::max(prefix_max[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < n; ++j) {
      rgs[static_cast<std::size_t>(j)] = 0;
      prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(i)];
    }
  }
}

/// Relabels an assignment vector into restricted-growth form.
std::vector<int> canonical_labels(std::span<const int> z);

struct ExactPosterior {
  /// Normalized log posterior of each partition, in for_each_set_partition order.
  std::vector<double> log_weights;
  /// Entry i is p(k = i + 1 | X).
  Eigen::VectorXd posterior_k;
  /// Entry i is p(t = i + 1 | X).
  Eigen::VectorXd posterior_t;

  std::size_t num_partitions() const { return log_weights.size(); }
};

/// Exact posterior over partitions, t and k by enumerating all Bell(N)
/// partitions; requires N <= 10. Partitions with more clusters than a bounded
/// prior allows get zero weight.
ExactPosterior exact_posterior_k(const DataMatrix& data, const ModelConfig& cfg, double beta);

/// Thrown when log f is -inf at a draw from f0, i.e. f0 is not absolutely
/// continuous with respect to f and KL(f0, f) is infinite.
class SupportViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct KlEstimate {
  double estimate;
  double standard_error;
};

/// Monte Carlo estimate of KL(f0 || f) = E_f0[log f0(X) - log f(X)].
KlEstimate mc_kl_estimate(const std::function<double(Rng&)>& sample_f0, const std::function<double(double)>& log_f0,
                          const std::function<double(double)>& log_f, std::int64_t n_samples, std::uint64_t seed);

/// Integrated autocorrelation time by Geyer's initial positive sequence;
/// nullopt when the series has zero variance.
std::optional<double> integrated_autocorrelation_time(std::span<const double> series);

struct ChainStats {
  double sm_acceptance_rate;
  std::optional<double> autocorrelation_time_t;
};

ChainStats chain_stats(const ChainOutput& out);

/// Averages p(k | t, n) over a trace of cluster counts; entry i is k = i + 1.
Eigen::VectorXd rao_blackwell_posterior_k(const std::vector<long>& trace_t, const ComponentCountPrior& prior,
                                          double gamma, long n);

/// Total variation distance between two pmfs, zero-padding the shorter one.
double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace mfm
