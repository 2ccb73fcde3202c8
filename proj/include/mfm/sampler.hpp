#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mfm/coefficients.hpp"
#include "mfm/model_config.hpp"
#include "mfm/numeric.hpp"
#include "mfm/partition.hpp"
#include "mfm/rng.hpp"

namespace mfm {

struct ChainConfig {
  std::int64_t iterations = 20'000;
  std::int64_t burn_in = 2'000;
  std::uint64_t seed = 1;
  int splitmerge_per_sweep = 1;
  int restricted_scans = 5;
  std::int64_t record_every = 1;
  /// Recount cluster statistics every this many iterations (0 disables).
  std::int64_t audit_every = 0;

  void validate() const;
  std::int64_t num_records() const { return (iterations - burn_in + record_every - 1) / record_every; }
};

struct ChainOutput {
  std::vector<long> trace_t;
  std::vector<long> trace_k;
  std::vector<double> trace_beta;
  std::int64_t sm_proposed = 0;
  std::int64_t sm_accepted = 0;
  /// Entry i is the posterior probability of k = i + 1.
  Eigen::VectorXd posterior_k;
  double wallclock = 0.0;
};

/// Normalized histogram of k draws; entry i counts k = i + 1.
Eigen::VectorXd histogram_k(const std::vector<long>& draws);

/// All points in one cluster; beta fixed or drawn from its hyperprior with `seed`.
PartitionState init_partition(const DataMatrix& data, const ModelConfig& cfg, std::uint64_t seed);

/// Reassignment log-weights for x against the current partition (x itself
/// must already be removed). Entry c < t belongs to cluster state.active()[c]
/// and equals log(n_c + gamma) + log p(x | cluster); the last entry is the new
/// cluster, log gamma + log V(t+1)/V(t) + log p(x). Extends `table` if needed.
Eigen::VectorXd urn_log_weights(const PartitionState& state, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const ModelConfig& cfg, CoefficientTable& table);

/// One collapsed Gibbs pass over all observations in index order.
void gibbs_sweep(PartitionState& state, const DataMatrix& data, const ModelConfig& cfg, CoefficientTable& table,
                 Rng& rng);

/// Two clusters being separated by restricted Gibbs scans. Anchor i sits in
/// stats[0], anchor j in stats[1]; `side[s]` places `members[s]`.
struct RestrictedPair {
  std::vector<Eigen::Index> members;
  std::vector<std::uint8_t> side;
  SuffStatsd stats[2];
};

/// One restricted Gibbs pass over pair.members. With `forced` null each point
/// is resampled between the two sides; otherwise it is moved to forced[s].
/// Returns the log probability of the resulting assignment under the scan.
double restricted_scan(RestrictedPair& pair, const DataMatrix& data, const PredictiveKernel& kernel, Rng& rng,
                       const std::vector<std::uint8_t>* forced = nullptr);

/// log [p(split) L(split)] - log [p(merged) L(merged)], where the merged
/// configuration has `t_merged` clusters and the split one t_merged + 1.
/// -inf when the split configuration has zero prior mass.
double log_split_ratio(const SuffStatsd& part_a, const SuffStatsd& part_b, long t_merged, const ModelConfig& cfg,
                       double beta, CoefficientTable& table);

/// One Jain-Neal split-merge proposal. Returns true when accepted.
bool split_merge_move(PartitionState& state, const DataMatrix& data, const ModelConfig& cfg, CoefficientTable& table,
                      Rng& rng, int restricted_scans);

/// Draws tau_cd ~ Gamma(alpha + n_c/2, beta_n) for every occupied cluster
/// (rows in state.active() order) and dimension.
Eigen::MatrixXd draw_cluster_precisions(const PartitionState& state, const ModelConfig& cfg, Rng& rng);

/// Gamma(u + t D alpha, v + sum tau): the conditional of beta given cluster
/// precisions `tau` (t rows, D columns). With no clusters this is the prior.
BetaHyperprior beta_conditional(const ModelConfig& cfg, const Eigen::MatrixXd& tau);

/// Conditional update of beta under its Gamma(u, v) hyperprior:
/// beta ~ Gamma(u + t D alpha, v + sum tau). Stores and returns the new beta.
double resample_beta(PartitionState& state, const ModelConfig& cfg, Rng& rng);

/// Sampler for k given t that caches the cumulative posterior per t.
class ComponentCountSampler {
 public:
  ComponentCountSampler(ComponentCountPrior prior, double gamma, long n, double tol = kSeriesTol)
      : prior_(std::move(prior)), gamma_(gamma), n_(n), tol_(tol) {}

  long draw(long t, Rng& rng);

 private:
  ComponentCountPrior prior_;
  double gamma_;
  long n_;
  double tol_;
  std::unordered_map<long, std::vector<double>> cdf_;
};

long draw_k_given_t(const ComponentCountPrior& prior, double gamma, long n, long t, Rng& rng);

/// Runs one chain: per iteration a Gibbs sweep, then the split-merge moves,
/// then the beta update when beta is random. Past burn-in every
/// record_every-th iteration records t, a draw of k and beta. Deterministic
/// given (data, cfg, chain) apart from the wallclock field.
ChainOutput run_chain(const DataMatrix& data, const ModelConfig& cfg, const ChainConfig& chain);

}  // namespace mfm
